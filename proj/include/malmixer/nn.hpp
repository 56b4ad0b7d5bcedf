#pragma once

#include "malmixer/common.hpp"
#include "malmixer/rng.hpp"

#include <cmath>
#include <vector>

namespace malmixer::nn {

template <typename T>
struct Linear {
  MatX<T> weight;  // out x in
  VecX<T> bias;    // out; size 0 for bias-free layers

  int in_dim() const { return static_cast<int>(weight.cols()); }
  int out_dim() const { return static_cast<int>(weight.rows()); }
  bool has_bias() const { return bias.size() > 0; }

  Linear<T> zeros_like() const {
    Linear<T> g;
    g.weight = MatX<T>::Zero(weight.rows(), weight.cols());
    g.bias = VecX<T>::Zero(bias.size());
    return g;
  }
  void set_zero() {
    weight.setZero();
    bias.setZero();
  }
};

/// Fan-in-scaled uniform init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights
/// and bias, drawn row-major then bias, so layouts are reproducible.
template <typename T>
Linear<T> init_linear(int in_dim, int out_dim, Rng& rng, bool with_bias = true) {
  Linear<T> l;
  l.weight.resize(out_dim, in_dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (int r = 0; r < out_dim; ++r)
    for (int c = 0; c < in_dim; ++c)
      l.weight(r, c) = static_cast<T>((rng.uniform() * 2.0 - 1.0) * bound);
  if (with_bias) {
    l.bias.resize(out_dim);
    for (int r = 0; r < out_dim; ++r)
      l.bias(r) = static_cast<T>((rng.uniform() * 2.0 - 1.0) * bound);
  }
  return l;
}

template <typename T>
MatX<T> linear_forward(const Linear<T>& l, const MatX<T>& x) {
  if (x.cols() != l.weight.cols()) throw Error("linear: input width mismatch");
  MatX<T> z = x * l.weight.transpose();
  if (l.has_bias()) z.rowwise() += l.bias.transpose();
  return z;
}

/// dz -> (dx, accumulate dW, db). x is the layer input that produced dz.
template <typename T>
MatX<T> linear_backward(const Linear<T>& l, const MatX<T>& x, const MatX<T>& dz,
                        Linear<T>& grad) {
  grad.weight.noalias() += dz.transpose() * x;
  if (l.has_bias()) grad.bias.noalias() += dz.colwise().sum().transpose();
  return dz * l.weight;
}

template <typename T>
MatX<T> leaky_relu(const MatX<T>& z, T slope) {
  return z.unaryExpr([slope](T v) { return v > T(0) ? v : slope * v; });
}

template <typename T>
MatX<T> leaky_relu_grad(const MatX<T>& z, const MatX<T>& dout, T slope) {
  return (z.array() > T(0)).select(dout, dout * slope);
}

/// Stack of linear layers with leaky-ReLU on every hidden layer and a linear
/// final layer.
template <typename T>
struct Mlp {
  std::vector<Linear<T>> layers;
  T negative_slope = T(0.01);

  int in_dim() const { return layers.front().in_dim(); }
  int out_dim() const { return layers.back().out_dim(); }
  std::vector<int> widths() const {
    std::vector<int> w;
    for (const auto& l : layers) w.push_back(l.out_dim());
    return w;
  }

  MatX<T> forward(const MatX<T>& x) const {
    MatX<T> h = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      h = linear_forward(layers[i], h);
      if (i + 1 < layers.size()) h = leaky_relu(h, negative_slope);
    }
    return h;
  }
};

template <typename T>
struct MlpCache {
  std::vector<MatX<T>> inputs;  // input to each layer
  std::vector<MatX<T>> preact;  // z of each layer
};

template <typename T>
MatX<T> mlp_forward_cached(const Mlp<T>& m, const MatX<T>& x, MlpCache<T>& cache) {
  cache.inputs.clear();
  cache.preact.clear();
  MatX<T> h = x;
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    cache.inputs.push_back(h);
    MatX<T> z = linear_forward(m.layers[i], h);
    cache.preact.push_back(z);
    h = (i + 1 < m.layers.size()) ? leaky_relu(z, m.negative_slope) : z;
  }
  return h;
}

/// Backprop through the whole stack; returns d(input), accumulates into grads.
template <typename T>
MatX<T> mlp_backward(const Mlp<T>& m, const MlpCache<T>& cache, const MatX<T>& dout,
                     std::vector<Linear<T>>& grads) {
  MatX<T> d = dout;
  for (std::size_t i = m.layers.size(); i-- > 0;) {
    if (i + 1 < m.layers.size()) d = leaky_relu_grad(cache.preact[i], d, m.negative_slope);
    d = linear_backward(m.layers[i], cache.inputs[i], d, grads[i]);
  }
  return d;
}

template <typename T>
Mlp<T> make_mlp(int in_dim, const std::vector<int>& widths, Rng& rng, T negative_slope = T(0.01)) {
  if (widths.empty()) throw Error("mlp needs at least one layer");
  Mlp<T> m;
  m.negative_slope = negative_slope;
  int prev = in_dim;
  for (int w : widths) {
    m.layers.push_back(init_linear<T>(prev, w, rng));
    prev = w;
  }
  return m;
}

template <typename T>
std::vector<Linear<T>> zero_grads_like(const Mlp<T>& m) {
  std::vector<Linear<T>> g;
  g.reserve(m.layers.size());
  for (const auto& l : m.layers) g.push_back(l.zeros_like());
  return g;
}

/// Adam with bias correction and decoupled multiplicative weight decay:
/// p <- p*(1 - lr*wd) - lr * mhat / (sqrt(vhat) + eps).
template <typename T>
class AdamW {
 public:
  AdamW(T lr, T weight_decay, T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8))
      : lr_(lr), wd_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<Linear<T>*>& params, const std::vector<const Linear<T>*>& grads) {
    if (params.size() != grads.size()) throw Error("optimizer: param/grad count mismatch");
    if (m_.empty()) {
      for (const auto* p : params) {
        m_.push_back(p->zeros_like());
        v_.push_back(p->zeros_like());
      }
    }
    if (m_.size() != params.size()) throw Error("optimizer: state size mismatch");
    ++t_;
    const T bc1 = T(1) - std::pow(beta1_, static_cast<T>(t_));
    const T bc2 = T(1) - std::pow(beta2_, static_cast<T>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = *params[i];
      const auto& g = *grads[i];
      if (p.weight.rows() != g.weight.rows() || p.weight.cols() != g.weight.cols() ||
          p.bias.size() != g.bias.size())
        throw Error("optimizer: gradient shape mismatch");
      if (!g.weight.allFinite() || !g.bias.allFinite())
        throw Error("optimizer: non-finite gradient");
      update(p.weight, g.weight, m_[i].weight, v_[i].weight, bc1, bc2);
      if (p.has_bias()) update(p.bias, g.bias, m_[i].bias, v_[i].bias, bc1, bc2);
    }
  }

  long step_count() const { return t_; }

 private:
  template <typename D1, typename D2>
  void update(Eigen::MatrixBase<D1>& p, const Eigen::MatrixBase<D2>& g, Eigen::MatrixBase<D1>& m,
              Eigen::MatrixBase<D1>& v, T bc1, T bc2) {
    m = beta1_ * m + (T(1) - beta1_) * g;
    v.array() = beta2_ * v.array() + (T(1) - beta2_) * g.array().square();
    if (wd_ != T(0)) p *= (T(1) - lr_ * wd_);
    p.array() -= lr_ * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps_);
  }

  T lr_, wd_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Linear<T>> m_, v_;
};

}  // namespace malmixer::nn
