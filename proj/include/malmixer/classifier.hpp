#pragma once

#include "malmixer/nn.hpp"

#include <filesystem>
#include <vector>

namespace malmixer {

struct FCResNetConfig {
  int input_dim = 0;
  int stem_dim = 1024;
  std::vector<int> group_dims{1024, 512, 256, 128};
  int blocks_per_group = 3;
  float negative_slope = 0.01f;
  int num_classes = 0;
  std::uint64_t seed = 17;

  void validate() const {
    if (input_dim < 1 || num_classes < 1) throw ConfigError("classifier needs input_dim and num_classes");
    if (blocks_per_group < 1) throw ConfigError("blocks_per_group must be >= 1");
    if (group_dims.empty()) throw ConfigError("group_dims must be non-empty");
    if (stem_dim != group_dims.front()) throw ConfigError("stem_dim must equal group_dims.front()");
    for (std::size_t g = 1; g < group_dims.size(); ++g)
      if (group_dims[g] > group_dims[g - 1]) throw ConfigError("group_dims must be non-increasing");
  }
};

/// Residual MLP: linear stem, groups of residual blocks
/// out = act(L2(act(L1(in)))) + proj(in), a bias-free learned projection
/// exactly where consecutive dims differ, then a linear head. No
/// normalization layers anywhere.
template <typename T>
struct FCResNetT {
  struct Block {
    nn::Linear<T> l1, l2;
    nn::Linear<T> proj;  // empty weight when the block is width-preserving
    bool has_proj = false;
  };

  nn::Linear<T> stem;
  std::vector<Block> blocks;
  nn::Linear<T> head;
  FCResNetConfig config;

  static FCResNetT init(const FCResNetConfig& cfg) {
    cfg.validate();
    FCResNetT net;
    net.config = cfg;
    Rng rng(cfg.seed);
    net.stem = nn::init_linear<T>(cfg.input_dim, cfg.stem_dim, rng);
    int prev = cfg.stem_dim;
    for (int width : cfg.group_dims) {
      for (int b = 0; b < cfg.blocks_per_group; ++b) {
        Block blk;
        const int in_dim = (b == 0) ? prev : width;
        blk.l1 = nn::init_linear<T>(in_dim, width, rng);
        blk.l2 = nn::init_linear<T>(width, width, rng);
        blk.has_proj = (in_dim != width);
        if (blk.has_proj) blk.proj = nn::init_linear<T>(in_dim, width, rng, /*with_bias=*/false);
        net.blocks.push_back(std::move(blk));
      }
      prev = width;
    }
    net.head = nn::init_linear<T>(prev, cfg.num_classes, rng);
    return net;
  }

  FCResNetT zeros_like() const {
    FCResNetT g = *this;
    g.set_zero();
    return g;
  }

  void set_zero() {
    stem.set_zero();
    for (auto& b : blocks) {
      b.l1.set_zero();
      b.l2.set_zero();
      if (b.has_proj) b.proj.set_zero();
    }
    head.set_zero();
  }

  std::vector<nn::Linear<T>*> param_ptrs() {
    std::vector<nn::Linear<T>*> p{&stem};
    for (auto& b : blocks) {
      p.push_back(&b.l1);
      p.push_back(&b.l2);
      if (b.has_proj) p.push_back(&b.proj);
    }
    p.push_back(&head);
    return p;
  }
  std::vector<const nn::Linear<T>*> param_ptrs() const {
    std::vector<const nn::Linear<T>*> p{&stem};
    for (const auto& b : blocks) {
      p.push_back(&b.l1);
      p.push_back(&b.l2);
      if (b.has_proj) p.push_back(&b.proj);
    }
    p.push_back(&head);
    return p;
  }

  struct Cache {
    MatX<T> x;
    std::vector<MatX<T>> block_in, z1, a1, z2;
    MatX<T> head_in;
  };

  MatX<T> forward_cached(const MatX<T>& x, Cache& cache) const {
    if (x.cols() != config.input_dim) throw Error("classifier: input width mismatch");
    const T slope = static_cast<T>(config.negative_slope);
    cache.x = x;
    cache.block_in.clear();
    cache.z1.clear();
    cache.a1.clear();
    cache.z2.clear();
    MatX<T> h = nn::linear_forward(stem, x);
    for (const auto& b : blocks) {
      cache.block_in.push_back(h);
      MatX<T> z1 = nn::linear_forward(b.l1, h);
      MatX<T> a1 = nn::leaky_relu(z1, slope);
      MatX<T> z2 = nn::linear_forward(b.l2, a1);
      MatX<T> a2 = nn::leaky_relu(z2, slope);
      MatX<T> skip = b.has_proj ? MatX<T>(h * b.proj.weight.transpose()) : h;
      h = a2 + skip;
      cache.z1.push_back(std::move(z1));
      cache.a1.push_back(std::move(a1));
      cache.z2.push_back(std::move(z2));
    }
    cache.head_in = h;
    return nn::linear_forward(head, h);
  }

  MatX<T> forward(const MatX<T>& x) const {
    Cache c;
    return forward_cached(x, c);
  }

  void backward(const Cache& cache, const MatX<T>& dlogits, FCResNetT& grads) const {
    const T slope = static_cast<T>(config.negative_slope);
    MatX<T> d = nn::linear_backward(head, cache.head_in, dlogits, grads.head);
    for (std::size_t i = blocks.size(); i-- > 0;) {
      const auto& b = blocks[i];
      MatX<T> d_skip;
      if (b.has_proj) {
        grads.blocks[i].proj.weight.noalias() += d.transpose() * cache.block_in[i];
        d_skip = d * b.proj.weight;
      } else {
        d_skip = d;
      }
      MatX<T> dz2 = nn::leaky_relu_grad(cache.z2[i], d, slope);
      MatX<T> da1 = nn::linear_backward(b.l2, cache.a1[i], dz2, grads.blocks[i].l2);
      MatX<T> dz1 = nn::leaky_relu_grad(cache.z1[i], da1, slope);
      MatX<T> dx = nn::linear_backward(b.l1, cache.block_in[i], dz1, grads.blocks[i].l1);
      d = dx + d_skip;
    }
    nn::linear_backward(stem, cache.x, d, grads.stem);
  }

  MatX<T> predict_proba(const MatX<T>& x) const;
  std::vector<int> predict(const MatX<T>& x) const;
};

using FCResNet = FCResNetT<float>;

/// Numerically stable row softmax.
template <typename T>
MatX<T> softmax_rows(const MatX<T>& logits) {
  MatX<T> p(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const T mx = logits.row(r).maxCoeff();
    p.row(r) = (logits.row(r).array() - mx).exp();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

template <typename T>
MatX<T> FCResNetT<T>::predict_proba(const MatX<T>& x) const {
  return softmax_rows<T>(forward(x));
}

template <typename T>
std::vector<int> FCResNetT<T>::predict(const MatX<T>& x) const {
  MatX<T> logits = forward(x);
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    int best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c)
      if (logits(r, c) > logits(r, best)) best = static_cast<int>(c);
    out[static_cast<std::size_t>(r)] = best;
  }
  return out;
}

/// Mean soft-target cross-entropy, -sum_c y_c log p_c, accumulated in 64-bit.
template <typename T>
double soft_cross_entropy(const MatX<T>& probs, const MatX<T>& targets) {
  if (probs.rows() != targets.rows() || probs.cols() != targets.cols())
    throw Error("cross-entropy: shape mismatch");
  double total = 0.0;
  for (Eigen::Index r = 0; r < probs.rows(); ++r)
    for (Eigen::Index c = 0; c < probs.cols(); ++c) {
      const double y = static_cast<double>(targets(r, c));
      if (y > 0.0) total -= y * std::log(std::max(static_cast<double>(probs(r, c)), 1e-12));
    }
  return total / static_cast<double>(probs.rows());
}

/// d(mean CE)/dlogits = (p - y) / n.
template <typename T>
MatX<T> soft_cross_entropy_grad_logits(const MatX<T>& probs, const MatX<T>& targets) {
  return (probs - targets) / static_cast<T>(probs.rows());
}

/// Mean squared L2 between target and predicted distributions.
template <typename T>
double brier_loss(const MatX<T>& probs, const MatX<T>& targets) {
  if (probs.rows() != targets.rows() || probs.cols() != targets.cols())
    throw Error("brier: shape mismatch");
  return (probs - targets).template cast<double>().array().square().sum() /
         static_cast<double>(probs.rows());
}

/// Chain rule through softmax: d/dlogit_k = 2/n * p_k ((p-y)_k - <p-y, p>).
template <typename T>
MatX<T> brier_grad_logits(const MatX<T>& probs, const MatX<T>& targets) {
  MatX<T> e = probs - targets;
  MatX<T> d(probs.rows(), probs.cols());
  const T scale = T(2) / static_cast<T>(probs.rows());
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    const T dot = e.row(r).dot(probs.row(r));
    d.row(r) = (probs.row(r).array() * (e.row(r).array() - dot)).matrix() * scale;
  }
  return d;
}

void save_classifier(const FCResNet& net, const std::filesystem::path& manifest);
FCResNet load_classifier(const std::filesystem::path& manifest);

}  // namespace malmixer
