#pragma once

#include "malmixer/nn.hpp"
#include "malmixer/schema.hpp"

#include <filesystem>
#include <vector>

namespace malmixer {

struct EncoderConfig {
  std::vector<int> phi_i_layers{512, 512, 512};
  std::vector<int> phi_n_layers{1024, 1024, 512, 512, 512};
  int hidden_dim = 512;
  int sim_dim = 256;
  int dis_dim = 256;
  float margin = 5.0f;
  int epochs = 50;
  int batch_size = 256;
  float learning_rate = 5e-5f;
  float weight_decay = 1e-5f;
  std::uint64_t seed = 17;

  void validate() const {
    if (sim_dim + dis_dim != hidden_dim) throw ConfigError("sim_dim + dis_dim must equal hidden_dim");
    if (sim_dim <= 0 || dis_dim <= 0) throw ConfigError("sim_dim and dis_dim must be positive");
    if (margin <= 0.0f) throw ConfigError("margin must be positive");
    if (phi_i_layers.empty() || phi_n_layers.empty()) throw ConfigError("encoder layer lists must be non-empty");
    if (phi_i_layers.back() != hidden_dim || phi_n_layers.back() != hidden_dim)
      throw ConfigError("both encoders must end at hidden_dim");
    if (epochs < 0 || batch_size < 1) throw ConfigError("bad epochs/batch_size");
  }
};

/// Paired encoder-decoders over the interpolatable and non-interpolatable
/// halves. Decoders mirror their encoder widths in reverse. Once frozen, any
/// attempt to obtain a mutable view throws.
template <typename T>
class InvarianceModelT {
 public:
  InvarianceModelT() = default;

  static InvarianceModelT init(const EncoderConfig& config, int dim_i, int dim_n) {
    config.validate();
    if (dim_i < 1 || dim_n < 1) throw Error("encoder input dims must be positive");
    InvarianceModelT m;
    m.config_ = config;
    m.dim_i_ = dim_i;
    m.dim_n_ = dim_n;
    Rng rng(config.seed);
    const T slope = T(0.01);
    m.phi_i_ = nn::make_mlp<T>(dim_i, config.phi_i_layers, rng, slope);
    m.psi_i_ = nn::make_mlp<T>(config.hidden_dim, mirror(config.phi_i_layers, dim_i), rng, slope);
    m.phi_n_ = nn::make_mlp<T>(dim_n, config.phi_n_layers, rng, slope);
    m.psi_n_ = nn::make_mlp<T>(config.hidden_dim, mirror(config.phi_n_layers, dim_n), rng, slope);
    return m;
  }

  const EncoderConfig& config() const { return config_; }
  int dim_i() const { return dim_i_; }
  int dim_n() const { return dim_n_; }
  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }

  const nn::Mlp<T>& phi_i() const { return phi_i_; }
  const nn::Mlp<T>& psi_i() const { return psi_i_; }
  const nn::Mlp<T>& phi_n() const { return phi_n_; }
  const nn::Mlp<T>& psi_n() const { return psi_n_; }

  nn::Mlp<T>& mutable_phi_i() { return mutable_net(phi_i_); }
  nn::Mlp<T>& mutable_psi_i() { return mutable_net(psi_i_); }
  nn::Mlp<T>& mutable_phi_n() { return mutable_net(phi_n_); }
  nn::Mlp<T>& mutable_psi_n() { return mutable_net(psi_n_); }

  MatX<T> encode_i(const MatX<T>& s_i) const {
    if (s_i.cols() != dim_i_) throw Error("encode_i: input width != interpolatable size");
    return phi_i_.forward(s_i);
  }
  MatX<T> encode_n(const MatX<T>& s_n) const {
    if (s_n.cols() != dim_n_) throw Error("encode_n: input width != non-interpolatable size");
    return phi_n_.forward(s_n);
  }

  /// Convention: the first sim_dim entries of h are the similar half.
  auto sim_half(const MatX<T>& h) const { return h.leftCols(config_.sim_dim); }
  auto dis_half(const MatX<T>& h) const { return h.rightCols(config_.dis_dim); }

 private:
  static std::vector<int> mirror(const std::vector<int>& enc_widths, int input_dim) {
    std::vector<int> w;
    for (std::size_t i = enc_widths.size() - 1; i-- > 0;) w.push_back(enc_widths[i]);
    w.push_back(input_dim);
    return w;
  }
  nn::Mlp<T>& mutable_net(nn::Mlp<T>& net) {
    if (frozen_) throw Error("invariance model is frozen; parameters are immutable");
    return net;
  }

  nn::Mlp<T> phi_i_, psi_i_, phi_n_, psi_n_;
  EncoderConfig config_;
  int dim_i_ = 0, dim_n_ = 0;
  bool frozen_ = false;
};

using InvarianceModel = InvarianceModelT<float>;

struct EncoderLossTerms {
  double recon = 0.0;
  double sim = 0.0;
  double dis = 0.0;
  double total() const { return recon + sim + dis; }
};

struct LossSelect {
  bool recon = true;
  bool sim = true;
  bool dis = true;
};

template <typename T>
struct EncoderGrads {
  std::vector<nn::Linear<T>> phi_i, psi_i, phi_n, psi_n;

  static EncoderGrads zeros_like(const InvarianceModelT<T>& m) {
    return {nn::zero_grads_like(m.phi_i()), nn::zero_grads_like(m.psi_i()),
            nn::zero_grads_like(m.phi_n()), nn::zero_grads_like(m.psi_n())};
  }
  void set_zero() {
    for (auto* block : {&phi_i, &psi_i, &phi_n, &psi_n})
      for (auto& l : *block) l.set_zero();
  }
};

/// Evaluates the selected loss terms on a batch; when grads is non-null also
/// backpropagates their sum. Loss sums accumulate in 64-bit.
template <typename T>
EncoderLossTerms encoder_losses(const InvarianceModelT<T>& model, const MatX<T>& s_i,
                                const MatX<T>& s_n, const LossSelect& select = {},
                                EncoderGrads<T>* grads = nullptr) {
  if (s_i.rows() == 0 || s_i.rows() != s_n.rows()) throw Error("encoder loss needs a non-empty batch");
  const Eigen::Index n = s_i.rows();
  const T inv_n = T(1) / static_cast<T>(n);
  const int sim_dim = model.config().sim_dim;
  const int dis_dim = model.config().dis_dim;
  const T margin = static_cast<T>(model.config().margin);

  nn::MlpCache<T> c_phi_i, c_psi_i, c_phi_n, c_psi_n;
  MatX<T> h_i = mlp_forward_cached(model.phi_i(), s_i, c_phi_i);
  MatX<T> h_n = mlp_forward_cached(model.phi_n(), s_n, c_phi_n);
  MatX<T> r_i = mlp_forward_cached(model.psi_i(), h_i, c_psi_i);
  MatX<T> r_n = mlp_forward_cached(model.psi_n(), h_n, c_psi_n);

  EncoderLossTerms terms;
  MatX<T> e_i = r_i - s_i;
  MatX<T> e_n = r_n - s_n;
  terms.recon = (e_i.template cast<double>().array().square().sum() +
                 e_n.template cast<double>().array().square().sum()) /
                static_cast<double>(n);

  MatX<T> d_sim = h_i.leftCols(sim_dim) - h_n.leftCols(sim_dim);
  terms.sim = d_sim.template cast<double>().array().square().sum() / static_cast<double>(n);

  MatX<T> d_dis = h_i.rightCols(dis_dim) - h_n.rightCols(dis_dim);
  VecX<T> dist_sq = d_dis.rowwise().squaredNorm();
  double dis_sum = 0.0;
  for (Eigen::Index r = 0; r < n; ++r)
    dis_sum += std::max(0.0, static_cast<double>(margin) - static_cast<double>(dist_sq(r)));
  terms.dis = dis_sum / static_cast<double>(n);

  if (!select.recon) terms.recon = 0.0;
  if (!select.sim) terms.sim = 0.0;
  if (!select.dis) terms.dis = 0.0;

  if (grads != nullptr) {
    MatX<T> dh_i = MatX<T>::Zero(n, model.config().hidden_dim);
    MatX<T> dh_n = MatX<T>::Zero(n, model.config().hidden_dim);
    if (select.recon) {
      MatX<T> dr_i = T(2) * inv_n * e_i;
      MatX<T> dr_n = T(2) * inv_n * e_n;
      dh_i += mlp_backward(model.psi_i(), c_psi_i, dr_i, grads->psi_i);
      dh_n += mlp_backward(model.psi_n(), c_psi_n, dr_n, grads->psi_n);
    }
    if (select.sim) {
      dh_i.leftCols(sim_dim) += T(2) * inv_n * d_sim;
      dh_n.leftCols(sim_dim) -= T(2) * inv_n * d_sim;
    }
    if (select.dis) {
      for (Eigen::Index r = 0; r < n; ++r) {
        if (static_cast<double>(dist_sq(r)) < static_cast<double>(margin)) {
          dh_i.row(r).tail(dis_dim) -= T(2) * inv_n * d_dis.row(r);
          dh_n.row(r).tail(dis_dim) += T(2) * inv_n * d_dis.row(r);
        }
      }
    }
    mlp_backward(model.phi_i(), c_phi_i, dh_i, grads->phi_i);
    mlp_backward(model.phi_n(), c_phi_n, dh_n, grads->phi_n);
  }
  return terms;
}

template <typename T>
double reconstruction_loss(const InvarianceModelT<T>& m, const MatX<T>& s_i, const MatX<T>& s_n) {
  return encoder_losses(m, s_i, s_n, {true, false, false}).recon;
}
template <typename T>
double similarity_loss(const InvarianceModelT<T>& m, const MatX<T>& s_i, const MatX<T>& s_n) {
  return encoder_losses(m, s_i, s_n, {false, true, false}).sim;
}
template <typename T>
double dissimilarity_loss(const InvarianceModelT<T>& m, const MatX<T>& s_i, const MatX<T>& s_n) {
  return encoder_losses(m, s_i, s_n, {false, false, true}).dis;
}

struct EmbeddingTables {
  MatXf h_n;      // n x hidden_dim, N-retrieval embedding
  MatXf h_i_sim;  // n x sim_dim
  MatXf h_n_sim;  // n x sim_dim
};

/// Per-epoch losses written by train_invariance_model.
struct EncoderEpochLog {
  int epoch;
  EncoderLossTerms losses;
};

struct TrainedEncoder {
  InvarianceModel model;  // frozen
  std::vector<EncoderEpochLog> curve;
};

/// Trains the paired encoder-decoders on the standardized feature matrix and
/// returns the frozen model plus its training curve.
TrainedEncoder train_invariance_model(const MatXf& features_std, const FeatureSchema& schema,
                                      const EncoderConfig& config);

/// Projects every row through the frozen encoders.
EmbeddingTables build_embeddings(const MatXf& features_std, const FeatureSchema& schema,
                                 const InvarianceModel& model);

void save_invariance_model(const InvarianceModel& model, const std::filesystem::path& manifest);
InvarianceModel load_invariance_model(const std::filesystem::path& manifest);

}  // namespace malmixer
