#include "malmixer/encoder.hpp"

#include "malmixer/serialize.hpp"

#include <cmath>

namespace malmixer {

TrainedEncoder train_invariance_model(const MatXf& features_std, const FeatureSchema& schema,
                                      const EncoderConfig& config) {
  config.validate();
  const int n = static_cast<int>(features_std.rows());
  if (n < config.batch_size)
    throw Error("dataset (" + std::to_string(n) + " rows) is smaller than one batch (" +
                std::to_string(config.batch_size) + ")");
  MatXf s_i = schema.split_i(features_std);
  MatXf s_n = schema.split_n(features_std);

  InvarianceModel model = InvarianceModel::init(
      config, static_cast<int>(s_i.cols()), static_cast<int>(s_n.cols()));
  auto grads = EncoderGrads<float>::zeros_like(model);
  nn::AdamW<float> opt(config.learning_rate, config.weight_decay);
  std::vector<nn::Linear<float>*> params;
  std::vector<const nn::Linear<float>*> grad_ptrs;
  for (auto* net : {&model.mutable_phi_i(), &model.mutable_psi_i(), &model.mutable_phi_n(),
                    &model.mutable_psi_n()})
    for (auto& l : net->layers) params.push_back(&l);
  for (auto* block : {&grads.phi_i, &grads.psi_i, &grads.phi_n, &grads.psi_n})
    for (auto& l : *block) grad_ptrs.push_back(&l);

  Rng shuffle_rng(derive_seed(config.seed, 0x5u));
  TrainedEncoder out;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto order = shuffle_rng.permutation(n);
    EncoderLossTerms epoch_terms;
    int batches = 0;
    for (int start = 0; start < n; start += config.batch_size) {
      const int b = std::min(config.batch_size, n - start);
      MatXf batch_i(b, s_i.cols()), batch_n(b, s_n.cols());
      for (int r = 0; r < b; ++r) {
        batch_i.row(r) = s_i.row(order[static_cast<std::size_t>(start + r)]);
        batch_n.row(r) = s_n.row(order[static_cast<std::size_t>(start + r)]);
      }
      grads.set_zero();
      EncoderLossTerms terms = encoder_losses(model, batch_i, batch_n, {}, &grads);
      if (!std::isfinite(terms.total()))
        throw Error("non-finite encoder loss at epoch " + std::to_string(epoch) + " (recon=" +
                    std::to_string(terms.recon) + ", sim=" + std::to_string(terms.sim) +
                    ", dis=" + std::to_string(terms.dis) + ")");
      opt.step(params, grad_ptrs);
      epoch_terms.recon += terms.recon;
      epoch_terms.sim += terms.sim;
      epoch_terms.dis += terms.dis;
      ++batches;
    }
    epoch_terms.recon /= batches;
    epoch_terms.sim /= batches;
    epoch_terms.dis /= batches;
    out.curve.push_back({epoch, epoch_terms});
  }
  model.freeze();
  out.model = std::move(model);
  return out;
}

EmbeddingTables build_embeddings(const MatXf& features_std, const FeatureSchema& schema,
                                 const InvarianceModel& model) {
  if (!model.frozen()) throw Error("build_embeddings requires a frozen model");
  const int n = static_cast<int>(features_std.rows());
  MatXf s_i = schema.split_i(features_std);
  MatXf s_n = schema.split_n(features_std);
  const int hidden = model.config().hidden_dim;
  const int sim = model.config().sim_dim;
  EmbeddingTables t;
  t.h_n.resize(n, hidden);
  t.h_i_sim.resize(n, sim);
  t.h_n_sim.resize(n, sim);
  // Row-at-a-time so each table row is bit-identical to an independent
  // single-row encode, for any thread count.
  parallel_for_rows(n, [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      MatXf h_i = model.encode_i(s_i.middleRows(r, 1));
      MatXf h_n = model.encode_n(s_n.middleRows(r, 1));
      t.h_n.row(r) = h_n.row(0);
      t.h_i_sim.row(r) = h_i.row(0).head(sim);
      t.h_n_sim.row(r) = h_n.row(0).head(sim);
    }
  });
  return t;
}

void save_invariance_model(const InvarianceModel& model, const std::filesystem::path& manifest) {
  const auto& c = model.config();
  json meta{{"kind", "invariance_model"},
            {"frozen", model.frozen()},
            {"dim_i", model.dim_i()},
            {"dim_n", model.dim_n()},
            {"config",
             {{"phi_i_layers", c.phi_i_layers},
              {"phi_n_layers", c.phi_n_layers},
              {"hidden_dim", c.hidden_dim},
              {"sim_dim", c.sim_dim},
              {"dis_dim", c.dis_dim},
              {"margin", c.margin},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate},
              {"weight_decay", c.weight_decay},
              {"seed", c.seed}}}};
  TensorPack pack;
  pack.add_mlp("phi_i", model.phi_i());
  pack.add_mlp("psi_i", model.psi_i());
  pack.add_mlp("phi_n", model.phi_n());
  pack.add_mlp("psi_n", model.psi_n());
  pack.save(manifest, std::move(meta));
}

InvarianceModel load_invariance_model(const std::filesystem::path& manifest_path) {
  json manifest;
  TensorPack pack = TensorPack::load(manifest_path, &manifest);
  if (manifest.value("kind", "") != "invariance_model")
    throw Error(manifest_path.string() + " is not an invariance model");
  const json& jc = manifest.at("config");
  EncoderConfig c;
  c.phi_i_layers = jc.at("phi_i_layers").get<std::vector<int>>();
  c.phi_n_layers = jc.at("phi_n_layers").get<std::vector<int>>();
  c.hidden_dim = jc.at("hidden_dim").get<int>();
  c.sim_dim = jc.at("sim_dim").get<int>();
  c.dis_dim = jc.at("dis_dim").get<int>();
  c.margin = jc.at("margin").get<float>();
  c.epochs = jc.at("epochs").get<int>();
  c.batch_size = jc.at("batch_size").get<int>();
  c.learning_rate = jc.at("learning_rate").get<float>();
  c.weight_decay = jc.at("weight_decay").get<float>();
  c.seed = jc.at("seed").get<std::uint64_t>();

  InvarianceModel model = InvarianceModel::init(c, manifest.at("dim_i").get<int>(),
                                                manifest.at("dim_n").get<int>());
  model.mutable_phi_i() = pack.mlp("phi_i", static_cast<int>(c.phi_i_layers.size()), 0.01f);
  model.mutable_psi_i() = pack.mlp("psi_i", static_cast<int>(c.phi_i_layers.size()), 0.01f);
  model.mutable_phi_n() = pack.mlp("phi_n", static_cast<int>(c.phi_n_layers.size()), 0.01f);
  model.mutable_psi_n() = pack.mlp("psi_n", static_cast<int>(c.phi_n_layers.size()), 0.01f);
  if (manifest.value("frozen", false)) model.freeze();
  return model;
}

}  // namespace malmixer
