#include "malmixer/augment.hpp"

#include "malmixer/io.hpp"

namespace malmixer {

AugmentationContext build_augmentation_context(const MatXf& features_std,
                                               const FeatureSchema& schema,
                                               InvarianceModel model,
                                               const AugmentationConfig& config) {
  config.validate();
  if (!model.frozen()) throw Error("augmentation context needs a frozen model");
  AugmentationContext ctx{schema,
                          features_std,
                          schema.split_i(features_std),
                          schema.split_n(features_std),
                          std::move(model),
                          {},
                          {},
                          std::nullopt};
  ctx.tables = build_embeddings(features_std, schema, ctx.model);
  std::vector<int> ids(static_cast<std::size_t>(ctx.n()));
  for (int r = 0; r < ctx.n(); ++r) ids[static_cast<std::size_t>(r)] = r;
  ctx.neighbor_graph = knn_graph(ctx.features, ids, config.k_neighbors);
  ctx.hn_index.emplace(ctx.tables.h_n, ids);
  return ctx;
}

Eigen::RowVectorXf mix_interpolatable(Eigen::Ref<const Eigen::RowVectorXf> s_i,
                                      Eigen::Ref<const Eigen::RowVectorXf> s_i_prime,
                                      float alpha) {
  if (s_i.size() != s_i_prime.size()) throw Error("mix: length mismatch");
  if (alpha < 0.0f || alpha > 1.0f) throw Error("mix: alpha outside [0, 1]");
  return alpha * s_i + (1.0f - alpha) * s_i_prime;
}

Eigen::RowVectorXf mix_embedding(Eigen::Ref<const Eigen::RowVectorXf> h_n,
                                 Eigen::Ref<const Eigen::RowVectorXf> h_n_prime, float alpha) {
  return mix_interpolatable(h_n, h_n_prime, alpha);
}

std::vector<int> retrieve_candidates(Eigen::Ref<const Eigen::RowVectorXf> tilde_h_n,
                                     const AugmentationContext& ctx, int k_candidates) {
  if (!ctx.hn_index) throw Error("augmentation context not built");
  auto neighbors = ctx.hn_index->query_topk(tilde_h_n, k_candidates);
  std::vector<int> ids;
  ids.reserve(neighbors.size());
  for (const auto& nb : neighbors) ids.push_back(nb.id);
  return ids;
}

int align_select(Eigen::Ref<const Eigen::RowVectorXf> tilde_s_i,
                 const std::vector<int>& candidate_ids, const AugmentationContext& ctx) {
  if (candidate_ids.empty()) throw Error("align_select needs candidates");
  MatXf input(1, tilde_s_i.size());
  input.row(0) = tilde_s_i;
  MatXf tilde_h_i = ctx.model.encode_i(input);
  const int sim_dim = ctx.model.config().sim_dim;
  Eigen::RowVectorXf tilde_sim = tilde_h_i.row(0).head(sim_dim);

  int best = candidate_ids.front();
  double best_dist = std::numeric_limits<double>::infinity();
  for (int id : candidate_ids) {
    const double d =
        (ctx.tables.h_n_sim.row(id) - tilde_sim).cast<double>().squaredNorm();
    if (d < best_dist || (d == best_dist && id < best)) {
      best = id;
      best_dist = d;
    }
  }
  return best;
}

AugmentedSample augment_sample(int row, const AugmentationContext& ctx,
                               const AugmentationConfig& config, Rng& rng) {
  config.validate();
  if (row < 0 || row >= ctx.n()) throw Error("augment_sample: row out of range");
  const auto& neighbors = ctx.neighbor_graph[static_cast<std::size_t>(row)];
  const int neighbor = neighbors[static_cast<std::size_t>(rng.index(
      static_cast<int>(neighbors.size())))];
  const float alpha =
      config.fixed_alpha ? *config.fixed_alpha : static_cast<float>(rng.uniform());

  Eigen::RowVectorXf tilde_s_i = mix_interpolatable(ctx.s_i.row(row), ctx.s_i.row(neighbor), alpha);
  Eigen::RowVectorXf tilde_h_n =
      mix_embedding(ctx.tables.h_n.row(row), ctx.tables.h_n.row(neighbor), alpha);
  auto candidates = retrieve_candidates(tilde_h_n, ctx, config.k_candidates);
  const int chosen = align_select(tilde_s_i, candidates, ctx);

  MatXf joined = ctx.schema.join(tilde_s_i, ctx.s_n.row(chosen));
  AugmentedSample out;
  out.features = joined.row(0);
  out.source = row;
  out.neighbor = neighbor;
  out.alpha = alpha;
  out.chosen = chosen;
  return out;
}

AugmentedPool augment_pool(const AugmentationContext& ctx, const AugmentationConfig& config,
                           int variants_per_sample) {
  config.validate();
  if (variants_per_sample < 0) throw Error("variants_per_sample must be >= 0");
  AugmentedPool pool;
  pool.variants = variants_per_sample;
  const int n = ctx.n();
  pool.features.resize(static_cast<Eigen::Index>(n) * variants_per_sample, ctx.schema.dim());
  pool.provenance.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(variants_per_sample));
  if (variants_per_sample == 0) return pool;
  parallel_for_rows(n, [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(r)));
      for (int v = 0; v < variants_per_sample; ++v) {
        AugmentedSample s = augment_sample(r, ctx, config, rng);
        const auto idx = static_cast<std::size_t>(r) * static_cast<std::size_t>(variants_per_sample) +
                         static_cast<std::size_t>(v);
        pool.features.row(static_cast<Eigen::Index>(idx)) = s.features;
        pool.provenance[idx] = {s.source, s.neighbor, s.alpha, s.chosen};
      }
    }
  });
  return pool;
}

void save_pool(const AugmentedPool& pool, const std::filesystem::path& features_path,
               const std::filesystem::path& provenance_path) {
  write_f32_matrix(features_path, pool.features);
  json records = json::array();
  for (const auto& p : pool.provenance)
    records.push_back({{"source", p.source},
                       {"neighbor", p.neighbor},
                       {"alpha", p.alpha},
                       {"chosen", p.chosen}});
  save_json(provenance_path, json{{"variants", pool.variants},
                                  {"dim", pool.features.cols()},
                                  {"records", std::move(records)}});
}

AugmentedPool load_pool(const std::filesystem::path& features_path,
                        const std::filesystem::path& provenance_path) {
  json j = load_json(provenance_path);
  AugmentedPool pool;
  pool.variants = j.at("variants").get<int>();
  for (const auto& rec : j.at("records"))
    pool.provenance.push_back({rec.at("source").get<int>(), rec.at("neighbor").get<int>(),
                               rec.at("alpha").get<float>(), rec.at("chosen").get<int>()});
  const long rows = static_cast<long>(pool.provenance.size());
  pool.features = read_f32_matrix(features_path, rows, j.at("dim").get<long>());
  return pool;
}

}  // namespace malmixer
