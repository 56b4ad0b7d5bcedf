#include "malmixer/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace malmixer {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kNoAlignment: return "no_alignment";
    case Variant::kDirectMix: return "direct_mix";
    case Variant::kGaussianOnly: return "gaussian_only";
    case Variant::kSupervised: return "supervised";
  }
  throw Error("unknown variant");
}

Variant variant_from_string(const std::string& name) {
  for (Variant v : {Variant::kFull, Variant::kNoAlignment, Variant::kDirectMix,
                    Variant::kGaussianOnly, Variant::kSupervised})
    if (variant_name(v) == name) return v;
  throw ConfigError("unknown variant '" + name + "'");
}

TrainTestSplit split_80_20(int n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x80u));
  auto perm = rng.permutation(n);
  const int test_n = n / 5;
  TrainTestSplit split;
  split.test_rows.assign(perm.begin(), perm.begin() + test_n);
  split.train_rows.assign(perm.begin() + test_n, perm.end());
  std::sort(split.train_rows.begin(), split.train_rows.end());
  std::sort(split.test_rows.begin(), split.test_rows.end());
  return split;
}

MatXf family_std(const MatXf& features, const std::vector<int>& labels,
                 const std::vector<bool>& label_mask, int num_families) {
  const Eigen::Index dim = features.cols();
  MatXf out = MatXf::Zero(num_families, dim);
  for (int f = 0; f < num_families; ++f) {
    std::vector<int> rows;
    for (std::size_t r = 0; r < label_mask.size(); ++r)
      if (label_mask[r] && labels[r] == f) rows.push_back(static_cast<int>(r));
    if (rows.empty()) continue;
    VecXd mean = VecXd::Zero(dim);
    for (int r : rows) mean += features.row(r).cast<double>().transpose();
    mean /= static_cast<double>(rows.size());
    VecXd var = VecXd::Zero(dim);
    for (int r : rows) {
      VecXd d = features.row(r).cast<double>().transpose() - mean;
      var += d.cwiseProduct(d);
    }
    var /= static_cast<double>(rows.size());
    out.row(f) = var.cwiseSqrt().cast<float>().transpose();
  }
  return out;
}

std::vector<int> pseudo_families(const MatXf& features, const std::vector<int>& labels,
                                 const std::vector<bool>& label_mask) {
  std::vector<int> labeled_rows;
  for (std::size_t r = 0; r < label_mask.size(); ++r)
    if (label_mask[r]) labeled_rows.push_back(static_cast<int>(r));
  if (labeled_rows.empty()) throw Error("pseudo_families needs labeled rows");
  const int n = static_cast<int>(features.rows());
  std::vector<int> out(static_cast<std::size_t>(n));
  parallel_for_rows(n, [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      if (label_mask[static_cast<std::size_t>(r)]) {
        out[static_cast<std::size_t>(r)] = labels[static_cast<std::size_t>(r)];
        continue;
      }
      int best = labeled_rows.front();
      double best_d = std::numeric_limits<double>::infinity();
      for (int l : labeled_rows) {
        const double d = (features.row(r) - features.row(l)).cast<double>().squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = l;
        }
      }
      out[static_cast<std::size_t>(r)] = labels[static_cast<std::size_t>(best)];
    }
  });
  return out;
}

Eigen::RowVectorXf gaussian_augment(Eigen::Ref<const Eigen::RowVectorXf> x,
                                    Eigen::Ref<const Eigen::RowVectorXf> stats, Rng& rng) {
  if (x.size() != stats.size()) throw Error("gaussian_augment: shape mismatch");
  Eigen::RowVectorXf out = x;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    out(j) += stats(j) * static_cast<float>(rng.normal());
  return out;
}

namespace {

/// Algorithm-1 variant that keeps retrieval but skips the alignment argmin.
AugmentedSample augment_sample_no_alignment(int row, const AugmentationContext& ctx,
                                            const AugmentationConfig& config, Rng& rng) {
  const auto& neighbors = ctx.neighbor_graph[static_cast<std::size_t>(row)];
  const int neighbor = neighbors[static_cast<std::size_t>(rng.index(
      static_cast<int>(neighbors.size())))];
  const float alpha =
      config.fixed_alpha ? *config.fixed_alpha : static_cast<float>(rng.uniform());
  Eigen::RowVectorXf tilde_s_i =
      mix_interpolatable(ctx.s_i.row(row), ctx.s_i.row(neighbor), alpha);
  Eigen::RowVectorXf tilde_h_n =
      mix_embedding(ctx.tables.h_n.row(row), ctx.tables.h_n.row(neighbor), alpha);
  auto candidates = retrieve_candidates(tilde_h_n, ctx, config.k_candidates);
  const int chosen = candidates.front();
  AugmentedSample out;
  out.features = ctx.schema.join(tilde_s_i, ctx.s_n.row(chosen)).row(0);
  out.source = row;
  out.neighbor = neighbor;
  out.alpha = alpha;
  out.chosen = chosen;
  return out;
}

AugmentedPool embedding_variant_pool(Variant variant, const MatXf& features_std,
                                     const FeatureSchema& schema, const PipelineConfig& config,
                                     std::uint64_t seed) {
  EncoderConfig enc = config.encoder;
  enc.seed = derive_seed(seed, 0xe1u);
  AugmentationConfig aug = config.augment;
  aug.seed = derive_seed(seed, 0xa1u);
  TrainedEncoder trained = train_invariance_model(features_std, schema, enc);
  AugmentationContext ctx =
      build_augmentation_context(features_std, schema, std::move(trained.model), aug);
  if (variant == Variant::kFull) return augment_pool(ctx, aug, config.ssl.pool_variants);

  AugmentedPool pool;
  pool.variants = config.ssl.pool_variants;
  const int n = ctx.n();
  pool.features.resize(static_cast<Eigen::Index>(n) * pool.variants, schema.dim());
  pool.provenance.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(pool.variants));
  parallel_for_rows(n, [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      Rng rng(derive_seed(aug.seed, static_cast<std::uint64_t>(r)));
      for (int v = 0; v < pool.variants; ++v) {
        AugmentedSample s = augment_sample_no_alignment(r, ctx, aug, rng);
        const auto idx =
            static_cast<std::size_t>(r) * static_cast<std::size_t>(pool.variants) +
            static_cast<std::size_t>(v);
        pool.features.row(static_cast<Eigen::Index>(idx)) = s.features;
        pool.provenance[idx] = {s.source, s.neighbor, s.alpha, s.chosen};
      }
    }
  });
  return pool;
}

AugmentedPool direct_mix_pool(const MatXf& features_std, const PipelineConfig& config,
                              std::uint64_t seed) {
  AugmentationConfig aug = config.augment;
  aug.seed = derive_seed(seed, 0xa1u);
  const int n = static_cast<int>(features_std.rows());
  std::vector<int> ids(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) ids[static_cast<std::size_t>(r)] = r;
  auto graph = knn_graph(features_std, ids, aug.k_neighbors);

  AugmentedPool pool;
  pool.variants = config.ssl.pool_variants;
  pool.features.resize(static_cast<Eigen::Index>(n) * pool.variants, features_std.cols());
  pool.provenance.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(pool.variants));
  parallel_for_rows(n, [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      Rng rng(derive_seed(aug.seed, static_cast<std::uint64_t>(r)));
      for (int v = 0; v < pool.variants; ++v) {
        const auto& neighbors = graph[static_cast<std::size_t>(r)];
        const int nb = neighbors[static_cast<std::size_t>(rng.index(
            static_cast<int>(neighbors.size())))];
        const float alpha =
            aug.fixed_alpha ? *aug.fixed_alpha : static_cast<float>(rng.uniform());
        const auto idx =
            static_cast<std::size_t>(r) * static_cast<std::size_t>(pool.variants) +
            static_cast<std::size_t>(v);
        pool.features.row(static_cast<Eigen::Index>(idx)) =
            alpha * features_std.row(r) + (1.0f - alpha) * features_std.row(nb);
        pool.provenance[idx] = {r, nb, alpha, -1};
      }
    }
  });
  return pool;
}

AugmentedPool gaussian_pool(const MatXf& features_std, const std::vector<int>& labels,
                            const std::vector<bool>& label_mask, int num_families,
                            const PipelineConfig& config, std::uint64_t seed) {
  const std::uint64_t pool_seed = derive_seed(seed, 0xa1u);
  MatXf stats = family_std(features_std, labels, label_mask, num_families);
  auto pseudo = pseudo_families(features_std, labels, label_mask);
  const int n = static_cast<int>(features_std.rows());

  AugmentedPool pool;
  pool.variants = config.ssl.pool_variants;
  pool.features.resize(static_cast<Eigen::Index>(n) * pool.variants, features_std.cols());
  pool.provenance.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(pool.variants));
  parallel_for_rows(n, [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      Rng rng(derive_seed(pool_seed, static_cast<std::uint64_t>(r)));
      for (int v = 0; v < pool.variants; ++v) {
        const auto idx =
            static_cast<std::size_t>(r) * static_cast<std::size_t>(pool.variants) +
            static_cast<std::size_t>(v);
        pool.features.row(static_cast<Eigen::Index>(idx)) = gaussian_augment(
            features_std.row(r), stats.row(pseudo[static_cast<std::size_t>(r)]), rng);
        pool.provenance[idx] = {r, -1, 0.0f, -1};
      }
    }
  });
  return pool;
}

int max_label(const std::vector<int>& labels) {
  int mx = -1;
  for (int l : labels) mx = std::max(mx, l);
  return mx;
}

}  // namespace

AugmentedPool build_variant_pool(Variant variant, const MatXf& features_std,
                                 const std::vector<int>& labels,
                                 const std::vector<bool>& label_mask,
                                 const FeatureSchema& schema, const PipelineConfig& config,
                                 std::uint64_t seed) {
  switch (variant) {
    case Variant::kFull:
    case Variant::kNoAlignment:
      return embedding_variant_pool(variant, features_std, schema, config, seed);
    case Variant::kDirectMix:
      return direct_mix_pool(features_std, config, seed);
    case Variant::kGaussianOnly:
      return gaussian_pool(features_std, labels, label_mask, max_label(labels) + 1, config, seed);
    case Variant::kSupervised:
      throw Error("the supervised variant has no augmentation pool");
  }
  throw Error("unknown variant");
}

namespace {

MatXf gather_rows(const MatXf& m, const std::vector<int>& rows) {
  MatXf out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

}  // namespace

ExperimentRow run_variant(Variant variant, const Dataset& dataset, const FeatureSchema& schema,
                          const TrainTestSplit& split, const std::vector<bool>& train_mask,
                          const PipelineConfig& config, std::uint64_t seed,
                          RunArtifacts* artifacts) {
  MatXf train_raw = gather_rows(dataset.features, split.train_rows);
  MatXf test_raw = gather_rows(dataset.features, split.test_rows);
  std::vector<int> train_labels, test_labels;
  for (int r : split.train_rows) train_labels.push_back(dataset.labels[static_cast<std::size_t>(r)]);
  for (int r : split.test_rows) test_labels.push_back(dataset.labels[static_cast<std::size_t>(r)]);

  StandardizationParams params;
  if (config.fit_standardizer_on_train_only) {
    std::vector<int> fit_rows(split.train_rows.size());
    for (std::size_t i = 0; i < fit_rows.size(); ++i) fit_rows[i] = static_cast<int>(i);
    params = fit_standardizer(train_raw, fit_rows);
  } else {
    std::vector<int> fit_rows(static_cast<std::size_t>(dataset.n()));
    for (std::size_t i = 0; i < fit_rows.size(); ++i) fit_rows[i] = static_cast<int>(i);
    params = fit_standardizer(dataset.features, fit_rows);
  }
  MatXf train_std = apply_standardizer(train_raw, params);
  MatXf test_std = apply_standardizer(test_raw, params);

  const int num_families = dataset.num_families();
  SSLConfig ssl = config.ssl;
  ssl.seed = derive_seed(seed, 0x51u);
  FCResNetConfig clf = config.classifier;
  clf.input_dim = schema.dim();
  clf.num_classes = num_families;
  clf.seed = derive_seed(seed, 0xc1u);

  SSLTrainResult trained;
  if (variant == Variant::kSupervised) {
    trained = train_supervised(train_std, train_labels, train_mask, num_families, clf, ssl);
  } else {
    AugmentedPool pool =
        build_variant_pool(variant, train_std, train_labels, train_mask, schema, config, seed);
    trained = train_ssl(train_std, train_labels, train_mask, num_families, pool, clf, ssl);
  }

  ExperimentRow row;
  row.variant = variant_name(variant);
  row.seed = seed;
  row.metrics = compute_metrics(trained.classifier.predict(test_std), test_labels, num_families);
  if (artifacts != nullptr) {
    artifacts->classifier = std::move(trained.classifier);
    artifacts->log = std::move(trained.log);
  }
  return row;
}

std::vector<ExperimentRow> saturation_experiment(const Dataset& dataset,
                                                 const FeatureSchema& schema,
                                                 const std::vector<double>& fractions,
                                                 const std::vector<std::uint64_t>& seeds,
                                                 const PipelineConfig& config) {
  if (!dataset.fully_labeled()) throw Error("saturation experiment needs full labels");
  std::vector<ExperimentRow> rows;
  for (std::uint64_t seed : seeds) {
    TrainTestSplit split = split_80_20(dataset.n(), seed);
    Dataset train_view;
    train_view.features = gather_rows(dataset.features, split.train_rows);
    train_view.families = dataset.families;
    for (int r : split.train_rows)
      train_view.labels.push_back(dataset.labels[static_cast<std::size_t>(r)]);
    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
      auto mask = select_labeled_subset(train_view, fractions[fi],
                                        derive_seed(seed, 0x3au, fi));
      ExperimentRow row = run_variant(Variant::kFull, dataset, schema, split, mask, config, seed);
      row.experiment = "saturation";
      row.fraction = fractions[fi];
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<ExperimentRow> ablation_experiment(const Dataset& dataset,
                                               const FeatureSchema& schema, double fraction,
                                               const std::vector<std::uint64_t>& seeds,
                                               const PipelineConfig& config) {
  if (!dataset.fully_labeled()) throw Error("ablation experiment needs full labels");
  std::vector<ExperimentRow> rows;
  for (std::uint64_t seed : seeds) {
    TrainTestSplit split = split_80_20(dataset.n(), seed);
    Dataset train_view;
    train_view.features = gather_rows(dataset.features, split.train_rows);
    train_view.families = dataset.families;
    for (int r : split.train_rows)
      train_view.labels.push_back(dataset.labels[static_cast<std::size_t>(r)]);
    auto mask = select_labeled_subset(train_view, fraction, derive_seed(seed, 0x3au, 0));
    for (Variant v : {Variant::kFull, Variant::kNoAlignment, Variant::kDirectMix,
                      Variant::kGaussianOnly, Variant::kSupervised}) {
      ExperimentRow row = run_variant(v, dataset, schema, split, mask, config, seed);
      row.experiment = "ablation";
      row.fraction = fraction;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<ExperimentRow> temporal_experiment(const Dataset& dataset, const FeatureSchema& schema,
                                               const std::string& cutoff_iso,
                                               const std::vector<std::string>& period_boundaries,
                                               double fraction,
                                               const std::vector<std::uint64_t>& seeds,
                                               const PipelineConfig& config) {
  if (dataset.timestamps_epoch.empty()) throw Error("temporal experiment needs timestamps");
  if (!dataset.fully_labeled()) throw Error("temporal experiment needs full labels");
  const std::int64_t cutoff = parse_iso8601(cutoff_iso);
  std::vector<std::int64_t> bounds;
  for (const auto& b : period_boundaries) bounds.push_back(parse_iso8601(b));
  for (std::size_t i = 1; i < bounds.size(); ++i)
    if (bounds[i] <= bounds[i - 1]) throw Error("period boundaries must increase");
  if (!bounds.empty() && bounds.front() <= cutoff)
    throw Error("period boundaries must lie after the cutoff");

  std::vector<int> pre_rows, post_rows;
  for (int r = 0; r < dataset.n(); ++r)
    (dataset.timestamps_epoch[static_cast<std::size_t>(r)] < cutoff ? pre_rows : post_rows)
        .push_back(r);
  if (pre_rows.empty()) throw Error("no rows before the cutoff");

  // Every family must be represented before the cutoff.
  std::vector<bool> seen(static_cast<std::size_t>(dataset.num_families()), false);
  for (int r : pre_rows) seen[static_cast<std::size_t>(dataset.labels[static_cast<std::size_t>(r)])] = true;
  for (int f = 0; f < dataset.num_families(); ++f)
    if (!seen[static_cast<std::size_t>(f)])
      throw Error("family '" + dataset.families[static_cast<std::size_t>(f)] +
                  "' is absent before the cutoff");

  std::vector<ExperimentRow> rows;
  for (std::uint64_t seed : seeds) {
    TrainTestSplit pre_split = split_80_20(static_cast<int>(pre_rows.size()), seed);
    TrainTestSplit split;  // in dataset row ids
    for (int i : pre_split.train_rows) split.train_rows.push_back(pre_rows[static_cast<std::size_t>(i)]);
    for (int i : pre_split.test_rows) split.test_rows.push_back(pre_rows[static_cast<std::size_t>(i)]);

    Dataset train_view;
    train_view.features = gather_rows(dataset.features, split.train_rows);
    train_view.families = dataset.families;
    for (int r : split.train_rows)
      train_view.labels.push_back(dataset.labels[static_cast<std::size_t>(r)]);
    auto mask = select_labeled_subset(train_view, fraction, derive_seed(seed, 0x3au, 0));

    RunArtifacts artifacts;
    ExperimentRow pre_row = run_variant(Variant::kFull, dataset, schema, split, mask, config,
                                        seed, &artifacts);

    // Re-standardize exactly as run_variant did to score the later periods.
    MatXf train_raw = gather_rows(dataset.features, split.train_rows);
    std::vector<int> fit_rows(split.train_rows.size());
    for (std::size_t i = 0; i < fit_rows.size(); ++i) fit_rows[i] = static_cast<int>(i);
    StandardizationParams params = fit_standardizer(train_raw, fit_rows);

    pre_row.experiment = "temporal";
    pre_row.fraction = fraction;
    pre_row.split = "pre";
    rows.push_back(pre_row);

    std::vector<std::pair<std::string, std::vector<int>>> periods;
    if (!bounds.empty()) {
      std::vector<std::int64_t> edges;
      edges.push_back(cutoff);
      for (auto b : bounds) edges.push_back(b);
      for (std::size_t p = 0; p + 1 < edges.size(); ++p)
        periods.push_back({"p" + std::to_string(p), {}});
      periods.push_back({"tail", {}});
      for (int r : post_rows) {
        const auto t = dataset.timestamps_epoch[static_cast<std::size_t>(r)];
        std::size_t p = 0;
        while (p + 1 < edges.size() && t >= edges[p + 1]) ++p;
        periods[p].second.push_back(r);
      }
    }
    periods.push_back({"post-all", post_rows});

    for (const auto& [name, period_rows] : periods) {
      if (period_rows.empty()) continue;
      MatXf x = apply_standardizer(gather_rows(dataset.features, period_rows), params);
      std::vector<int> truth;
      for (int r : period_rows) truth.push_back(dataset.labels[static_cast<std::size_t>(r)]);
      ExperimentRow row;
      row.experiment = "temporal";
      row.variant = variant_name(Variant::kFull);
      row.fraction = fraction;
      row.seed = seed;
      row.split = name;
      row.metrics =
          compute_metrics(artifacts.classifier.predict(x), truth, dataset.num_families());
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<ExperimentRow> leaveout_experiment(const Dataset& dataset, const FeatureSchema& schema,
                                               int n_unidentified, double fraction,
                                               const std::vector<std::uint64_t>& seeds,
                                               const PipelineConfig& config) {
  if (!dataset.fully_labeled()) throw Error("leave-out experiment needs full labels");
  const int num_families = dataset.num_families();
  if (n_unidentified < 1 || n_unidentified >= num_families)
    throw Error("n_unidentified must be in [1, families)");

  std::vector<ExperimentRow> rows;
  for (std::uint64_t seed : seeds) {
    TrainTestSplit split = split_80_20(dataset.n(), seed);

    Rng pick_rng(derive_seed(seed, 0x10u));
    auto family_perm = pick_rng.permutation(num_families);
    std::set<int> unidentified(family_perm.begin(), family_perm.begin() + n_unidentified);

    std::vector<int> identified;  // global family ids, ascending
    for (int f = 0; f < num_families; ++f)
      if (!unidentified.count(f)) identified.push_back(f);
    std::vector<int> global_to_sub(static_cast<std::size_t>(num_families), -1);
    for (std::size_t s = 0; s < identified.size(); ++s)
      global_to_sub[static_cast<std::size_t>(identified[s])] = static_cast<int>(s);

    MatXf train_raw = gather_rows(dataset.features, split.train_rows);
    MatXf test_raw = gather_rows(dataset.features, split.test_rows);
    std::vector<int> train_labels, test_labels;
    for (int r : split.train_rows) train_labels.push_back(dataset.labels[static_cast<std::size_t>(r)]);
    for (int r : split.test_rows) test_labels.push_back(dataset.labels[static_cast<std::size_t>(r)]);

    std::vector<int> fit_rows(split.train_rows.size());
    for (std::size_t i = 0; i < fit_rows.size(); ++i) fit_rows[i] = static_cast<int>(i);
    StandardizationParams params = fit_standardizer(train_raw, fit_rows);
    MatXf train_std = apply_standardizer(train_raw, params);
    MatXf test_std = apply_standardizer(test_raw, params);

    // Labeled subset over identified-family train rows only.
    Dataset identified_view;
    std::vector<int> identified_rows;
    for (std::size_t i = 0; i < train_labels.size(); ++i)
      if (!unidentified.count(train_labels[i])) identified_rows.push_back(static_cast<int>(i));
    identified_view.features = gather_rows(train_std, identified_rows);
    identified_view.families.resize(identified.size());
    for (int r : identified_rows)
      identified_view.labels.push_back(
          global_to_sub[static_cast<std::size_t>(train_labels[static_cast<std::size_t>(r)])]);
    auto sub_mask =
        select_labeled_subset(identified_view, fraction, derive_seed(seed, 0x3au, 0));
    std::vector<bool> zero_mask(train_labels.size(), false);
    for (std::size_t i = 0; i < identified_rows.size(); ++i)
      if (sub_mask[i]) zero_mask[static_cast<std::size_t>(identified_rows[i])] = true;

    // The pool is label-free, so both scenarios share it.
    AugmentedPool pool = build_variant_pool(Variant::kFull, train_std, train_labels, zero_mask,
                                            schema, config, seed);

    SSLConfig ssl = config.ssl;
    ssl.seed = derive_seed(seed, 0x51u);

    {  // Zero-shot: classifier over identified families only.
      std::vector<int> sub_labels(train_labels.size(), -1);
      for (std::size_t i = 0; i < train_labels.size(); ++i)
        sub_labels[i] = unidentified.count(train_labels[i])
                            ? -1
                            : global_to_sub[static_cast<std::size_t>(train_labels[i])];
      FCResNetConfig clf = config.classifier;
      clf.input_dim = schema.dim();
      clf.num_classes = static_cast<int>(identified.size());
      clf.seed = derive_seed(seed, 0xc1u);
      auto trained = train_ssl(train_std, sub_labels, zero_mask,
                               static_cast<int>(identified.size()), pool, clf, ssl);
      auto sub_preds = trained.classifier.predict(test_std);
      std::vector<int> preds;
      preds.reserve(sub_preds.size());
      for (int p : sub_preds) preds.push_back(identified[static_cast<std::size_t>(p)]);
      ExperimentRow row;
      row.experiment = "leaveout";
      row.variant = "zero_shot";
      row.fraction = fraction;
      row.seed = seed;
      row.metrics = compute_metrics(preds, test_labels, num_families);
      rows.push_back(std::move(row));
    }

    {  // One-shot: one labeled row per previously unidentified family.
      std::vector<bool> one_mask = zero_mask;
      Rng oneshot_rng(derive_seed(seed, 0x1bu));
      for (int f : unidentified) {
        std::vector<int> candidates;
        for (std::size_t i = 0; i < train_labels.size(); ++i)
          if (train_labels[i] == f) candidates.push_back(static_cast<int>(i));
        if (candidates.empty())
          throw Error("family '" + dataset.families[static_cast<std::size_t>(f)] +
                      "' has no train rows to label");
        one_mask[static_cast<std::size_t>(
            candidates[static_cast<std::size_t>(oneshot_rng.index(
                static_cast<int>(candidates.size())))])] = true;
      }
      FCResNetConfig clf = config.classifier;
      clf.input_dim = schema.dim();
      clf.num_classes = num_families;
      clf.seed = derive_seed(seed, 0xc1u);
      auto trained = train_ssl(train_std, train_labels, one_mask, num_families, pool, clf, ssl);
      ExperimentRow row;
      row.experiment = "leaveout";
      row.variant = "one_shot";
      row.fraction = fraction;
      row.seed = seed;
      row.metrics =
          compute_metrics(trained.classifier.predict(test_std), test_labels, num_families);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_report_csv(const std::filesystem::path& path, const std::vector<ExperimentRow>& rows) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << "experiment,variant,fraction,seed,split,accuracy,precision_macro,recall_macro,f1_macro\n";
  char line[512];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%s,%s,%.6f,%llu,%s,%.6f,%.6f,%.6f,%.6f\n",
                  r.experiment.c_str(), r.variant.c_str(), r.fraction,
                  static_cast<unsigned long long>(r.seed), r.split.c_str(), r.metrics.accuracy,
                  r.metrics.precision_macro, r.metrics.recall_macro, r.metrics.f1_macro);
    f << line;
  }
}

void write_summary_json(const std::filesystem::path& path,
                        const std::vector<ExperimentRow>& rows) {
  struct Acc {
    std::vector<double> accuracy, precision, recall, f1;
  };
  std::map<std::string, Acc> groups;
  for (const auto& r : rows) {
    char key[256];
    std::snprintf(key, sizeof key, "%s/%s/%.6f/%s", r.experiment.c_str(), r.variant.c_str(),
                  r.fraction, r.split.c_str());
    auto& g = groups[key];
    g.accuracy.push_back(r.metrics.accuracy);
    g.precision.push_back(r.metrics.precision_macro);
    g.recall.push_back(r.metrics.recall_macro);
    g.f1.push_back(r.metrics.f1_macro);
  }
  auto mean_std = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    return json{{"mean", mean}, {"std", std::sqrt(var)}, {"runs", v.size()}};
  };
  json out = json::object();
  for (const auto& [key, g] : groups)
    out[key] = json{{"accuracy", mean_std(g.accuracy)},
                    {"precision_macro", mean_std(g.precision)},
                    {"recall_macro", mean_std(g.recall)},
                    {"f1_macro", mean_std(g.f1)}};
  save_json(path, out);
}

}  // namespace malmixer
