#include "malmixer/experiments.hpp"
#include "malmixer/run_config.hpp"
#include "malmixer/serialize.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace malmixer;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string features, meta, schema, out;
  std::string experiment_kind, variant;
  double labels_fraction = -1.0;
  long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--set", args.overrides, "dotted-key override, e.g. ssl.epochs=30");
  cmd->add_option("--dataset", args.features, "features file (row-major float32)");
  cmd->add_option("--meta", args.meta, "dataset metadata JSON");
  cmd->add_option("--schema", args.schema, "feature schema JSON");
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--seed", args.seed, "global seed");
  cmd->add_option("--labels-fraction", args.labels_fraction, "labeled fraction in (0, 1]");
  cmd->add_option("--experiment", args.experiment_kind, "experiment kind");
  cmd->add_option("--variant", args.variant, "augmentation variant");
}

RunConfig resolve_config(const CommonArgs& args) {
  json doc = default_run_config_json();
  if (!args.config_path.empty()) {
    if (!fs::exists(args.config_path))
      throw ConfigError("config file not found: " + args.config_path);
    doc.update(load_json(args.config_path), /*merge_objects=*/true);
  }
  for (const auto& o : args.overrides) apply_dotted_override(doc, o);
  // Named flags win over config-file values.
  if (!args.features.empty()) doc["dataset"]["features"] = args.features;
  if (!args.meta.empty()) doc["dataset"]["meta"] = args.meta;
  if (!args.schema.empty()) doc["dataset"]["schema"] = args.schema;
  if (!args.out.empty()) doc["out"] = args.out;
  if (args.seed >= 0) doc["seed"] = args.seed;
  if (args.labels_fraction >= 0.0) doc["labels_fraction"] = args.labels_fraction;
  if (!args.experiment_kind.empty()) doc["experiment"]["kind"] = args.experiment_kind;
  if (!args.variant.empty()) doc["experiment"]["variant"] = args.variant;
  return parse_run_config(doc);
}

fs::path require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string(what) + " path missing from config/flags");
  if (!fs::exists(path)) throw ConfigError(std::string(what) + " not found: " + path);
  return path;
}

std::pair<Dataset, FeatureSchema> load_inputs(const RunConfig& cfg) {
  FeatureSchema schema = FeatureSchema::load(require_file(cfg.schema_path, "schema file"));
  Dataset ds = load_dataset(require_file(cfg.features_path, "features file"),
                            require_file(cfg.meta_path, "meta file"), schema);
  return {std::move(ds), std::move(schema)};
}

void save_standardizer(const StandardizationParams& p, const fs::path& path) {
  std::vector<float> mean(p.mean.data(), p.mean.data() + p.mean.size());
  std::vector<float> stdv(p.std.data(), p.std.data() + p.std.size());
  save_json(path, json{{"mean", mean}, {"std", stdv}});
}

StandardizationParams load_standardizer(const fs::path& path) {
  json j = load_json(path);
  auto mean = j.at("mean").get<std::vector<float>>();
  auto stdv = j.at("std").get<std::vector<float>>();
  StandardizationParams p;
  p.mean = Eigen::Map<const VecXf>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  p.std = Eigen::Map<const VecXf>(stdv.data(), static_cast<Eigen::Index>(stdv.size()));
  return p;
}

std::vector<int> all_rows(int n) {
  std::vector<int> rows(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
  return rows;
}

int cmd_ingest(const CommonArgs& args) {
  RunConfig cfg = resolve_config(args);
  auto [ds, schema] = load_inputs(cfg);
  fs::create_directories(cfg.out);
  save_dataset(ds, fs::path(cfg.out) / "dataset.f32", fs::path(cfg.out) / "dataset.json");
  schema.save(fs::path(cfg.out) / "schema.json");
  json summary{{"n", ds.n()},
               {"dim", ds.dim()},
               {"families", ds.num_families()},
               {"labeled_rows", [&] {
                  int c = 0;
                  for (int l : ds.labels) c += (l != kUnlabeled);
                  return c;
                }()},
               {"has_timestamps", !ds.timestamps.empty()}};
  save_json(fs::path(cfg.out) / "ingest_summary.json", summary);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_train_encoder(const CommonArgs& args) {
  RunConfig cfg = resolve_config(args);
  auto [ds, schema] = load_inputs(cfg);
  fs::create_directories(cfg.out);

  StandardizationParams params = fit_standardizer(ds.features, all_rows(ds.n()));
  MatXf standardized = apply_standardizer(ds.features, params);
  save_standardizer(params, fs::path(cfg.out) / "standardizer.json");

  EncoderConfig enc = cfg.pipeline.encoder;
  enc.seed = derive_seed(cfg.seed, 0xe1u);
  TrainedEncoder trained = train_invariance_model(standardized, schema, enc);
  save_invariance_model(trained.model, fs::path(cfg.out) / "encoder.json");

  std::ofstream curve(fs::path(cfg.out) / "encoder_curve.jsonl", std::ios::trunc);
  for (const auto& e : trained.curve)
    curve << json{{"epoch", e.epoch},
                  {"recon", e.losses.recon},
                  {"sim", e.losses.sim},
                  {"dis", e.losses.dis},
                  {"total", e.losses.total()}}
                 .dump()
          << "\n";
  std::cout << "encoder trained; final total loss "
            << (trained.curve.empty() ? 0.0 : trained.curve.back().losses.total()) << "\n";
  return 0;
}

int cmd_build(const CommonArgs& args) {
  RunConfig cfg = resolve_config(args);
  auto [ds, schema] = load_inputs(cfg);
  const fs::path out(cfg.out);
  StandardizationParams params =
      load_standardizer(require_file((out / "standardizer.json").string(), "standardizer"));
  InvarianceModel model =
      load_invariance_model(require_file((out / "encoder.json").string(), "encoder model"));

  MatXf standardized = apply_standardizer(ds.features, params);
  AugmentationConfig aug = cfg.pipeline.augment;
  aug.seed = derive_seed(cfg.seed, 0xa1u);
  AugmentationContext ctx = build_augmentation_context(standardized, schema, std::move(model), aug);

  TensorPack embeddings;
  embeddings.add("h_n", ctx.tables.h_n);
  embeddings.add("h_i_sim", ctx.tables.h_i_sim);
  embeddings.add("h_n_sim", ctx.tables.h_n_sim);
  embeddings.save(out / "embeddings.json", json{{"kind", "embedding_tables"}});
  ctx.hn_index->save(out / "hn_index.json");
  json graph = json::array();
  for (const auto& row : ctx.neighbor_graph) graph.push_back(row);
  save_json(out / "knn_graph.json", graph);

  AugmentedPool pool = augment_pool(ctx, aug, cfg.pipeline.ssl.pool_variants);
  save_pool(pool, out / "pool.f32", out / "pool_provenance.json");
  std::cout << "built embeddings, index, and a pool of " << pool.features.rows()
            << " augmented rows\n";
  return 0;
}

int cmd_train(const CommonArgs& args) {
  RunConfig cfg = resolve_config(args);
  auto [ds, schema] = load_inputs(cfg);
  const fs::path out(cfg.out);
  StandardizationParams params =
      load_standardizer(require_file((out / "standardizer.json").string(), "standardizer"));
  AugmentedPool pool = load_pool(require_file((out / "pool.f32").string(), "augmentation pool"),
                                 require_file((out / "pool_provenance.json").string(),
                                              "pool provenance"));
  MatXf standardized = apply_standardizer(ds.features, params);

  std::vector<bool> mask;
  if (cfg.labels_fraction) {
    mask = select_labeled_subset(ds, *cfg.labels_fraction, derive_seed(cfg.seed, 0x3au));
  } else {
    mask.resize(static_cast<std::size_t>(ds.n()));
    for (int r = 0; r < ds.n(); ++r)
      mask[static_cast<std::size_t>(r)] = ds.labels[static_cast<std::size_t>(r)] != kUnlabeled;
  }

  SSLConfig ssl = cfg.pipeline.ssl;
  ssl.seed = derive_seed(cfg.seed, 0x51u);
  FCResNetConfig clf = cfg.pipeline.classifier;
  clf.input_dim = schema.dim();
  clf.num_classes = ds.num_families();
  clf.seed = derive_seed(cfg.seed, 0xc1u);

  auto trained = train_ssl(standardized, ds.labels, mask, ds.num_families(), pool, clf, ssl);
  save_classifier(trained.classifier, out / "classifier.json");
  save_training_log(trained.log, out / "training_log.jsonl");
  save_json(out / "families.json", json{{"families", ds.families}});
  std::cout << "classifier trained; final train_acc "
            << (trained.log.empty() ? 0.0 : trained.log.back().train_acc) << "\n";
  return 0;
}

int cmd_predict(const CommonArgs& args, const std::string& model_dir,
                const std::string& features_path, const std::string& csv_out) {
  (void)args;
  const fs::path model(model_dir);
  FCResNet net =
      load_classifier(require_file((model / "classifier.json").string(), "classifier"));
  StandardizationParams params =
      load_standardizer(require_file((model / "standardizer.json").string(), "standardizer"));
  auto families = load_json(require_file((model / "families.json").string(), "family list"))
                      .at("families")
                      .get<std::vector<std::string>>();
  MatXf raw = read_f32_matrix(require_file(features_path, "features file"), -1,
                              net.config.input_dim);

  std::ofstream csv(csv_out, std::ios::trunc);
  if (!csv) throw Error("cannot write " + csv_out);
  csv << "row,family";
  for (const auto& f : families) csv << ",p_" << f;
  csv << "\n";
  if (raw.rows() > 0) {
    MatXf x = apply_standardizer(raw, params);
    MatXf probs = net.predict_proba(x);
    auto preds = net.predict(x);
    char buf[64];
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      csv << r << "," << families[static_cast<std::size_t>(preds[static_cast<std::size_t>(r)])];
      for (Eigen::Index c = 0; c < probs.cols(); ++c) {
        std::snprintf(buf, sizeof buf, ",%.6f", static_cast<double>(probs(r, c)));
        csv << buf;
      }
      csv << "\n";
    }
  }
  std::cout << "wrote " << raw.rows() << " predictions to " << csv_out << "\n";
  return 0;
}

PipelineConfig pipeline_for(const RunConfig& cfg) {
  PipelineConfig p = cfg.pipeline;
  p.fit_standardizer_on_train_only = cfg.standardize_fit == "train";
  return p;
}

int cmd_experiment(const CommonArgs& args) {
  RunConfig cfg = resolve_config(args);
  const std::string kind = cfg.experiment.kind;
  fs::create_directories(cfg.out);
  const fs::path out(cfg.out);

  Dataset ds;
  FeatureSchema schema(2, {0});
  MatXf centroids;
  if (cfg.experiment.synthetic || kind == "synthetic-bench") {
    SyntheticSpec spec = cfg.experiment.synthetic.value_or(SyntheticSpec{});
    SyntheticData data = generate_synthetic(spec);
    ds = std::move(data.dataset);
    schema = std::move(data.schema);
    centroids = std::move(data.centroids);
  } else {
    auto loaded = load_inputs(cfg);
    ds = std::move(loaded.first);
    schema = std::move(loaded.second);
  }

  PipelineConfig pipeline = pipeline_for(cfg);
  std::vector<ExperimentRow> rows;
  if (kind == "synthetic-bench") {
    const std::uint64_t seed = cfg.experiment.seeds.empty() ? cfg.seed : cfg.experiment.seeds.front();
    TrainTestSplit split = split_80_20(ds.n(), seed);
    Dataset train_view;
    train_view.features = MatXf(static_cast<Eigen::Index>(split.train_rows.size()), ds.dim());
    train_view.families = ds.families;
    for (std::size_t i = 0; i < split.train_rows.size(); ++i) {
      train_view.features.row(static_cast<Eigen::Index>(i)) =
          ds.features.row(split.train_rows[i]);
      train_view.labels.push_back(ds.labels[static_cast<std::size_t>(split.train_rows[i])]);
    }
    auto mask = select_labeled_subset(train_view, cfg.experiment.fraction,
                                      derive_seed(seed, 0x3au, 0));
    RunArtifacts artifacts;
    ExperimentRow row = run_variant(variant_from_string(cfg.experiment.variant), ds, schema,
                                    split, mask, pipeline, seed, &artifacts);
    row.experiment = "synthetic-bench";
    row.fraction = cfg.experiment.fraction;
    rows.push_back(row);

    char run_name[128];
    std::snprintf(run_name, sizeof run_name, "synthetic-bench_f%.4f_s%llu",
                  cfg.experiment.fraction, static_cast<unsigned long long>(seed));
    const fs::path run_dir = out / "runs" / run_name;
    fs::create_directories(run_dir);
    save_classifier(artifacts.classifier, run_dir / "classifier.json");
    save_training_log(artifacts.log, run_dir / "training_log.jsonl");
  } else if (kind == "saturation") {
    rows = saturation_experiment(ds, schema, cfg.experiment.fractions, cfg.experiment.seeds,
                                 pipeline);
  } else if (kind == "ablation") {
    rows = ablation_experiment(ds, schema, cfg.experiment.fraction, cfg.experiment.seeds,
                               pipeline);
  } else if (kind == "temporal") {
    if (cfg.experiment.cutoff.empty()) throw ConfigError("temporal experiment needs a cutoff date");
    rows = temporal_experiment(ds, schema, cfg.experiment.cutoff, cfg.experiment.periods,
                               cfg.experiment.fraction, cfg.experiment.seeds, pipeline);
  } else if (kind == "leaveout") {
    rows = leaveout_experiment(ds, schema, cfg.experiment.n_unidentified,
                               cfg.experiment.fraction, cfg.experiment.seeds, pipeline);
  } else {
    throw ConfigError("unknown experiment kind '" + kind + "'");
  }

  write_report_csv(out / (kind + "_report.csv"), rows);
  write_summary_json(out / (kind + "_summary.json"), rows);
  for (const auto& r : rows)
    std::cout << r.experiment << " " << r.variant << " f=" << r.fraction << " seed=" << r.seed
              << " split=" << r.split << " acc=" << r.metrics.accuracy << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MalMixer: few-shot malware family classification"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string model_dir, predict_features, predict_out = "predictions.csv";

  auto* ingest = app.add_subcommand("ingest", "validate and normalize a dataset bundle");
  add_common(ingest, args);
  auto* trainenc = app.add_subcommand("train-encoder", "train the invariance encoder-decoders");
  add_common(trainenc, args);
  auto* build = app.add_subcommand("build", "build embeddings, indices, and the augmentation pool");
  add_common(build, args);
  auto* train = app.add_subcommand("train", "run semi-supervised classifier training");
  add_common(train, args);
  auto* predict = app.add_subcommand("predict", "score a feature file with a trained model");
  add_common(predict, args);
  predict->add_option("--model", model_dir, "model directory (from `train`)")->required();
  predict->add_option("--features", predict_features, "features file to score")->required();
  predict->add_option("--csv", predict_out, "output CSV path");
  auto* experiment = app.add_subcommand("experiment", "run an evaluation design end to end");
  add_common(experiment, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(args);
    if (trainenc->parsed()) return cmd_train_encoder(args);
    if (build->parsed()) return cmd_build(args);
    if (train->parsed()) return cmd_train(args);
    if (predict->parsed()) return cmd_predict(args, model_dir, predict_features, predict_out);
    if (experiment->parsed()) return cmd_experiment(args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
