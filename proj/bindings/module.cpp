#include "malmixer/experiments.hpp"
#include "malmixer/run_config.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace malmixer;

namespace {

py::dict metrics_dict(const MetricsReport& m) {
  py::dict d;
  d["accuracy"] = m.accuracy;
  d["precision_macro"] = m.precision_macro;
  d["recall_macro"] = m.recall_macro;
  d["f1_macro"] = m.f1_macro;
  py::list fams;
  for (const auto& f : m.per_family) {
    py::dict fd;
    fd["precision"] = f.precision;
    fd["recall"] = f.recall;
    fd["f1"] = f.f1;
    fd["support"] = f.support;
    fams.append(fd);
  }
  d["per_family"] = fams;
  return d;
}

py::dict row_dict(const ExperimentRow& r) {
  py::dict d;
  d["experiment"] = r.experiment;
  d["variant"] = r.variant;
  d["fraction"] = r.fraction;
  d["seed"] = r.seed;
  d["split"] = r.split;
  d["metrics"] = metrics_dict(r.metrics);
  return d;
}

py::list rows_list(const std::vector<ExperimentRow>& rows) {
  py::list out;
  for (const auto& r : rows) out.append(row_dict(r));
  return out;
}

std::vector<bool> to_mask(const std::vector<int>& flags) {
  std::vector<bool> mask(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) mask[i] = flags[i] != 0;
  return mask;
}

}  // namespace

PYBIND11_MODULE(_malmixer, m) {
  m.doc() = "retrieval-augmented semi-supervised malware family classification";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<Error>(m, "MalmixerError");

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", &Rng::uniform)
      .def("normal", &Rng::normal)
      .def("beta", &Rng::beta)
      .def("index", &Rng::index, py::arg("n"))
      .def("permutation", &Rng::permutation, py::arg("n"));
  m.def("derive_seed", &derive_seed, py::arg("seed"), py::arg("a"), py::arg("b") = 0);

  py::class_<FeatureSchema>(m, "FeatureSchema")
      .def(py::init<int, std::vector<int>, std::vector<std::string>>(), py::arg("dim"),
           py::arg("interpolatable"), py::arg("names") = std::vector<std::string>{})
      .def_static("load", &FeatureSchema::load, py::arg("path"))
      .def("save", &FeatureSchema::save, py::arg("path"))
      .def_property_readonly("dim", &FeatureSchema::dim)
      .def_property_readonly("interpolatable", &FeatureSchema::interpolatable)
      .def_property_readonly("non_interpolatable", &FeatureSchema::non_interpolatable)
      .def("split_i", &FeatureSchema::split_i)
      .def("split_n", &FeatureSchema::split_n)
      .def("join", &FeatureSchema::join);

  py::class_<StandardizationParams>(m, "StandardizationParams")
      .def_readonly("mean", &StandardizationParams::mean)
      .def_readonly("std", &StandardizationParams::std);
  m.def("fit_standardizer", &fit_standardizer, py::arg("features"), py::arg("fit_rows"));
  m.def("apply_standardizer", &apply_standardizer, py::arg("features"), py::arg("params"));

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("features", &Dataset::features)
      .def_readwrite("labels", &Dataset::labels)
      .def_readwrite("families", &Dataset::families)
      .def_readwrite("timestamps", &Dataset::timestamps)
      .def_property_readonly("n", &Dataset::n)
      .def_property_readonly("dim", &Dataset::dim)
      .def_property_readonly("num_families", &Dataset::num_families);
  m.def("load_dataset", &load_dataset, py::arg("features_path"), py::arg("meta_path"),
        py::arg("schema"));
  m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("features_path"),
        py::arg("meta_path"));
  m.def(
      "select_labeled_subset",
      [](const Dataset& ds, double fraction, std::uint64_t seed) {
        auto mask = select_labeled_subset(ds, fraction, seed);
        return std::vector<int>(mask.begin(), mask.end());
      },
      py::arg("dataset"), py::arg("fraction"), py::arg("seed"));

  py::class_<Neighbor>(m, "Neighbor")
      .def_readonly("id", &Neighbor::id)
      .def_readonly("dist_sq", &Neighbor::dist_sq);
  py::class_<L2Index>(m, "L2Index")
      .def(py::init<MatXf, std::vector<int>>(), py::arg("vectors"), py::arg("ids"))
      .def_property_readonly("size", &L2Index::size)
      .def_property_readonly("dim", &L2Index::dim)
      .def(
          "query_topk",
          [](const L2Index& idx, Eigen::Ref<const Eigen::RowVectorXf> q, int k,
             std::optional<int> exclude) { return idx.query_topk(q, k, exclude); },
          py::arg("q"), py::arg("k"), py::arg("exclude") = std::nullopt)
      .def("save", &L2Index::save, py::arg("manifest_path"))
      .def_static("load", &L2Index::load, py::arg("manifest_path"));
  m.def("knn_graph", &knn_graph, py::arg("vectors"), py::arg("ids"), py::arg("k"));

  py::class_<EncoderConfig>(m, "EncoderConfig")
      .def(py::init<>())
      .def_readwrite("phi_i_layers", &EncoderConfig::phi_i_layers)
      .def_readwrite("phi_n_layers", &EncoderConfig::phi_n_layers)
      .def_readwrite("hidden_dim", &EncoderConfig::hidden_dim)
      .def_readwrite("sim_dim", &EncoderConfig::sim_dim)
      .def_readwrite("dis_dim", &EncoderConfig::dis_dim)
      .def_readwrite("margin", &EncoderConfig::margin)
      .def_readwrite("epochs", &EncoderConfig::epochs)
      .def_readwrite("batch_size", &EncoderConfig::batch_size)
      .def_readwrite("learning_rate", &EncoderConfig::learning_rate)
      .def_readwrite("weight_decay", &EncoderConfig::weight_decay)
      .def_readwrite("seed", &EncoderConfig::seed);

  py::class_<InvarianceModel>(m, "InvarianceModel")
      .def_property_readonly("frozen", &InvarianceModel::frozen)
      .def_property_readonly("dim_i", &InvarianceModel::dim_i)
      .def_property_readonly("dim_n", &InvarianceModel::dim_n)
      .def("encode_i", &InvarianceModel::encode_i, py::arg("s_i"))
      .def("encode_n", &InvarianceModel::encode_n, py::arg("s_n"));
  m.def(
      "train_invariance_model",
      [](const MatXf& features_std, const FeatureSchema& schema, const EncoderConfig& config) {
        TrainedEncoder t = train_invariance_model(features_std, schema, config);
        py::list curve;
        for (const auto& e : t.curve) {
          py::dict d;
          d["epoch"] = e.epoch;
          d["recon"] = e.losses.recon;
          d["sim"] = e.losses.sim;
          d["dis"] = e.losses.dis;
          d["total"] = e.losses.total();
          curve.append(d);
        }
        return py::make_tuple(std::move(t.model), curve);
      },
      py::arg("features_std"), py::arg("schema"), py::arg("config"));
  m.def("save_invariance_model", &save_invariance_model, py::arg("model"), py::arg("manifest"));
  m.def("load_invariance_model", &load_invariance_model, py::arg("manifest"));

  py::class_<EmbeddingTables>(m, "EmbeddingTables")
      .def_readonly("h_n", &EmbeddingTables::h_n)
      .def_readonly("h_i_sim", &EmbeddingTables::h_i_sim)
      .def_readonly("h_n_sim", &EmbeddingTables::h_n_sim);
  m.def("build_embeddings", &build_embeddings, py::arg("features_std"), py::arg("schema"),
        py::arg("model"));

  py::class_<AugmentationConfig>(m, "AugmentationConfig")
      .def(py::init<>())
      .def_readwrite("k_neighbors", &AugmentationConfig::k_neighbors)
      .def_readwrite("k_candidates", &AugmentationConfig::k_candidates)
      .def_readwrite("fixed_alpha", &AugmentationConfig::fixed_alpha)
      .def_readwrite("seed", &AugmentationConfig::seed);

  py::class_<AugmentationContext>(m, "AugmentationContext")
      .def_property_readonly("n", &AugmentationContext::n)
      .def_readonly("tables", &AugmentationContext::tables)
      .def_readonly("neighbor_graph", &AugmentationContext::neighbor_graph);
  m.def("build_augmentation_context", &build_augmentation_context, py::arg("features_std"),
        py::arg("schema"), py::arg("model"), py::arg("config"));

  m.def("mix_interpolatable", &mix_interpolatable, py::arg("s_i"), py::arg("s_i_prime"),
        py::arg("alpha"));
  m.def("mix_embedding", &mix_embedding, py::arg("h_n"), py::arg("h_n_prime"), py::arg("alpha"));
  m.def("retrieve_candidates", &retrieve_candidates, py::arg("tilde_h_n"), py::arg("ctx"),
        py::arg("k_candidates"));
  m.def("align_select", &align_select, py::arg("tilde_s_i"), py::arg("candidate_ids"),
        py::arg("ctx"));

  py::class_<AugmentedSample>(m, "AugmentedSample")
      .def_readonly("features", &AugmentedSample::features)
      .def_readonly("source", &AugmentedSample::source)
      .def_readonly("neighbor", &AugmentedSample::neighbor)
      .def_readonly("alpha", &AugmentedSample::alpha)
      .def_readonly("chosen", &AugmentedSample::chosen);
  m.def("augment_sample", &augment_sample, py::arg("row"), py::arg("ctx"), py::arg("config"),
        py::arg("rng"));

  py::class_<AugmentedPool>(m, "AugmentedPool")
      .def_readonly("variants", &AugmentedPool::variants)
      .def_readonly("features", &AugmentedPool::features)
      .def("row", &AugmentedPool::row, py::arg("source"), py::arg("variant"));
  m.def("augment_pool", &augment_pool, py::arg("ctx"), py::arg("config"),
        py::arg("variants_per_sample"));
  m.def("save_pool", &save_pool, py::arg("pool"), py::arg("features_path"),
        py::arg("provenance_path"));
  m.def("load_pool", &load_pool, py::arg("features_path"), py::arg("provenance_path"));

  m.def("sharpen", &sharpen, py::arg("y"));
  m.def(
      "mixup",
      [](Eigen::Ref<const Eigen::RowVectorXf> x1, Eigen::Ref<const Eigen::RowVectorXf> y1,
         Eigen::Ref<const Eigen::RowVectorXf> x2, Eigen::Ref<const Eigen::RowVectorXf> y2,
         float lam) {
        auto [xm, ym] = mixup(x1, y1, x2, y2, lam);
        return py::make_tuple(xm, ym);
      },
      py::arg("x1"), py::arg("y1"), py::arg("x2"), py::arg("y2"), py::arg("lam"));
  m.def("guess_labels", &guess_labels, py::arg("classifier"), py::arg("u"), py::arg("u_aug"));
  m.def("one_hot", &one_hot, py::arg("labels"), py::arg("num_classes"));

  py::class_<FCResNetConfig>(m, "FCResNetConfig")
      .def(py::init<>())
      .def_readwrite("input_dim", &FCResNetConfig::input_dim)
      .def_readwrite("stem_dim", &FCResNetConfig::stem_dim)
      .def_readwrite("group_dims", &FCResNetConfig::group_dims)
      .def_readwrite("blocks_per_group", &FCResNetConfig::blocks_per_group)
      .def_readwrite("negative_slope", &FCResNetConfig::negative_slope)
      .def_readwrite("num_classes", &FCResNetConfig::num_classes)
      .def_readwrite("seed", &FCResNetConfig::seed);
  py::class_<FCResNet>(m, "FCResNet")
      .def_static("init", &FCResNet::init, py::arg("config"))
      .def("forward", &FCResNet::forward, py::arg("x"))
      .def("predict_proba", &FCResNet::predict_proba, py::arg("x"))
      .def("predict", &FCResNet::predict, py::arg("x"));
  m.def("save_classifier", &save_classifier, py::arg("net"), py::arg("manifest"));
  m.def("load_classifier", &load_classifier, py::arg("manifest"));

  py::class_<SSLConfig>(m, "SSLConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &SSLConfig::epochs)
      .def_readwrite("labeled_batch", &SSLConfig::labeled_batch)
      .def_readwrite("unlabeled_batch", &SSLConfig::unlabeled_batch)
      .def_readwrite("lambda_max", &SSLConfig::lambda_max)
      .def_readwrite("ramp_fraction", &SSLConfig::ramp_fraction)
      .def_readwrite("mixup_beta", &SSLConfig::mixup_beta)
      .def_readwrite("pool_variants", &SSLConfig::pool_variants)
      .def_readwrite("learning_rate", &SSLConfig::learning_rate)
      .def_readwrite("weight_decay", &SSLConfig::weight_decay)
      .def_readwrite("seed", &SSLConfig::seed);
  m.def(
      "train_ssl",
      [](const MatXf& features_std, const std::vector<int>& labels,
         const std::vector<int>& label_mask, int num_families, const AugmentedPool& pool,
         const FCResNetConfig& clf, const SSLConfig& cfg) {
        auto result =
            train_ssl(features_std, labels, to_mask(label_mask), num_families, pool, clf, cfg);
        py::list log;
        for (const auto& e : result.log) {
          py::dict d;
          d["epoch"] = e.epoch;
          d["loss_labeled"] = e.loss_labeled;
          d["loss_unlabeled"] = e.loss_unlabeled;
          d["lambda"] = e.lambda;
          d["train_acc"] = e.train_acc;
          log.append(d);
        }
        return py::make_tuple(std::move(result.classifier), log);
      },
      py::arg("features_std"), py::arg("labels"), py::arg("label_mask"), py::arg("num_families"),
      py::arg("pool"), py::arg("classifier_config"), py::arg("ssl_config"));
  m.def(
      "train_supervised",
      [](const MatXf& features_std, const std::vector<int>& labels,
         const std::vector<int>& label_mask, int num_families, const FCResNetConfig& clf,
         const SSLConfig& cfg) {
        auto result =
            train_supervised(features_std, labels, to_mask(label_mask), num_families, clf, cfg);
        return std::move(result.classifier);
      },
      py::arg("features_std"), py::arg("labels"), py::arg("label_mask"), py::arg("num_families"),
      py::arg("classifier_config"), py::arg("ssl_config"));

  m.def(
      "compute_metrics",
      [](const std::vector<int>& preds, const std::vector<int>& truths, int num_families) {
        return metrics_dict(compute_metrics(preds, truths, num_families));
      },
      py::arg("preds"), py::arg("truths"), py::arg("num_families"));

  py::class_<SyntheticSpec>(m, "SyntheticSpec")
      .def(py::init<>())
      .def_readwrite("families", &SyntheticSpec::families)
      .def_readwrite("per_family", &SyntheticSpec::per_family)
      .def_readwrite("interp_dims", &SyntheticSpec::interp_dims)
      .def_readwrite("code_dims", &SyntheticSpec::code_dims)
      .def_readwrite("separation", &SyntheticSpec::separation)
      .def_readwrite("sigma", &SyntheticSpec::sigma)
      .def_readwrite("codes_per_family", &SyntheticSpec::codes_per_family)
      .def_readwrite("code_scale", &SyntheticSpec::code_scale)
      .def_readwrite("seed", &SyntheticSpec::seed);
  py::class_<SyntheticData>(m, "SyntheticData")
      .def_readonly("dataset", &SyntheticData::dataset)
      .def_readonly("schema", &SyntheticData::schema)
      .def_readonly("centroids", &SyntheticData::centroids);
  m.def("generate_synthetic", &generate_synthetic, py::arg("spec"));
  m.def("nearest_centroid", &nearest_centroid, py::arg("samples"), py::arg("centroids"));

  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("encoder", &PipelineConfig::encoder)
      .def_readwrite("augment", &PipelineConfig::augment)
      .def_readwrite("classifier", &PipelineConfig::classifier)
      .def_readwrite("ssl", &PipelineConfig::ssl)
      .def_readwrite("fit_standardizer_on_train_only",
                     &PipelineConfig::fit_standardizer_on_train_only);

  m.def(
      "saturation_experiment",
      [](const Dataset& ds, const FeatureSchema& schema, const std::vector<double>& fractions,
         const std::vector<std::uint64_t>& seeds, const PipelineConfig& cfg) {
        return rows_list(saturation_experiment(ds, schema, fractions, seeds, cfg));
      },
      py::arg("dataset"), py::arg("schema"), py::arg("fractions"), py::arg("seeds"),
      py::arg("config"));
  m.def(
      "ablation_experiment",
      [](const Dataset& ds, const FeatureSchema& schema, double fraction,
         const std::vector<std::uint64_t>& seeds, const PipelineConfig& cfg) {
        return rows_list(ablation_experiment(ds, schema, fraction, seeds, cfg));
      },
      py::arg("dataset"), py::arg("schema"), py::arg("fraction"), py::arg("seeds"),
      py::arg("config"));
  m.def(
      "temporal_experiment",
      [](const Dataset& ds, const FeatureSchema& schema, const std::string& cutoff,
         const std::vector<std::string>& periods, double fraction,
         const std::vector<std::uint64_t>& seeds, const PipelineConfig& cfg) {
        return rows_list(temporal_experiment(ds, schema, cutoff, periods, fraction, seeds, cfg));
      },
      py::arg("dataset"), py::arg("schema"), py::arg("cutoff"), py::arg("periods"),
      py::arg("fraction"), py::arg("seeds"), py::arg("config"));
  m.def(
      "leaveout_experiment",
      [](const Dataset& ds, const FeatureSchema& schema, int n_unidentified, double fraction,
         const std::vector<std::uint64_t>& seeds, const PipelineConfig& cfg) {
        return rows_list(leaveout_experiment(ds, schema, n_unidentified, fraction, seeds, cfg));
      },
      py::arg("dataset"), py::arg("schema"), py::arg("n_unidentified"), py::arg("fraction"),
      py::arg("seeds"), py::arg("config"));

  m.attr("UNLABELED") = kUnlabeled;
#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "0.1.0";
#endif
}
