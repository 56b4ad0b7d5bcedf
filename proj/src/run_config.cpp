#include "malmixer/run_config.hpp"

namespace malmixer {

void apply_dotted_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like key.path=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;  // plain string
  }

  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ConfigError("empty key segment in override '" + assignment + "'");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

json default_run_config_json() {
  RunConfig d;
  return json{
      {"seed", d.seed},
      {"out", d.out},
      {"dataset", {{"features", ""}, {"meta", ""}, {"schema", ""}}},
      {"standardize_fit", d.standardize_fit},
      {"labels_fraction", nullptr},
      {"encoder",
       {{"phi_i_layers", d.pipeline.encoder.phi_i_layers},
        {"phi_n_layers", d.pipeline.encoder.phi_n_layers},
        {"hidden_dim", d.pipeline.encoder.hidden_dim},
        {"sim_dim", d.pipeline.encoder.sim_dim},
        {"dis_dim", d.pipeline.encoder.dis_dim},
        {"margin", d.pipeline.encoder.margin},
        {"epochs", d.pipeline.encoder.epochs},
        {"batch_size", d.pipeline.encoder.batch_size},
        {"learning_rate", d.pipeline.encoder.learning_rate},
        {"weight_decay", d.pipeline.encoder.weight_decay}}},
      {"augment",
       {{"k_neighbors", d.pipeline.augment.k_neighbors},
        {"k_candidates", d.pipeline.augment.k_candidates},
        {"fixed_alpha", nullptr}}},
      {"classifier",
       {{"stem_dim", d.pipeline.classifier.stem_dim},
        {"group_dims", d.pipeline.classifier.group_dims},
        {"blocks_per_group", d.pipeline.classifier.blocks_per_group},
        {"negative_slope", d.pipeline.classifier.negative_slope}}},
      {"ssl",
       {{"epochs", d.pipeline.ssl.epochs},
        {"labeled_batch", d.pipeline.ssl.labeled_batch},
        {"unlabeled_batch", d.pipeline.ssl.unlabeled_batch},
        {"lambda_max", d.pipeline.ssl.lambda_max},
        {"ramp_fraction", d.pipeline.ssl.ramp_fraction},
        {"mixup_beta", d.pipeline.ssl.mixup_beta},
        {"pool_variants", d.pipeline.ssl.pool_variants},
        {"learning_rate", d.pipeline.ssl.learning_rate},
        {"weight_decay", d.pipeline.ssl.weight_decay}}},
      {"experiment",
       {{"kind", d.experiment.kind},
        {"fractions", d.experiment.fractions},
        {"fraction", d.experiment.fraction},
        {"seeds", d.experiment.seeds},
        {"cutoff", d.experiment.cutoff},
        {"periods", d.experiment.periods},
        {"n_unidentified", d.experiment.n_unidentified},
        {"variant", d.experiment.variant},
        {"synthetic", nullptr}}}};
}

namespace {

template <typename T>
void read_into(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

SyntheticSpec parse_synthetic(const json& j) {
  SyntheticSpec s;
  read_into(j, "families", s.families);
  read_into(j, "per_family", s.per_family);
  read_into(j, "interp_dims", s.interp_dims);
  read_into(j, "code_dims", s.code_dims);
  read_into(j, "separation", s.separation);
  read_into(j, "sigma", s.sigma);
  read_into(j, "codes_per_family", s.codes_per_family);
  read_into(j, "code_scale", s.code_scale);
  read_into(j, "seed", s.seed);
  s.validate();
  return s;
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  RunConfig c;
  try {
    read_into(doc, "seed", c.seed);
    read_into(doc, "out", c.out);
    read_into(doc, "standardize_fit", c.standardize_fit);
    if (doc.contains("labels_fraction") && !doc["labels_fraction"].is_null())
      c.labels_fraction = doc["labels_fraction"].get<double>();
    if (doc.contains("dataset") && doc["dataset"].is_object()) {
      const json& d = doc["dataset"];
      read_into(d, "features", c.features_path);
      read_into(d, "meta", c.meta_path);
      read_into(d, "schema", c.schema_path);
    }
    if (doc.contains("encoder")) {
      const json& e = doc["encoder"];
      auto& ec = c.pipeline.encoder;
      read_into(e, "phi_i_layers", ec.phi_i_layers);
      read_into(e, "phi_n_layers", ec.phi_n_layers);
      read_into(e, "hidden_dim", ec.hidden_dim);
      read_into(e, "sim_dim", ec.sim_dim);
      read_into(e, "dis_dim", ec.dis_dim);
      read_into(e, "margin", ec.margin);
      read_into(e, "epochs", ec.epochs);
      read_into(e, "batch_size", ec.batch_size);
      read_into(e, "learning_rate", ec.learning_rate);
      read_into(e, "weight_decay", ec.weight_decay);
    }
    if (doc.contains("augment")) {
      const json& a = doc["augment"];
      auto& ac = c.pipeline.augment;
      read_into(a, "k_neighbors", ac.k_neighbors);
      read_into(a, "k_candidates", ac.k_candidates);
      if (a.contains("fixed_alpha") && !a["fixed_alpha"].is_null())
        ac.fixed_alpha = a["fixed_alpha"].get<float>();
    }
    if (doc.contains("classifier")) {
      const json& k = doc["classifier"];
      auto& kc = c.pipeline.classifier;
      read_into(k, "stem_dim", kc.stem_dim);
      read_into(k, "group_dims", kc.group_dims);
      read_into(k, "blocks_per_group", kc.blocks_per_group);
      read_into(k, "negative_slope", kc.negative_slope);
    }
    if (doc.contains("ssl")) {
      const json& s = doc["ssl"];
      auto& sc = c.pipeline.ssl;
      read_into(s, "epochs", sc.epochs);
      read_into(s, "labeled_batch", sc.labeled_batch);
      read_into(s, "unlabeled_batch", sc.unlabeled_batch);
      read_into(s, "lambda_max", sc.lambda_max);
      read_into(s, "ramp_fraction", sc.ramp_fraction);
      read_into(s, "mixup_beta", sc.mixup_beta);
      read_into(s, "pool_variants", sc.pool_variants);
      read_into(s, "learning_rate", sc.learning_rate);
      read_into(s, "weight_decay", sc.weight_decay);
    }
    if (doc.contains("experiment")) {
      const json& x = doc["experiment"];
      auto& xp = c.experiment;
      read_into(x, "kind", xp.kind);
      read_into(x, "fractions", xp.fractions);
      read_into(x, "fraction", xp.fraction);
      read_into(x, "seeds", xp.seeds);
      read_into(x, "cutoff", xp.cutoff);
      read_into(x, "periods", xp.periods);
      read_into(x, "n_unidentified", xp.n_unidentified);
      read_into(x, "variant", xp.variant);
      if (x.contains("synthetic") && !x["synthetic"].is_null())
        xp.synthetic = parse_synthetic(x["synthetic"]);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (standardize_fit != "train" && standardize_fit != "all")
    throw ConfigError("standardize_fit must be 'train' or 'all'");
  if (labels_fraction && (*labels_fraction <= 0.0 || *labels_fraction > 1.0))
    throw ConfigError("labels_fraction must be in (0, 1]");
  pipeline.ssl.validate();
  pipeline.augment.validate();
  // encoder/classifier validate once dims are known, at use sites
}

}  // namespace malmixer
