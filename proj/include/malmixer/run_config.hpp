#pragma once

#include "malmixer/experiments.hpp"

#include <optional>
#include <string>
#include <vector>

namespace malmixer {

struct ExperimentParams {
  std::string kind = "synthetic-bench";
  std::vector<double> fractions{0.01, 0.1, 0.5};
  double fraction = 0.01;
  std::vector<std::uint64_t> seeds{17, 18, 19, 20, 21};
  std::string cutoff;
  std::vector<std::string> periods;
  int n_unidentified = 1;
  std::string variant = "full";
  std::optional<SyntheticSpec> synthetic;
};

struct RunConfig {
  std::uint64_t seed = 17;
  std::string out = "out";
  std::string features_path;
  std::string meta_path;
  std::string schema_path;
  std::string standardize_fit = "train";  // "train" | "all"
  std::optional<double> labels_fraction;
  PipelineConfig pipeline;
  ExperimentParams experiment;

  void validate() const;
};

/// Applies "a.b.c=value" onto a JSON document; values parse as JSON when
/// possible, otherwise as strings.
void apply_dotted_override(json& doc, const std::string& assignment);

RunConfig parse_run_config(const json& doc);
json default_run_config_json();

}  // namespace malmixer
