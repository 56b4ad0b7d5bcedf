#pragma once

#include "malmixer/common.hpp"
#include "malmixer/io.hpp"

#include <string>
#include <vector>

namespace malmixer {

struct FamilyMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;
};

struct MetricsReport {
  double accuracy = 0.0;
  double precision_macro = 0.0;
  double recall_macro = 0.0;
  double f1_macro = 0.0;
  std::vector<FamilyMetrics> per_family;

  json to_json() const;
};

/// Accuracy plus per-family precision/recall/F1 with the substitute-0
/// convention for empty denominators; macros are unweighted means over all
/// num_families classes.
MetricsReport compute_metrics(const std::vector<int>& preds, const std::vector<int>& truths,
                              int num_families);

}  // namespace malmixer
