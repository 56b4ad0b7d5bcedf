#pragma once

#include "malmixer/common.hpp"
#include "malmixer/rng.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace malmixer {

constexpr int kUnlabeled = -1;

/// Partition of a dim-dimensional feature vector into interpolatable and
/// non-interpolatable index sets. Both sets sorted, disjoint, non-empty, and
/// together exactly {0..dim-1}.
class FeatureSchema {
 public:
  FeatureSchema(int dim, std::vector<int> interpolatable,
                std::vector<std::string> names = {});

  static FeatureSchema load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  int dim() const { return dim_; }
  const std::vector<int>& interpolatable() const { return interpolatable_; }
  const std::vector<int>& non_interpolatable() const { return non_interpolatable_; }
  const std::vector<std::string>& names() const { return names_; }

  /// Gathers the interpolatable columns of a row block.
  MatXf split_i(const MatXf& x) const;
  MatXf split_n(const MatXf& x) const;
  /// Re-interleaves split halves back into full rows; exact inverse of split.
  MatXf join(const MatXf& s_i, const MatXf& s_n) const;

 private:
  int dim_;
  std::vector<int> interpolatable_;
  std::vector<int> non_interpolatable_;
  std::vector<std::string> names_;
};

struct StandardizationParams {
  VecXf mean;
  VecXf std;  // strictly positive; zero-variance columns clamped to 1
};

struct Dataset {
  MatXf features;                  // n x dim, raw or standardized
  std::vector<int> labels;         // family ids, kUnlabeled for unlabeled
  std::vector<std::string> families;
  std::vector<std::string> timestamps;      // empty or length n, ISO-8601
  std::vector<std::int64_t> timestamps_epoch;  // parsed, parallel to timestamps

  int n() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
  int num_families() const { return static_cast<int>(families.size()); }
  bool fully_labeled() const;
};

/// Loads a binary feature file plus its JSON metadata. Features stay raw.
Dataset load_dataset(const std::filesystem::path& features_path,
                     const std::filesystem::path& meta_path, const FeatureSchema& schema);

/// Writes the dataset back out in the same two-file format.
void save_dataset(const Dataset& ds, const std::filesystem::path& features_path,
                  const std::filesystem::path& meta_path);

/// Per-column mean/std over fit_rows; population (1/n) std; zeros clamped to 1.
StandardizationParams fit_standardizer(const MatXf& features, const std::vector<int>& fit_rows);

MatXf apply_standardizer(const MatXf& features, const StandardizationParams& params);

/// Marks ceil(fraction*n) rows with at least one per family: first one
/// uniformly random row per family, the remainder uniform without replacement.
std::vector<bool> select_labeled_subset(const Dataset& dataset, double fraction,
                                        std::uint64_t seed);

}  // namespace malmixer
