#pragma once

#include "malmixer/metrics.hpp"
#include "malmixer/ssl.hpp"
#include "malmixer/synthetic.hpp"

#include <filesystem>
#include <string>

namespace malmixer {

enum class Variant { kFull, kNoAlignment, kDirectMix, kGaussianOnly, kSupervised };

std::string variant_name(Variant v);
Variant variant_from_string(const std::string& name);

/// Template for one training run; input_dim/num_classes of the classifier are
/// filled in per run, seeds are derived from the experiment seed.
struct PipelineConfig {
  EncoderConfig encoder;
  AugmentationConfig augment;
  FCResNetConfig classifier;
  SSLConfig ssl;
  bool fit_standardizer_on_train_only = true;
};

struct TrainTestSplit {
  std::vector<int> train_rows;
  std::vector<int> test_rows;
};

/// Seeded permutation split; the test side gets floor(n/5) rows.
TrainTestSplit split_80_20(int n, std::uint64_t seed);

/// Per-coordinate population std of each family's labeled rows (F x dim).
MatXf family_std(const MatXf& features, const std::vector<int>& labels,
                 const std::vector<bool>& label_mask, int num_families);

/// For each row, the family of the nearest labeled row (ties to the smaller
/// row index); labeled rows keep their own family.
std::vector<int> pseudo_families(const MatXf& features, const std::vector<int>& labels,
                                 const std::vector<bool>& label_mask);

/// x + noise, noise_j ~ N(0, stats_j). Zero-variance coordinates stay put.
Eigen::RowVectorXf gaussian_augment(Eigen::Ref<const Eigen::RowVectorXf> x,
                                    Eigen::Ref<const Eigen::RowVectorXf> stats, Rng& rng);

/// Builds the m-variant pool for any augmentation variant. kSupervised has no
/// pool and is rejected.
AugmentedPool build_variant_pool(Variant variant, const MatXf& features_std,
                                 const std::vector<int>& labels,
                                 const std::vector<bool>& label_mask,
                                 const FeatureSchema& schema, const PipelineConfig& config,
                                 std::uint64_t seed);

struct ExperimentRow {
  std::string experiment;
  std::string variant;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::string split = "test";
  MetricsReport metrics;
};

struct RunArtifacts {
  FCResNet classifier;
  std::vector<SSLEpochLog> log;
};

/// One end-to-end run: standardize, build the variant pool on the train rows,
/// train (SSL or supervised), evaluate on the held-out rows.
ExperimentRow run_variant(Variant variant, const Dataset& dataset, const FeatureSchema& schema,
                          const TrainTestSplit& split, const std::vector<bool>& train_mask,
                          const PipelineConfig& config, std::uint64_t seed,
                          RunArtifacts* artifacts = nullptr);

std::vector<ExperimentRow> saturation_experiment(const Dataset& dataset,
                                                 const FeatureSchema& schema,
                                                 const std::vector<double>& fractions,
                                                 const std::vector<std::uint64_t>& seeds,
                                                 const PipelineConfig& config);

/// All five variants at one labeled fraction, over the given seeds.
std::vector<ExperimentRow> ablation_experiment(const Dataset& dataset,
                                               const FeatureSchema& schema, double fraction,
                                               const std::vector<std::uint64_t>& seeds,
                                               const PipelineConfig& config);

/// Train strictly before the cutoff (with its own 80/20 in-domain split),
/// evaluate on each later period. Periods are consecutive intervals between
/// the cutoff and each boundary; a final "post-all" split covers everything
/// after the cutoff.
std::vector<ExperimentRow> temporal_experiment(const Dataset& dataset, const FeatureSchema& schema,
                                               const std::string& cutoff_iso,
                                               const std::vector<std::string>& period_boundaries,
                                               double fraction,
                                               const std::vector<std::uint64_t>& seeds,
                                               const PipelineConfig& config);

/// Zero-shot (unidentified families unlabeled, their test rows necessarily
/// wrong) vs one-shot (one labeled row added per unidentified family).
std::vector<ExperimentRow> leaveout_experiment(const Dataset& dataset, const FeatureSchema& schema,
                                               int n_unidentified, double fraction,
                                               const std::vector<std::uint64_t>& seeds,
                                               const PipelineConfig& config);

void write_report_csv(const std::filesystem::path& path, const std::vector<ExperimentRow>& rows);
void write_summary_json(const std::filesystem::path& path, const std::vector<ExperimentRow>& rows);

}  // namespace malmixer
