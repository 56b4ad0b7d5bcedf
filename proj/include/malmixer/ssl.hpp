#pragma once

#include "malmixer/augment.hpp"
#include "malmixer/classifier.hpp"

namespace malmixer {

struct SSLConfig {
  int epochs = 50;
  int labeled_batch = 64;
  int unlabeled_batch = 64;
  float lambda_max = 10.0f;
  float ramp_fraction = 0.25f;  // of total steps
  float mixup_beta = 0.75f;
  int pool_variants = 4;
  float learning_rate = 5e-5f;
  float weight_decay = 1e-5f;
  std::uint64_t seed = 17;

  void validate() const {
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (labeled_batch < 1 || unlabeled_batch < 1) throw ConfigError("batch sizes must be >= 1");
    if (lambda_max < 0.0f) throw ConfigError("lambda_max must be >= 0");
    if (ramp_fraction < 0.0f || ramp_fraction > 1.0f) throw ConfigError("ramp_fraction in [0, 1]");
    if (mixup_beta <= 0.0f) throw ConfigError("mixup_beta must be > 0");
    if (pool_variants < 1) throw ConfigError("pool_variants must be >= 1");
  }
};

/// (P(y|u) + P(y|u_aug)) / 2, rowwise.
MatXf guess_labels(const FCResNet& classifier, const MatXf& u, const MatXf& u_aug);

/// Sharpen(y)_i = y_i^2 / sum_j y_j^2, rowwise. Argmax-preserving,
/// entropy non-increasing.
MatXf sharpen(const MatXf& y);

/// lam*x1 + (1-lam)*x2 for features and label rows; lam must already be in
/// [0.5, 1] (max-trick applied by the caller).
std::pair<Eigen::RowVectorXf, Eigen::RowVectorXf> mixup(
    Eigen::Ref<const Eigen::RowVectorXf> x1, Eigen::Ref<const Eigen::RowVectorXf> y1,
    Eigen::Ref<const Eigen::RowVectorXf> x2, Eigen::Ref<const Eigen::RowVectorXf> y2, float lam);

/// lambda(step) = lambda_max * min(1, step / (ramp_fraction * total_steps)).
double lambda_at(long step, long total_steps, const SSLConfig& config);

double supervised_loss(const MatXf& x, const MatXf& targets, const FCResNet& classifier);
double unsupervised_loss(const MatXf& u, const MatXf& targets, const FCResNet& classifier);

MatXf one_hot(const std::vector<int>& labels, int num_classes);

/// A labeled training entry: the original dataset row, or one of its pool
/// variants (added by up-sampling).
struct LabeledEntry {
  int source;
  int variant;  // -1 for the original row
};

struct EpochSets {
  MatXf x_features, x_targets;  // X' after MixUp
  MatXf u_features, u_targets;  // U' after MixUp
};

/// One epoch's X' and U': originals plus one pool draw each, pseudo-labels
/// shared between u and A(u), then each set mixed against a permutation of
/// itself with lam = max(b, 1-b), b ~ Beta(mixup_beta, mixup_beta).
EpochSets build_epoch_sets(const MatXf& features, const std::vector<LabeledEntry>& labeled,
                           const MatXf& labeled_targets, const std::vector<int>& unlabeled_rows,
                           const AugmentedPool& pool, const FCResNet& classifier,
                           const SSLConfig& config, Rng& rng);

/// Grows every family to the size of the largest by appending pool variants
/// of its labeled rows, sampled with replacement.
std::vector<LabeledEntry> upsample_labeled(const std::vector<int>& labeled_rows,
                                           const std::vector<int>& labels,
                                           const AugmentedPool& pool, Rng& rng);

struct SSLEpochLog {
  int epoch;
  double loss_labeled;
  double loss_unlabeled;
  double lambda;
  double train_acc;
};

struct SSLTrainResult {
  FCResNet classifier;
  std::vector<SSLEpochLog> log;
};

/// Full semi-supervised run: up-sampling, per-epoch set construction, ramped
/// combined loss, Adam steps with decoupled weight decay. Deterministic for a
/// fixed (data, config, seed).
SSLTrainResult train_ssl(const MatXf& features_std, const std::vector<int>& labels,
                         const std::vector<bool>& label_mask, int num_families,
                         const AugmentedPool& pool, const FCResNetConfig& classifier_config,
                         const SSLConfig& config);

/// Plain cross-entropy training on the labeled rows only; the supervised
/// reference point for the experiment harness.
SSLTrainResult train_supervised(const MatXf& features_std, const std::vector<int>& labels,
                                const std::vector<bool>& label_mask, int num_families,
                                const FCResNetConfig& classifier_config, const SSLConfig& config);

std::vector<int> predict(const FCResNet& classifier, const MatXf& x);

void save_training_log(const std::vector<SSLEpochLog>& log, const std::filesystem::path& path);

}  // namespace malmixer
