#include "malmixer/ssl.hpp"

#include "malmixer/io.hpp"

#include <algorithm>
#include <fstream>

namespace malmixer {

MatXf guess_labels(const FCResNet& classifier, const MatXf& u, const MatXf& u_aug) {
  if (u.rows() != u_aug.rows()) throw Error("guess_labels: row counts differ");
  return 0.5f * (classifier.predict_proba(u) + classifier.predict_proba(u_aug));
}

MatXf sharpen(const MatXf& y) {
  MatXf out = y.array().square();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const float denom = out.row(r).sum();
    if (denom <= 0.0f) throw Error("sharpen: row is not a distribution");
    out.row(r) /= denom;
  }
  return out;
}

std::pair<Eigen::RowVectorXf, Eigen::RowVectorXf> mixup(
    Eigen::Ref<const Eigen::RowVectorXf> x1, Eigen::Ref<const Eigen::RowVectorXf> y1,
    Eigen::Ref<const Eigen::RowVectorXf> x2, Eigen::Ref<const Eigen::RowVectorXf> y2,
    float lam) {
  if (x1.size() != x2.size() || y1.size() != y2.size()) throw Error("mixup: shape mismatch");
  if (lam < 0.5f || lam > 1.0f) throw Error("mixup: lam outside [0.5, 1]");
  return {lam * x1 + (1.0f - lam) * x2, lam * y1 + (1.0f - lam) * y2};
}

double lambda_at(long step, long total_steps, const SSLConfig& config) {
  const double ramp_steps = config.ramp_fraction * static_cast<double>(total_steps);
  if (ramp_steps <= 0.0) return config.lambda_max;
  return config.lambda_max * std::min(1.0, static_cast<double>(step) / ramp_steps);
}

double supervised_loss(const MatXf& x, const MatXf& targets, const FCResNet& classifier) {
  return soft_cross_entropy(classifier.predict_proba(x), targets);
}

double unsupervised_loss(const MatXf& u, const MatXf& targets, const FCResNet& classifier) {
  return brier_loss(classifier.predict_proba(u), targets);
}

MatXf one_hot(const std::vector<int>& labels, int num_classes) {
  MatXf y = MatXf::Zero(static_cast<Eigen::Index>(labels.size()), num_classes);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] < 0 || labels[r] >= num_classes)
      throw Error("one_hot: label out of range");
    y(static_cast<Eigen::Index>(r), labels[r]) = 1.0f;
  }
  return y;
}

namespace {

MatXf entry_features(const MatXf& features, const AugmentedPool& pool,
                     const std::vector<LabeledEntry>& entries) {
  MatXf out(static_cast<Eigen::Index>(entries.size()), features.cols());
  for (std::size_t r = 0; r < entries.size(); ++r) {
    const auto& e = entries[r];
    out.row(static_cast<Eigen::Index>(r)) =
        e.variant < 0 ? features.row(e.source) : pool.row(e.source, e.variant);
  }
  return out;
}

MatXf pool_draws(const MatXf& /*features*/, const AugmentedPool& pool,
                 const std::vector<int>& rows, Rng& rng) {
  MatXf out(static_cast<Eigen::Index>(rows.size()), pool.features.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = pool.row(rows[r], rng.index(pool.variants));
  return out;
}

void mix_against_self(MatXf& x, MatXf& y, const SSLConfig& config, Rng& rng) {
  const int n = static_cast<int>(x.rows());
  if (n == 0) return;
  auto partner = rng.permutation(n);
  MatXf x0 = x, y0 = y;
  for (int r = 0; r < n; ++r) {
    double b = rng.beta(config.mixup_beta, config.mixup_beta);
    const float lam = static_cast<float>(std::max(b, 1.0 - b));
    auto [xm, ym] = mixup(x0.row(r), y0.row(r), x0.row(partner[static_cast<std::size_t>(r)]),
                          y0.row(partner[static_cast<std::size_t>(r)]), lam);
    x.row(r) = xm;
    y.row(r) = ym;
  }
}

}  // namespace

EpochSets build_epoch_sets(const MatXf& features, const std::vector<LabeledEntry>& labeled,
                           const MatXf& labeled_targets, const std::vector<int>& unlabeled_rows,
                           const AugmentedPool& pool, const FCResNet& classifier,
                           const SSLConfig& config, Rng& rng) {
  if (labeled.empty()) throw Error("build_epoch_sets needs a non-empty labeled set");
  const Eigen::Index dim = features.cols();

  MatXf x = entry_features(features, pool, labeled);
  std::vector<int> labeled_sources;
  labeled_sources.reserve(labeled.size());
  for (const auto& e : labeled) labeled_sources.push_back(e.source);
  MatXf x_aug = pool_draws(features, pool, labeled_sources, rng);

  EpochSets sets;
  sets.x_features.resize(2 * x.rows(), dim);
  sets.x_features << x, x_aug;
  sets.x_targets.resize(2 * labeled_targets.rows(), labeled_targets.cols());
  sets.x_targets << labeled_targets, labeled_targets;

  if (!unlabeled_rows.empty()) {
    MatXf u(static_cast<Eigen::Index>(unlabeled_rows.size()), dim);
    for (std::size_t r = 0; r < unlabeled_rows.size(); ++r)
      u.row(static_cast<Eigen::Index>(r)) = features.row(unlabeled_rows[r]);
    MatXf u_aug = pool_draws(features, pool, unlabeled_rows, rng);
    MatXf pseudo = sharpen(guess_labels(classifier, u, u_aug));
    sets.u_features.resize(2 * u.rows(), dim);
    sets.u_features << u, u_aug;
    sets.u_targets.resize(2 * pseudo.rows(), pseudo.cols());
    sets.u_targets << pseudo, pseudo;
  } else {
    sets.u_features.resize(0, dim);
    sets.u_targets.resize(0, labeled_targets.cols());
  }

  mix_against_self(sets.x_features, sets.x_targets, config, rng);
  mix_against_self(sets.u_features, sets.u_targets, config, rng);
  return sets;
}

std::vector<LabeledEntry> upsample_labeled(const std::vector<int>& labeled_rows,
                                           const std::vector<int>& labels,
                                           const AugmentedPool& pool, Rng& rng) {
  std::vector<LabeledEntry> entries;
  entries.reserve(labeled_rows.size());
  int max_family = -1;
  for (int r : labeled_rows) max_family = std::max(max_family, labels[static_cast<std::size_t>(r)]);
  std::vector<std::vector<int>> by_family(static_cast<std::size_t>(max_family + 1));
  for (int r : labeled_rows) {
    entries.push_back({r, -1});
    by_family[static_cast<std::size_t>(labels[static_cast<std::size_t>(r)])].push_back(r);
  }
  std::size_t largest = 0;
  for (const auto& rows : by_family) largest = std::max(largest, rows.size());
  for (const auto& rows : by_family) {
    if (rows.empty()) continue;
    for (std::size_t add = rows.size(); add < largest; ++add) {
      const int src = rows[static_cast<std::size_t>(rng.index(static_cast<int>(rows.size())))];
      entries.push_back({src, pool.variants > 0 ? rng.index(pool.variants) : -1});
    }
  }
  return entries;
}

namespace {

double accuracy_on(const FCResNet& net, const MatXf& x, const std::vector<int>& truth) {
  if (truth.empty()) return 0.0;
  auto preds = net.predict(x);
  int ok = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (preds[i] == truth[i]) ++ok;
  return static_cast<double>(ok) / static_cast<double>(truth.size());
}

struct BatchCycler {
  std::vector<int> order;
  std::size_t pos = 0;
  std::vector<int> take(int count) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      out.push_back(order[pos]);
      pos = (pos + 1) % order.size();
    }
    return out;
  }
};

MatXf gather_rows(const MatXf& m, const std::vector<int>& rows) {
  MatXf out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

}  // namespace

SSLTrainResult train_ssl(const MatXf& features_std, const std::vector<int>& labels,
                         const std::vector<bool>& label_mask, int num_families,
                         const AugmentedPool& pool, const FCResNetConfig& classifier_config,
                         const SSLConfig& config) {
  config.validate();
  const int n = static_cast<int>(features_std.rows());
  if (static_cast<int>(labels.size()) != n || static_cast<int>(label_mask.size()) != n)
    throw Error("train_ssl: labels/mask length mismatch");

  std::vector<int> labeled_rows, unlabeled_rows;
  std::vector<bool> family_seen(static_cast<std::size_t>(num_families), false);
  for (int r = 0; r < n; ++r) {
    if (label_mask[static_cast<std::size_t>(r)]) {
      const int l = labels[static_cast<std::size_t>(r)];
      if (l < 0 || l >= num_families) throw Error("train_ssl: masked row lacks a valid label");
      family_seen[static_cast<std::size_t>(l)] = true;
      labeled_rows.push_back(r);
    } else {
      unlabeled_rows.push_back(r);
    }
  }
  for (int f = 0; f < num_families; ++f)
    if (!family_seen[static_cast<std::size_t>(f)])
      throw Error("label mask misses family id " + std::to_string(f));

  Rng rng(derive_seed(config.seed, 0x55u));
  auto entries = upsample_labeled(labeled_rows, labels, pool, rng);
  std::vector<int> entry_labels;
  entry_labels.reserve(entries.size());
  for (const auto& e : entries) entry_labels.push_back(labels[static_cast<std::size_t>(e.source)]);
  MatXf targets = one_hot(entry_labels, num_families);

  FCResNet net = FCResNet::init(classifier_config);
  FCResNet grads = net.zeros_like();
  nn::AdamW<float> opt(config.learning_rate, config.weight_decay);
  auto params = net.param_ptrs();
  auto grad_ptrs = static_cast<const FCResNet&>(grads).param_ptrs();

  const long x_size = 2 * static_cast<long>(entries.size());
  const long u_size = 2 * static_cast<long>(unlabeled_rows.size());
  const long steps_labeled = (x_size + config.labeled_batch - 1) / config.labeled_batch;
  const long steps_unlabeled =
      u_size > 0 ? (u_size + config.unlabeled_batch - 1) / config.unlabeled_batch : 0;
  const long steps_per_epoch = std::max<long>(1, std::max(steps_labeled, steps_unlabeled));
  const long total_steps = steps_per_epoch * config.epochs;

  // Labeled-row views for the per-epoch accuracy line.
  MatXf labeled_features = gather_rows(features_std, labeled_rows);
  std::vector<int> labeled_truth;
  for (int r : labeled_rows) labeled_truth.push_back(labels[static_cast<std::size_t>(r)]);

  SSLTrainResult out;
  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    EpochSets sets = build_epoch_sets(features_std, entries, targets, unlabeled_rows, pool, net,
                                      config, rng);
    BatchCycler x_cycle{rng.permutation(static_cast<int>(sets.x_features.rows()))};
    BatchCycler u_cycle;
    if (sets.u_features.rows() > 0)
      u_cycle.order = rng.permutation(static_cast<int>(sets.u_features.rows()));

    double sum_lx = 0.0, sum_lu = 0.0;
    double last_lambda = 0.0;
    for (long s = 0; s < steps_per_epoch; ++s, ++step) {
      const double lambda = lambda_at(step, total_steps, config);
      last_lambda = lambda;
      grads.set_zero();

      auto xb = x_cycle.take(std::min<long>(config.labeled_batch, sets.x_features.rows()));
      MatXf bx = gather_rows(sets.x_features, xb);
      MatXf by = gather_rows(sets.x_targets, xb);
      FCResNet::Cache cache;
      MatXf logits = net.forward_cached(bx, cache);
      MatXf probs = softmax_rows(logits);
      const double lx = soft_cross_entropy(probs, by);
      net.backward(cache, soft_cross_entropy_grad_logits(probs, by), grads);

      double lu = 0.0;
      if (sets.u_features.rows() > 0) {
        auto ub = u_cycle.take(std::min<long>(config.unlabeled_batch, sets.u_features.rows()));
        MatXf bu = gather_rows(sets.u_features, ub);
        MatXf buy = gather_rows(sets.u_targets, ub);
        FCResNet::Cache ucache;
        MatXf ulogits = net.forward_cached(bu, ucache);
        MatXf uprobs = softmax_rows(ulogits);
        lu = brier_loss(uprobs, buy);
        MatXf dlogits = brier_grad_logits(uprobs, buy) * static_cast<float>(lambda);
        net.backward(ucache, dlogits, grads);
      }
      if (!std::isfinite(lx) || !std::isfinite(lu))
        throw Error("non-finite SSL loss at epoch " + std::to_string(epoch));
      opt.step(params, grad_ptrs);
      sum_lx += lx;
      sum_lu += lu;
    }
    out.log.push_back({epoch, sum_lx / static_cast<double>(steps_per_epoch),
                       sum_lu / static_cast<double>(steps_per_epoch), last_lambda,
                       accuracy_on(net, labeled_features, labeled_truth)});
  }
  out.classifier = std::move(net);
  return out;
}

SSLTrainResult train_supervised(const MatXf& features_std, const std::vector<int>& labels,
                                const std::vector<bool>& label_mask, int num_families,
                                const FCResNetConfig& classifier_config,
                                const SSLConfig& config) {
  config.validate();
  std::vector<int> labeled_rows;
  for (std::size_t r = 0; r < label_mask.size(); ++r)
    if (label_mask[r]) labeled_rows.push_back(static_cast<int>(r));
  if (labeled_rows.empty()) throw Error("train_supervised needs labeled rows");

  MatXf x = gather_rows(features_std, labeled_rows);
  std::vector<int> truth;
  for (int r : labeled_rows) {
    if (labels[static_cast<std::size_t>(r)] < 0) throw Error("train_supervised: unlabeled row in mask");
    truth.push_back(labels[static_cast<std::size_t>(r)]);
  }
  MatXf targets = one_hot(truth, num_families);

  FCResNet net = FCResNet::init(classifier_config);
  FCResNet grads = net.zeros_like();
  nn::AdamW<float> opt(config.learning_rate, config.weight_decay);
  auto params = net.param_ptrs();

  Rng rng(derive_seed(config.seed, 0x5bu));
  const int n = static_cast<int>(x.rows());
  auto grad_ptrs = static_cast<const FCResNet&>(grads).param_ptrs();
  SSLTrainResult out;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    BatchCycler cycle{rng.permutation(n)};
    const long steps = std::max<long>(1, (n + config.labeled_batch - 1) / config.labeled_batch);
    double sum_lx = 0.0;
    for (long s = 0; s < steps; ++s) {
      grads.set_zero();
      auto idx = cycle.take(std::min(config.labeled_batch, n));
      MatXf bx = gather_rows(x, idx);
      MatXf by = gather_rows(targets, idx);
      FCResNet::Cache cache;
      MatXf probs = softmax_rows(net.forward_cached(bx, cache));
      sum_lx += soft_cross_entropy(probs, by);
      net.backward(cache, soft_cross_entropy_grad_logits(probs, by), grads);
      opt.step(params, grad_ptrs);
    }
    out.log.push_back({epoch, sum_lx / static_cast<double>(steps), 0.0, 0.0,
                       accuracy_on(net, x, truth)});
  }
  out.classifier = std::move(net);
  return out;
}

std::vector<int> predict(const FCResNet& classifier, const MatXf& x) {
  return classifier.predict(x);
}

void save_training_log(const std::vector<SSLEpochLog>& log, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  for (const auto& e : log) {
    json j{{"epoch", e.epoch},
           {"loss_labeled", e.loss_labeled},
           {"loss_unlabeled", e.loss_unlabeled},
           {"lambda", e.lambda},
           {"train_acc", e.train_acc}};
    f << j.dump() << "\n";
  }
}

}  // namespace malmixer
