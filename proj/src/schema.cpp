#include "malmixer/schema.hpp"

#include "malmixer/io.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace malmixer {

FeatureSchema::FeatureSchema(int dim, std::vector<int> interpolatable,
                             std::vector<std::string> names)
    : dim_(dim), interpolatable_(std::move(interpolatable)), names_(std::move(names)) {
  if (dim_ <= 0) throw Error("schema dim must be positive");
  std::sort(interpolatable_.begin(), interpolatable_.end());
  interpolatable_.erase(std::unique(interpolatable_.begin(), interpolatable_.end()),
                        interpolatable_.end());
  for (int idx : interpolatable_)
    if (idx < 0 || idx >= dim_)
      throw Error("interpolatable index " + std::to_string(idx) + " outside [0, " +
                  std::to_string(dim_) + ")");
  std::set<int> interp(interpolatable_.begin(), interpolatable_.end());
  for (int j = 0; j < dim_; ++j)
    if (!interp.count(j)) non_interpolatable_.push_back(j);
  if (interpolatable_.empty() || non_interpolatable_.empty())
    throw Error("schema partition must leave both index sets non-empty");
  if (!names_.empty() && static_cast<int>(names_.size()) != dim_)
    throw Error("schema names length must equal dim");
}

FeatureSchema FeatureSchema::load(const std::filesystem::path& path) {
  json j = load_json(path);
  if (!j.contains("dim") || !j.contains("interpolatable"))
    throw Error("schema file " + path.string() + " needs {dim, interpolatable}");
  std::vector<std::string> names;
  if (j.contains("names")) names = j["names"].get<std::vector<std::string>>();
  return FeatureSchema(j["dim"].get<int>(), j["interpolatable"].get<std::vector<int>>(),
                       std::move(names));
}

void FeatureSchema::save(const std::filesystem::path& path) const {
  json j{{"dim", dim_}, {"interpolatable", interpolatable_}};
  if (!names_.empty()) j["names"] = names_;
  save_json(path, j);
}

namespace {

MatXf gather_columns(const MatXf& x, const std::vector<int>& cols) {
  MatXf out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    out.col(static_cast<Eigen::Index>(c)) = x.col(cols[c]);
  return out;
}

}  // namespace

MatXf FeatureSchema::split_i(const MatXf& x) const {
  if (x.cols() != dim_) throw Error("split: row length != schema dim");
  return gather_columns(x, interpolatable_);
}

MatXf FeatureSchema::split_n(const MatXf& x) const {
  if (x.cols() != dim_) throw Error("split: row length != schema dim");
  return gather_columns(x, non_interpolatable_);
}

MatXf FeatureSchema::join(const MatXf& s_i, const MatXf& s_n) const {
  if (s_i.rows() != s_n.rows()) throw Error("join: row counts differ");
  if (s_i.cols() != static_cast<Eigen::Index>(interpolatable_.size()) ||
      s_n.cols() != static_cast<Eigen::Index>(non_interpolatable_.size()))
    throw Error("join: column counts do not match schema partition");
  MatXf out(s_i.rows(), dim_);
  for (std::size_t c = 0; c < interpolatable_.size(); ++c)
    out.col(interpolatable_[c]) = s_i.col(static_cast<Eigen::Index>(c));
  for (std::size_t c = 0; c < non_interpolatable_.size(); ++c)
    out.col(non_interpolatable_[c]) = s_n.col(static_cast<Eigen::Index>(c));
  return out;
}

bool Dataset::fully_labeled() const {
  return std::all_of(labels.begin(), labels.end(), [](int l) { return l != kUnlabeled; });
}

Dataset load_dataset(const std::filesystem::path& features_path,
                     const std::filesystem::path& meta_path, const FeatureSchema& schema) {
  json meta = load_json(meta_path);
  for (const char* key : {"n", "dim", "families", "labels"})
    if (!meta.contains(key)) throw Error("meta file missing field '" + std::string(key) + "'");
  const int n = meta["n"].get<int>();
  const int dim = meta["dim"].get<int>();
  if (n < 0) throw Error("meta declares negative n");
  if (dim != schema.dim())
    throw Error("dimension mismatch: meta declares dim=" + std::to_string(dim) +
                ", schema has dim=" + std::to_string(schema.dim()));

  Dataset ds;
  ds.features = read_f32_matrix(features_path, n, dim);
  ds.families = meta["families"].get<std::vector<std::string>>();
  ds.labels = meta["labels"].get<std::vector<int>>();
  if (static_cast<int>(ds.labels.size()) != n)
    throw Error("meta labels length " + std::to_string(ds.labels.size()) + " != n=" +
                std::to_string(n));
  const int f = ds.num_families();
  for (int i = 0; i < n; ++i) {
    const int l = ds.labels[static_cast<std::size_t>(i)];
    if (l != kUnlabeled && (l < 0 || l >= f))
      throw Error("row " + std::to_string(i) + " names unknown family id " + std::to_string(l) +
                  " (vocabulary has " + std::to_string(f) + ")");
  }
  if (meta.contains("timestamps") && !meta["timestamps"].is_null()) {
    ds.timestamps = meta["timestamps"].get<std::vector<std::string>>();
    if (static_cast<int>(ds.timestamps.size()) != n)
      throw Error("meta timestamps length != n");
    ds.timestamps_epoch.reserve(ds.timestamps.size());
    for (const auto& t : ds.timestamps) ds.timestamps_epoch.push_back(parse_iso8601(t));
  }
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < dim; ++c)
      if (!std::isfinite(ds.features(r, c)))
        throw Error("non-finite feature at row " + std::to_string(r) + ", column " +
                    std::to_string(c));
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& features_path,
                  const std::filesystem::path& meta_path) {
  write_f32_matrix(features_path, ds.features);
  json meta{{"n", ds.n()}, {"dim", ds.dim()}, {"families", ds.families}, {"labels", ds.labels}};
  if (!ds.timestamps.empty()) meta["timestamps"] = ds.timestamps;
  save_json(meta_path, meta);
}

StandardizationParams fit_standardizer(const MatXf& features, const std::vector<int>& fit_rows) {
  if (fit_rows.empty()) throw Error("fit_standardizer needs a non-empty row set");
  const Eigen::Index dim = features.cols();
  VecXd mean = VecXd::Zero(dim);
  for (int r : fit_rows) mean += features.row(r).cast<double>().transpose();
  mean /= static_cast<double>(fit_rows.size());
  VecXd var = VecXd::Zero(dim);
  for (int r : fit_rows) {
    VecXd d = features.row(r).cast<double>().transpose() - mean;
    var += d.cwiseProduct(d);
  }
  var /= static_cast<double>(fit_rows.size());
  StandardizationParams p;
  p.mean = mean.cast<float>();
  p.std = var.cwiseSqrt().cast<float>();
  for (Eigen::Index j = 0; j < dim; ++j)
    if (p.std(j) == 0.0f) p.std(j) = 1.0f;
  return p;
}

MatXf apply_standardizer(const MatXf& features, const StandardizationParams& params) {
  if (features.cols() != params.mean.size() || features.cols() != params.std.size())
    throw Error("apply_standardizer: shape mismatch");
  MatXf out = features;
  out.rowwise() -= params.mean.transpose();
  out.array().rowwise() /= params.std.transpose().array();
  return out;
}

std::vector<bool> select_labeled_subset(const Dataset& dataset, double fraction,
                                        std::uint64_t seed) {
  if (!dataset.fully_labeled()) throw Error("select_labeled_subset needs a fully labeled dataset");
  const int n = dataset.n();
  const int f = dataset.num_families();
  if (fraction <= 0.0 || fraction > 1.0) throw Error("fraction must be in (0, 1]");
  if (fraction * n < static_cast<double>(f))
    throw Error("fraction*n = " + std::to_string(fraction * n) + " cannot cover " +
                std::to_string(f) + " families");
  const int target = static_cast<int>(std::ceil(fraction * n));

  std::vector<std::vector<int>> by_family(static_cast<std::size_t>(f));
  for (int r = 0; r < n; ++r)
    by_family[static_cast<std::size_t>(dataset.labels[static_cast<std::size_t>(r)])].push_back(r);
  for (int fam = 0; fam < f; ++fam)
    if (by_family[static_cast<std::size_t>(fam)].empty())
      throw Error("family id " + std::to_string(fam) + " has no rows");

  Rng rng(seed);
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  int marked = 0;
  for (int fam = 0; fam < f; ++fam) {
    const auto& rows = by_family[static_cast<std::size_t>(fam)];
    mask[static_cast<std::size_t>(rows[static_cast<std::size_t>(rng.index(
        static_cast<int>(rows.size())))])] = true;
    ++marked;
  }
  std::vector<int> rest;
  rest.reserve(static_cast<std::size_t>(n - marked));
  for (int r = 0; r < n; ++r)
    if (!mask[static_cast<std::size_t>(r)]) rest.push_back(r);
  const int extra = target - marked;
  if (extra > 0) {
    auto picks = rng.sample_without_replacement(static_cast<int>(rest.size()), extra);
    for (int p : picks) mask[static_cast<std::size_t>(rest[static_cast<std::size_t>(p)])] = true;
  }
  return mask;
}

}  // namespace malmixer
