#include "malmixer/synthetic.hpp"

#include "malmixer/rng.hpp"

#include <cmath>

namespace malmixer {

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const int dim = spec.interp_dims + spec.code_dims;
  const int n = spec.families * spec.per_family;
  Rng rng(spec.seed);

  // One-hot family means scaled so pairwise distance is exactly
  // separation * sigma.
  const double scale = spec.separation * spec.sigma / std::sqrt(2.0);
  MatXf means = MatXf::Zero(spec.families, spec.interp_dims);
  for (int f = 0; f < spec.families; ++f) means(f, f) = static_cast<float>(scale);

  // Per-family codebooks around a shared center, so raw code geometry does
  // not separate families; the family signal lives in code identity.
  std::vector<MatXf> codebooks;
  codebooks.reserve(static_cast<std::size_t>(spec.families));
  for (int f = 0; f < spec.families; ++f) {
    MatXf codes(spec.codes_per_family, spec.code_dims);
    for (int c = 0; c < spec.codes_per_family; ++c)
      for (int d = 0; d < spec.code_dims; ++d)
        codes(c, d) = static_cast<float>(spec.code_scale * rng.normal());
    codebooks.push_back(std::move(codes));
  }

  SyntheticData out{Dataset{}, FeatureSchema(dim, [&] {
                      std::vector<int> interp(static_cast<std::size_t>(spec.interp_dims));
                      for (int j = 0; j < spec.interp_dims; ++j) interp[static_cast<std::size_t>(j)] = j;
                      return interp;
                    }()),
                    MatXf(), {}};
  out.dataset.features.resize(n, dim);
  out.dataset.labels.resize(static_cast<std::size_t>(n));
  out.code_choice.resize(static_cast<std::size_t>(n));
  for (int f = 0; f < spec.families; ++f) {
    char name[16];
    std::snprintf(name, sizeof name, "fam%02d", f);
    out.dataset.families.emplace_back(name);
  }

  int row = 0;
  for (int f = 0; f < spec.families; ++f) {
    for (int s = 0; s < spec.per_family; ++s, ++row) {
      for (int d = 0; d < spec.interp_dims; ++d)
        out.dataset.features(row, d) =
            means(f, d) + static_cast<float>(spec.sigma * rng.normal());
      const int code = rng.index(spec.codes_per_family);
      out.code_choice[static_cast<std::size_t>(row)] = code;
      out.dataset.features.row(row).tail(spec.code_dims) =
          codebooks[static_cast<std::size_t>(f)].row(code);
      out.dataset.labels[static_cast<std::size_t>(row)] = f;
    }
  }

  out.centroids.resize(spec.families, dim);
  for (int f = 0; f < spec.families; ++f) {
    out.centroids.row(f).head(spec.interp_dims) = means.row(f);
    out.centroids.row(f).tail(spec.code_dims) =
        codebooks[static_cast<std::size_t>(f)].colwise().mean();
  }
  return out;
}

std::vector<int> nearest_centroid(const MatXf& samples, const MatXf& centroids) {
  if (samples.cols() != centroids.cols()) throw Error("nearest_centroid: dim mismatch");
  std::vector<int> out(static_cast<std::size_t>(samples.rows()));
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const double d = (samples.row(r) - centroids.row(c)).cast<double>().squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    out[static_cast<std::size_t>(r)] = best;
  }
  return out;
}

}  // namespace malmixer
