#pragma once

#include "malmixer/schema.hpp"

namespace malmixer {

/// Desk-scale stand-in for an EMBER-style corpus. Interpolatable dims are
/// per-family Gaussians with mean separation expressed as a multiple of
/// sigma (one-hot means, so the first `families` coordinates carry the
/// signal and the rest are shared noise); non-interpolatable dims are drawn
/// from per-family codebooks of real-valued codes, mimicking hashed fields.
struct SyntheticSpec {
  int families = 5;
  int per_family = 500;
  int interp_dims = 16;
  int code_dims = 8;
  double separation = 6.0;    // pairwise family-mean distance, in sigmas
  double sigma = 1.0;
  int codes_per_family = 8;
  double code_scale = 3.0;    // spread of code entries around a shared center
  std::uint64_t seed = 17;

  void validate() const {
    if (families < 2 || per_family < 1) throw ConfigError("need >= 2 families with rows");
    if (interp_dims < 1 || code_dims < 1) throw ConfigError("need both feature blocks");
    if (families > interp_dims) throw ConfigError("one-hot means need families <= interp_dims");
    if (separation <= 0.0 || sigma <= 0.0) throw ConfigError("separation and sigma must be positive");
    if (codes_per_family < 1) throw ConfigError("codes_per_family must be >= 1");
  }
};

struct SyntheticData {
  Dataset dataset;     // raw (unstandardized), fully labeled
  FeatureSchema schema;
  MatXf centroids;     // families x dim, ground-truth family centers (raw space)
  std::vector<int> code_choice;  // which codebook entry each row drew
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Index of the nearest centroid row for each sample row (L2, 64-bit sums).
std::vector<int> nearest_centroid(const MatXf& samples, const MatXf& centroids);

}  // namespace malmixer
