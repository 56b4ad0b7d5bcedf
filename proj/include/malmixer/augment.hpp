#pragma once

#include "malmixer/encoder.hpp"
#include "malmixer/knn.hpp"
#include "malmixer/schema.hpp"

#include <optional>

namespace malmixer {

struct AugmentationConfig {
  int k_neighbors = 5;
  int k_candidates = 5;
  std::optional<float> fixed_alpha;  // draw uniform (0,1) when unset
  std::uint64_t seed = 17;

  void validate() const {
    if (k_neighbors < 1 || k_candidates < 1) throw ConfigError("k_neighbors/k_candidates must be >= 1");
    if (fixed_alpha && (*fixed_alpha < 0.0f || *fixed_alpha > 1.0f))
      throw ConfigError("fixed_alpha must lie in [0, 1]");
  }
};

/// Everything augment_sample needs, built once from a single dataset
/// snapshot: split feature views, frozen encoders, embedding tables, the
/// feature-space neighbor graph, and the H_n retrieval index.
struct AugmentationContext {
  FeatureSchema schema;
  MatXf features;  // standardized, n x dim
  MatXf s_i;       // n x |interpolatable|
  MatXf s_n;       // n x |non_interpolatable|
  InvarianceModel model;
  EmbeddingTables tables;
  std::vector<std::vector<int>> neighbor_graph;  // k_neighbors ids per row
  std::optional<L2Index> hn_index;               // ids are row indices

  int n() const { return static_cast<int>(features.rows()); }
};

AugmentationContext build_augmentation_context(const MatXf& features_std,
                                               const FeatureSchema& schema,
                                               InvarianceModel model,
                                               const AugmentationConfig& config);

/// Elementwise alpha*a + (1-alpha)*b. Coordinates where a == b are unchanged
/// for any alpha.
Eigen::RowVectorXf mix_interpolatable(Eigen::Ref<const Eigen::RowVectorXf> s_i,
                                      Eigen::Ref<const Eigen::RowVectorXf> s_i_prime,
                                      float alpha);

/// Same interpolation in the N-retrieval embedding; must receive the alpha
/// drawn for the interpolatable mix.
Eigen::RowVectorXf mix_embedding(Eigen::Ref<const Eigen::RowVectorXf> h_n,
                                 Eigen::Ref<const Eigen::RowVectorXf> h_n_prime, float alpha);

/// Top-k_candidates rows of H_n nearest to the mixed embedding; self is not
/// excluded, which keeps the alpha=1 identity path intact.
std::vector<int> retrieve_candidates(Eigen::Ref<const Eigen::RowVectorXf> tilde_h_n,
                                     const AugmentationContext& ctx, int k_candidates);

/// Encodes the mixed interpolatable block and picks the candidate whose
/// H_n_sim row lies closest to its sim half (ties to the smaller id).
int align_select(Eigen::Ref<const Eigen::RowVectorXf> tilde_s_i,
                 const std::vector<int>& candidate_ids, const AugmentationContext& ctx);

struct AugmentedSample {
  Eigen::RowVectorXf features;  // dim-vector, schema order
  int source = -1;
  int neighbor = -1;
  float alpha = 0.0f;
  int chosen = -1;  // row whose non-interpolatable block was adopted
};

AugmentedSample augment_sample(int row, const AugmentationContext& ctx,
                               const AugmentationConfig& config, Rng& rng);

struct AugmentedPool {
  int variants = 0;  // m
  MatXf features;    // (n*m) x dim; variant v of row r at index r*m + v
  struct Provenance {
    int source;
    int neighbor;
    float alpha;
    int chosen;
  };
  std::vector<Provenance> provenance;

  Eigen::Ref<const Eigen::RowVectorXf> row(int source, int variant) const {
    return features.row(static_cast<Eigen::Index>(source) * variants + variant);
  }
};

/// m variants per row, each row driven by its own generator seeded from
/// (config.seed, row), so rows are independent and the pool is reproducible.
AugmentedPool augment_pool(const AugmentationContext& ctx, const AugmentationConfig& config,
                           int variants_per_sample);

void save_pool(const AugmentedPool& pool, const std::filesystem::path& features_path,
               const std::filesystem::path& provenance_path);
AugmentedPool load_pool(const std::filesystem::path& features_path,
                        const std::filesystem::path& provenance_path);

}  // namespace malmixer
