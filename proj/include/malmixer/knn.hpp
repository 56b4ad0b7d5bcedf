#pragma once

#include "malmixer/common.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace malmixer {

struct Neighbor {
  int id;
  double dist_sq;  // squared L2, accumulated in 64-bit
};

/// Exact exhaustive L2 index: vectors stored verbatim, every query scans all
/// rows. Ties break toward the smaller id.
class L2Index {
 public:
  L2Index(MatXf vectors, std::vector<int> ids);

  int size() const { return static_cast<int>(vectors_.rows()); }
  int dim() const { return static_cast<int>(vectors_.cols()); }
  const MatXf& vectors() const { return vectors_; }
  const std::vector<int>& ids() const { return ids_; }
  Eigen::Ref<const Eigen::RowVectorXf> row_by_id(int id) const;

  std::vector<Neighbor> query_topk(Eigen::Ref<const Eigen::RowVectorXf> q, int k,
                                   std::optional<int> exclude = std::nullopt) const;

  void save(const std::filesystem::path& manifest_path) const;
  static L2Index load(const std::filesystem::path& manifest_path);

 private:
  MatXf vectors_;
  std::vector<int> ids_;
  std::vector<int> id_to_row_;  // -1 where absent
};

L2Index build_index(MatXf vectors, std::vector<int> ids);

/// k nearest neighbors of every row among the others (self excluded),
/// in (distance, id) order.
std::vector<std::vector<int>> knn_graph(const MatXf& vectors, const std::vector<int>& ids, int k);

}  // namespace malmixer
