#include "malmixer/knn.hpp"

#include "malmixer/io.hpp"

#include <algorithm>
#include <set>

namespace malmixer {

L2Index::L2Index(MatXf vectors, std::vector<int> ids)
    : vectors_(std::move(vectors)), ids_(std::move(ids)) {
  if (vectors_.rows() == 0) throw Error("index needs at least one vector");
  if (static_cast<Eigen::Index>(ids_.size()) != vectors_.rows())
    throw Error("index: id count != vector count");
  int max_id = 0;
  std::set<int> seen;
  for (int id : ids_) {
    if (id < 0) throw Error("index ids must be non-negative");
    if (!seen.insert(id).second) throw Error("duplicate index id " + std::to_string(id));
    max_id = std::max(max_id, id);
  }
  id_to_row_.assign(static_cast<std::size_t>(max_id) + 1, -1);
  for (std::size_t r = 0; r < ids_.size(); ++r)
    id_to_row_[static_cast<std::size_t>(ids_[r])] = static_cast<int>(r);
}

Eigen::Ref<const Eigen::RowVectorXf> L2Index::row_by_id(int id) const {
  if (id < 0 || id >= static_cast<int>(id_to_row_.size()) ||
      id_to_row_[static_cast<std::size_t>(id)] < 0)
    throw Error("index has no id " + std::to_string(id));
  return vectors_.row(id_to_row_[static_cast<std::size_t>(id)]);
}

std::vector<Neighbor> L2Index::query_topk(Eigen::Ref<const Eigen::RowVectorXf> q, int k,
                                          std::optional<int> exclude) const {
  if (q.size() != vectors_.cols()) throw Error("query dim != index dim");
  const int m = size();
  const int effective = m - (exclude.has_value() ? 1 : 0);
  if (k < 1 || k > effective)
    throw Error("k=" + std::to_string(k) + " outside [1, " + std::to_string(effective) + "]");

  std::vector<Neighbor> all;
  all.reserve(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) {
    const int id = ids_[static_cast<std::size_t>(r)];
    if (exclude && id == *exclude) continue;
    double d = 0.0;
    const float* a = vectors_.row(r).data();
    const float* b = q.data();
    for (Eigen::Index c = 0; c < vectors_.cols(); ++c) {
      const double diff = static_cast<double>(a[c]) - static_cast<double>(b[c]);
      d += diff * diff;
    }
    all.push_back({id, d});
  }
  auto by_dist_then_id = [](const Neighbor& x, const Neighbor& y) {
    return x.dist_sq != y.dist_sq ? x.dist_sq < y.dist_sq : x.id < y.id;
  };
  std::partial_sort(all.begin(), all.begin() + k, all.end(), by_dist_then_id);
  all.resize(static_cast<std::size_t>(k));
  return all;
}

L2Index build_index(MatXf vectors, std::vector<int> ids) {
  return L2Index(std::move(vectors), std::move(ids));
}

std::vector<std::vector<int>> knn_graph(const MatXf& vectors, const std::vector<int>& ids,
                                        int k) {
  if (vectors.rows() <= k)
    throw Error("knn_graph needs more than k=" + std::to_string(k) + " rows");
  L2Index index(vectors, ids);
  const int m = index.size();
  std::vector<std::vector<int>> graph(static_cast<std::size_t>(m));
  parallel_for_rows(m, [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      auto res = index.query_topk(vectors.row(r), k, ids[static_cast<std::size_t>(r)]);
      auto& row = graph[static_cast<std::size_t>(r)];
      row.reserve(res.size());
      for (const auto& nb : res) row.push_back(nb.id);
    }
  });
  return graph;
}

void L2Index::save(const std::filesystem::path& manifest_path) const {
  json manifest{{"kind", "l2_index"},
                {"rows", size()},
                {"dim", dim()},
                {"ids", ids_},
                {"dtype", "float32-le"},
                {"vectors_file", manifest_path.filename().string() + ".f32"}};
  save_json(manifest_path, manifest);
  write_f32_matrix(manifest_path.string() + ".f32", vectors_);
}

L2Index L2Index::load(const std::filesystem::path& manifest_path) {
  json manifest = load_json(manifest_path);
  if (manifest.value("kind", "") != "l2_index")
    throw Error(manifest_path.string() + " is not an index manifest");
  auto ids = manifest["ids"].get<std::vector<int>>();
  auto vectors =
      read_f32_matrix(manifest_path.parent_path() / manifest["vectors_file"].get<std::string>(),
                      manifest["rows"].get<int>(), manifest["dim"].get<int>());
  return L2Index(std::move(vectors), std::move(ids));
}

}  // namespace malmixer
