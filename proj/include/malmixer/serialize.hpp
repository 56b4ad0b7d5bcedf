#pragma once

#include "malmixer/io.hpp"
#include "malmixer/nn.hpp"

#include <string>
#include <vector>

namespace malmixer {

/// Flat named-tensor pack behind every model file: a JSON manifest listing
/// tensor names and shapes, plus one little-endian float32 blob holding the
/// tensors back to back in manifest order. Round-trips are bit-exact.
class TensorPack {
 public:
  void add(const std::string& name, const MatXf& m) {
    entries_.push_back({name, {static_cast<long>(m.rows()), static_cast<long>(m.cols())}});
    data_.insert(data_.end(), m.data(), m.data() + m.size());
  }
  void add(const std::string& name, const VecXf& v) {
    entries_.push_back({name, {static_cast<long>(v.size())}});
    data_.insert(data_.end(), v.data(), v.data() + v.size());
  }
  void add_mlp(const std::string& prefix, const nn::Mlp<float>& net) {
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      add(prefix + "." + std::to_string(l) + ".weight", net.layers[l].weight);
      if (net.layers[l].has_bias()) add(prefix + "." + std::to_string(l) + ".bias", net.layers[l].bias);
    }
  }

  /// manifest gains {tensors, dtype, weights_file}; blob lands next to it.
  void save(const std::filesystem::path& manifest_path, json manifest) const;

  static TensorPack load(const std::filesystem::path& manifest_path, json* manifest_out);

  MatXf mat(const std::string& name) const;
  VecXf vec(const std::string& name) const;
  bool has(const std::string& name) const;
  nn::Mlp<float> mlp(const std::string& prefix, int layer_count, float negative_slope) const;

 private:
  struct Entry {
    std::string name;
    std::vector<long> shape;
  };
  const Entry& find(const std::string& name) const;
  std::size_t offset_of(const Entry& e) const;

  std::vector<Entry> entries_;
  std::vector<float> data_;
};

}  // namespace malmixer
