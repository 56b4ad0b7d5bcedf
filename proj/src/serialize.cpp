#include "malmixer/serialize.hpp"

#include <fstream>
#include <numeric>

namespace malmixer {

namespace {
long shape_size(const std::vector<long>& shape) {
  return std::accumulate(shape.begin(), shape.end(), 1L, std::multiplies<long>());
}
}  // namespace

void TensorPack::save(const std::filesystem::path& manifest_path, json manifest) const {
  json tensors = json::array();
  for (const auto& e : entries_) tensors.push_back({{"name", e.name}, {"shape", e.shape}});
  manifest["tensors"] = tensors;
  manifest["dtype"] = "float32-le";
  manifest["weights_file"] = manifest_path.filename().string() + ".weights";
  save_json(manifest_path, manifest);

  const auto weights_path = manifest_path.string() + ".weights";
  std::ofstream f(weights_path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + weights_path);
  f.write(reinterpret_cast<const char*>(data_.data()),
          static_cast<std::streamsize>(sizeof(float) * data_.size()));
  if (!f) throw Error("short write on " + weights_path);
}

TensorPack TensorPack::load(const std::filesystem::path& manifest_path, json* manifest_out) {
  json manifest = load_json(manifest_path);
  if (manifest.value("dtype", "") != "float32-le")
    throw Error(manifest_path.string() + ": unsupported dtype");
  TensorPack pack;
  long total = 0;
  for (const auto& t : manifest.at("tensors")) {
    Entry e{t.at("name").get<std::string>(), t.at("shape").get<std::vector<long>>()};
    total += shape_size(e.shape);
    pack.entries_.push_back(std::move(e));
  }
  const auto weights_path =
      manifest_path.parent_path() / manifest.at("weights_file").get<std::string>();
  std::ifstream f(weights_path, std::ios::binary | std::ios::ate);
  if (!f) throw Error("cannot open " + weights_path.string());
  const auto bytes = static_cast<long>(f.tellg());
  if (bytes != total * static_cast<long>(sizeof(float)))
    throw Error(weights_path.string() + " holds " + std::to_string(bytes) + " bytes, manifest expects " +
                std::to_string(total * static_cast<long>(sizeof(float))));
  pack.data_.resize(static_cast<std::size_t>(total));
  f.seekg(0);
  f.read(reinterpret_cast<char*>(pack.data_.data()), bytes);
  if (!f) throw Error("short read on " + weights_path.string());
  if (manifest_out != nullptr) *manifest_out = std::move(manifest);
  return pack;
}

const TensorPack::Entry& TensorPack::find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e;
  throw Error("tensor pack has no entry '" + name + "'");
}

bool TensorPack::has(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return true;
  return false;
}

std::size_t TensorPack::offset_of(const Entry& target) const {
  std::size_t off = 0;
  for (const auto& e : entries_) {
    if (&e == &target) return off;
    off += static_cast<std::size_t>(shape_size(e.shape));
  }
  throw Error("tensor entry not in pack");
}

MatXf TensorPack::mat(const std::string& name) const {
  const Entry& e = find(name);
  if (e.shape.size() != 2) throw Error("tensor '" + name + "' is not 2-d");
  MatXf m(e.shape[0], e.shape[1]);
  std::copy_n(data_.data() + offset_of(e), m.size(), m.data());
  return m;
}

VecXf TensorPack::vec(const std::string& name) const {
  const Entry& e = find(name);
  if (e.shape.size() != 1) throw Error("tensor '" + name + "' is not 1-d");
  VecXf v(e.shape[0]);
  std::copy_n(data_.data() + offset_of(e), v.size(), v.data());
  return v;
}

nn::Mlp<float> TensorPack::mlp(const std::string& prefix, int layer_count,
                               float negative_slope) const {
  nn::Mlp<float> net;
  net.negative_slope = negative_slope;
  for (int l = 0; l < layer_count; ++l) {
    nn::Linear<float> layer;
    const std::string base = prefix + "." + std::to_string(l);
    layer.weight = mat(base + ".weight");
    if (has(base + ".bias")) layer.bias = vec(base + ".bias");
    net.layers.push_back(std::move(layer));
  }
  return net;
}

}  // namespace malmixer
