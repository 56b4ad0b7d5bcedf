#include "malmixer/classifier.hpp"

#include "malmixer/serialize.hpp"

namespace malmixer {

void save_classifier(const FCResNet& net, const std::filesystem::path& manifest_path) {
  const auto& c = net.config;
  json meta{{"kind", "fc_resnet"},
            {"config",
             {{"input_dim", c.input_dim},
              {"stem_dim", c.stem_dim},
              {"group_dims", c.group_dims},
              {"blocks_per_group", c.blocks_per_group},
              {"negative_slope", c.negative_slope},
              {"num_classes", c.num_classes},
              {"seed", c.seed}}}};
  TensorPack pack;
  pack.add("stem.weight", net.stem.weight);
  pack.add("stem.bias", net.stem.bias);
  for (std::size_t i = 0; i < net.blocks.size(); ++i) {
    const auto& b = net.blocks[i];
    const std::string base = "block." + std::to_string(i);
    pack.add(base + ".l1.weight", b.l1.weight);
    pack.add(base + ".l1.bias", b.l1.bias);
    pack.add(base + ".l2.weight", b.l2.weight);
    pack.add(base + ".l2.bias", b.l2.bias);
    if (b.has_proj) pack.add(base + ".proj.weight", b.proj.weight);
  }
  pack.add("head.weight", net.head.weight);
  pack.add("head.bias", net.head.bias);
  pack.save(manifest_path, std::move(meta));
}

FCResNet load_classifier(const std::filesystem::path& manifest_path) {
  json manifest;
  TensorPack pack = TensorPack::load(manifest_path, &manifest);
  if (manifest.value("kind", "") != "fc_resnet")
    throw Error(manifest_path.string() + " is not a classifier model");
  const json& jc = manifest.at("config");
  FCResNetConfig c;
  c.input_dim = jc.at("input_dim").get<int>();
  c.stem_dim = jc.at("stem_dim").get<int>();
  c.group_dims = jc.at("group_dims").get<std::vector<int>>();
  c.blocks_per_group = jc.at("blocks_per_group").get<int>();
  c.negative_slope = jc.at("negative_slope").get<float>();
  c.num_classes = jc.at("num_classes").get<int>();
  c.seed = jc.at("seed").get<std::uint64_t>();

  FCResNet net = FCResNet::init(c);
  net.stem.weight = pack.mat("stem.weight");
  net.stem.bias = pack.vec("stem.bias");
  for (std::size_t i = 0; i < net.blocks.size(); ++i) {
    auto& b = net.blocks[i];
    const std::string base = "block." + std::to_string(i);
    b.l1.weight = pack.mat(base + ".l1.weight");
    b.l1.bias = pack.vec(base + ".l1.bias");
    b.l2.weight = pack.mat(base + ".l2.weight");
    b.l2.bias = pack.vec(base + ".l2.bias");
    if (b.has_proj) b.proj.weight = pack.mat(base + ".proj.weight");
  }
  net.head.weight = pack.mat("head.weight");
  net.head.bias = pack.vec("head.bias");
  return net;
}

}  // namespace malmixer
