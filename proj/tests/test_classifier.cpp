#include "malmixer/classifier.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>

using namespace malmixer;

namespace {

FCResNetConfig tiny_config() {
  FCResNetConfig c;
  c.input_dim = 6;
  c.stem_dim = 8;
  c.group_dims = {8, 4};
  c.blocks_per_group = 1;
  c.num_classes = 3;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("config invariants") {
  FCResNetConfig c = tiny_config();
  c.group_dims = {8, 16};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = tiny_config();
  c.blocks_per_group = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = tiny_config();
  c.stem_dim = 4;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("projections appear exactly at group transitions") {
  FCResNetConfig c;
  c.input_dim = 10;
  c.stem_dim = 8;
  c.group_dims = {8, 6, 6};
  c.blocks_per_group = 2;
  c.num_classes = 4;
  auto net = FCResNet::init(c);
  REQUIRE(net.blocks.size() == 6);
  CHECK_FALSE(net.blocks[0].has_proj);
  CHECK_FALSE(net.blocks[1].has_proj);
  CHECK(net.blocks[2].has_proj);  // 8 -> 6
  CHECK_FALSE(net.blocks[3].has_proj);
  CHECK_FALSE(net.blocks[4].has_proj);  // 6 -> 6 repeated group width
  CHECK_FALSE(net.blocks[5].has_proj);
  CHECK_FALSE(net.blocks[2].proj.has_bias());  // bias-free projection
}

TEST_CASE("forward shapes, determinism, zero head") {
  auto net = FCResNet::init(tiny_config());
  MatXf x(7, 6);
  x.setRandom();
  MatXf logits = net.forward(x);
  CHECK(logits.rows() == 7);
  CHECK(logits.cols() == 3);
  CHECK(net.forward(x) == logits);  // bit-identical

  net.head.set_zero();
  MatXf p = net.predict_proba(x);
  for (Eigen::Index r = 0; r < p.rows(); ++r)
    for (Eigen::Index c = 0; c < 3; ++c) CHECK(p(r, c) == doctest::Approx(1.0 / 3));

  MatXf bad(2, 5);
  CHECK_THROWS_AS(net.forward(bad), Error);
}

TEST_CASE("zeroed block collapses to identity or pure projection") {
  auto net = FCResNet::init(tiny_config());
  for (auto& b : net.blocks) {
    b.l1.set_zero();
    b.l2.set_zero();
  }
  // With both linears zeroed, each block passes proj(in) through; group one is
  // identity, the transition applies only the projection.
  MatXf x(1, 6);
  x << 1, -1, 2, -2, 3, -3;
  MatXf stem_out = nn::linear_forward(net.stem, x);
  MatXf after_transition = stem_out * net.blocks[1].proj.weight.transpose();
  MatXf expect = nn::linear_forward(net.head, after_transition);
  CHECK((net.forward(x) - expect).cwiseAbs().maxCoeff() < 1e-6f);
}

TEST_CASE("softmax values, shift invariance, and simplex rows") {
  MatXf logits(2, 2);
  logits << 0.f, 0.f, std::log(2.f), 0.f;
  MatXf p = softmax_rows(logits);
  CHECK(p(0, 0) == doctest::Approx(0.5));
  CHECK(p(1, 0) == doctest::Approx(2.0 / 3));
  CHECK(p(1, 1) == doctest::Approx(1.0 / 3));

  MatXf shifted = logits;
  shifted.array() += 123.0f;
  MatXf q = softmax_rows(shifted);
  CHECK((p - q).cwiseAbs().maxCoeff() < 1e-6f);

  Rng rng(6);
  MatXf wild(50, 5);
  for (Eigen::Index r = 0; r < wild.rows(); ++r)
    for (Eigen::Index c = 0; c < wild.cols(); ++c)
      wild(r, c) = static_cast<float>(rng.normal() * 20);
  MatXf probs = softmax_rows(wild);
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    CHECK(probs.row(r).minCoeff() >= 0.0f);
    CHECK(std::abs(probs.row(r).sum() - 1.0f) < 1e-6f);
  }
}

TEST_CASE("predict breaks argmax ties toward the smaller id") {
  auto net = FCResNet::init(tiny_config());
  net.head.set_zero();  // all logits zero -> every class ties
  MatXf x(3, 6);
  x.setRandom();
  auto preds = net.predict(x);
  for (int p : preds) CHECK(p == 0);
}

TEST_CASE("cross-entropy gradients match central finite differences") {
  FCResNetConfig c;
  c.input_dim = 6;
  c.stem_dim = 8;
  c.group_dims = {8, 4};
  c.blocks_per_group = 1;
  c.num_classes = 3;
  c.seed = 11;
  auto net = FCResNetT<double>::init(c);

  Rng rng(77);
  MatX<double> x(5, 6);
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index col = 0; col < x.cols(); ++col) x(r, col) = rng.normal();
  std::vector<int> labels = {0, 2, 1, 1, 0};
  MatX<double> y = MatX<double>::Zero(5, 3);
  for (int r = 0; r < 5; ++r) y(r, labels[static_cast<std::size_t>(r)]) = 1.0;

  auto grads = net.zeros_like();
  FCResNetT<double>::Cache cache;
  MatX<double> probs = softmax_rows(net.forward_cached(x, cache));
  net.backward(cache, soft_cross_entropy_grad_logits(probs, y), grads);

  auto loss = [&] { return soft_cross_entropy(softmax_rows(net.forward(x)), y); };
  const double worst =
      oracles::worst_grad_error(net.param_ptrs(), grads.param_ptrs(), loss);
  INFO("worst slack " << worst);
  CHECK(worst <= 0.0);
}

TEST_CASE("brier gradients match central finite differences") {
  FCResNetConfig c = tiny_config();
  c.seed = 12;
  auto net = FCResNetT<double>::init(c);
  Rng rng(78);
  MatX<double> x(4, 6);
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index col = 0; col < x.cols(); ++col) x(r, col) = rng.normal();
  MatX<double> y(4, 3);
  for (int r = 0; r < 4; ++r) {
    double a = rng.uniform(), b = rng.uniform(), cc = rng.uniform();
    const double s = a + b + cc;
    y(r, 0) = a / s;
    y(r, 1) = b / s;
    y(r, 2) = cc / s;
  }
  auto grads = net.zeros_like();
  FCResNetT<double>::Cache cache;
  MatX<double> probs = softmax_rows(net.forward_cached(x, cache));
  net.backward(cache, brier_grad_logits(probs, y), grads);
  auto loss = [&] { return brier_loss(softmax_rows(net.forward(x)), y); };
  const double worst =
      oracles::worst_grad_error(net.param_ptrs(), grads.param_ptrs(), loss);
  INFO("worst slack " << worst);
  CHECK(worst <= 0.0);
}

TEST_CASE("classifier persistence round-trips bit-exactly") {
  auto net = FCResNet::init(tiny_config());
  auto dir = std::filesystem::temp_directory_path() / "malmixer_clf_test";
  std::filesystem::create_directories(dir);
  save_classifier(net, dir / "clf.json");
  FCResNet back = load_classifier(dir / "clf.json");
  CHECK(back.stem.weight == net.stem.weight);
  CHECK(back.head.bias == net.head.bias);
  REQUIRE(back.blocks.size() == net.blocks.size());
  for (std::size_t i = 0; i < back.blocks.size(); ++i) {
    CHECK(back.blocks[i].l1.weight == net.blocks[i].l1.weight);
    CHECK(back.blocks[i].l2.weight == net.blocks[i].l2.weight);
    if (net.blocks[i].has_proj) CHECK(back.blocks[i].proj.weight == net.blocks[i].proj.weight);
  }
  MatXf x(3, 6);
  x.setRandom();
  CHECK(back.forward(x) == net.forward(x));
}
