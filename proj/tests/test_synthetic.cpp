#include "malmixer/synthetic.hpp"

#include <doctest.h>

#include <set>

using namespace malmixer;

TEST_CASE("generator is deterministic per seed and shaped per spec") {
  SyntheticSpec spec;
  spec.families = 3;
  spec.per_family = 20;
  spec.interp_dims = 8;
  spec.code_dims = 4;
  spec.seed = 17;
  auto a = generate_synthetic(spec);
  auto b = generate_synthetic(spec);
  CHECK(a.dataset.features == b.dataset.features);
  CHECK(a.dataset.n() == 60);
  CHECK(a.dataset.dim() == 12);
  CHECK(a.dataset.num_families() == 3);
  CHECK(a.centroids.rows() == 3);
  CHECK(a.schema.interpolatable().size() == 8);
  CHECK(a.dataset.fully_labeled());

  spec.seed = 18;
  auto c = generate_synthetic(spec);
  CHECK(a.dataset.features != c.dataset.features);
}

TEST_CASE("family means respect the configured separation") {
  SyntheticSpec spec;
  spec.families = 4;
  spec.per_family = 50;
  spec.interp_dims = 8;
  spec.code_dims = 4;
  spec.separation = 6.0;
  spec.sigma = 1.5;
  auto data = generate_synthetic(spec);
  for (int f = 0; f < 4; ++f)
    for (int g = f + 1; g < 4; ++g) {
      const double d = (data.centroids.row(f).head(8) - data.centroids.row(g).head(8))
                           .cast<double>()
                           .norm();
      CHECK(d >= 6.0 * 1.5 - 1e-4);
    }
}

TEST_CASE("codebooks introduce duplicate non-interpolatable rows") {
  SyntheticSpec spec;
  spec.families = 2;
  spec.per_family = 100;
  spec.interp_dims = 4;
  spec.code_dims = 3;
  spec.codes_per_family = 4;
  auto data = generate_synthetic(spec);
  std::set<std::array<float, 3>> distinct;
  for (int r = 0; r < data.dataset.n(); ++r) {
    std::array<float, 3> code{data.dataset.features(r, 4), data.dataset.features(r, 5),
                              data.dataset.features(r, 6)};
    distinct.insert(code);
  }
  CHECK(distinct.size() == 8);  // 2 families x 4 codes, heavily reused
}

TEST_CASE("per-family interpolatable sample means sit near the declared centroids") {
  SyntheticSpec spec;
  spec.families = 3;
  spec.per_family = 400;
  spec.interp_dims = 6;
  spec.code_dims = 2;
  auto data = generate_synthetic(spec);
  for (int f = 0; f < 3; ++f) {
    VecXd mean = VecXd::Zero(6);
    int count = 0;
    for (int r = 0; r < data.dataset.n(); ++r) {
      if (data.dataset.labels[static_cast<std::size_t>(r)] != f) continue;
      mean += data.dataset.features.row(r).head(6).cast<double>().transpose();
      ++count;
    }
    mean /= count;
    const double err =
        (mean - data.centroids.row(f).head(6).cast<double>().transpose()).norm();
    CHECK(err < 0.35);  // sigma/sqrt(400) per dim, generous headroom
  }
}

TEST_CASE("nearest_centroid assigns generated rows to their own family") {
  SyntheticSpec spec;
  spec.families = 5;
  spec.per_family = 100;
  spec.separation = 8.0;
  auto data = generate_synthetic(spec);
  auto assign = nearest_centroid(data.dataset.features, data.centroids);
  int agree = 0;
  for (int r = 0; r < data.dataset.n(); ++r)
    agree += (assign[static_cast<std::size_t>(r)] == data.dataset.labels[static_cast<std::size_t>(r)]);
  CHECK(static_cast<double>(agree) / data.dataset.n() > 0.95);
}

TEST_CASE("spec validation") {
  SyntheticSpec spec;
  spec.families = 1;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = SyntheticSpec{};
  spec.families = 20;
  spec.interp_dims = 16;
  CHECK_THROWS_AS(spec.validate(), ConfigError);  // one-hot layout needs families <= dims
}
