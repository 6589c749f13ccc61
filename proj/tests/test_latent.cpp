#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vacgan/latent.hpp"

using namespace vacgan;

TEST_CASE("classify_latent sign rules") {
  LatentSpec spec{4, 0};
  CHECK(classify_latent(spec, Tensor({4}, {-0.3, 1.0, 2.0, 3.0})) == 0);
  CHECK(classify_latent(spec, Tensor({4}, {2.1, -1.0, 0.0, 0.0})) == 1);
  CHECK_THROWS_AS(classify_latent(spec, Tensor({4}, {0.0, 1.0, 1.0, 1.0})), Boundary);
}

TEST_CASE("samples land in the requested half-space and round-trip") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    LatentSpec spec{8, 0};
    for (int label = 0; label < 2; ++label) {
      const Tensor z = sample_latent(spec, label, 50, rng);
      REQUIRE(z.shape() == std::vector<std::size_t>{50, 8});
      for (std::size_t i = 0; i < 50; ++i) {
        const double z0 = z.at2(i, 0);
        CHECK((label == 0 ? z0 < 0.0 : z0 > 0.0));
        Tensor row({8});
        for (std::size_t d = 0; d < 8; ++d) row[d] = z.at2(i, d);
        CHECK(classify_latent(spec, row) == label);
      }
    }
  }
}

TEST_CASE("disjointness: every nonzero vector is claimed by exactly one class") {
  LatentSpec spec{2, 0};
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    double v = rng.normal();
    while (v == 0.0) v = rng.normal();
    const int c = classify_latent(spec, Tensor({2}, {v, rng.normal()}));
    CHECK((c == 0 || c == 1));
    CHECK(c == (v < 0.0 ? 0 : 1));
  }
}

TEST_CASE("pooled partition coordinate keeps standard-normal moments") {
  LatentSpec spec{4, 0};
  Rng rng(123);
  const std::size_t n = 5000;  // per class, 10^4 pooled
  const Tensor z0 = sample_latent(spec, 0, n, rng);
  const Tensor z1 = sample_latent(spec, 1, n, rng);
  double mean = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean += z0.at2(i, 0) + z1.at2(i, 0);
    sq += z0.at2(i, 0) * z0.at2(i, 0) + z1.at2(i, 0) * z1.at2(i, 0);
  }
  mean /= static_cast<double>(2 * n);
  const double var = sq / static_cast<double>(2 * n) - mean * mean;
  CHECK(std::fabs(mean) < 0.05);
  CHECK(std::fabs(var - 1.0) < 0.1);
}

TEST_CASE("invalid specs are rejected") {
  Rng rng(0);
  CHECK_THROWS_AS(sample_latent(LatentSpec{0, 0}, 0, 1, rng), InvalidConfig);
  CHECK_THROWS_AS(sample_latent(LatentSpec{4, 7}, 0, 1, rng), InvalidConfig);
  CHECK_THROWS_AS(sample_latent(LatentSpec{4, 0}, 2, 1, rng), InvalidConfig);
}
