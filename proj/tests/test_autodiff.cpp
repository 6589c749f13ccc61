#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "vacgan/rng.hpp"
#include "vacgan/tape.hpp"

using namespace vacgan;

namespace {

Tensor random_tensor(const std::vector<std::size_t>& shape, Rng& rng, double lo = -2.0,
                     double hi = 2.0) {
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// Values bounded away from zero, for kinked primitives (relu, abs, maxpool).
Tensor random_nonzero_tensor(const std::vector<std::size_t>& shape, Rng& rng) {
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    t[i] = sign * rng.uniform(0.2, 2.0);
  }
  return t;
}

}  // namespace

TEST_CASE("forward primitive golden values") {
  Tape tape;
  CHECK(tape.value(sigmoid(tape.leaf(Tensor::scalar(0.0)))).item() == doctest::Approx(0.5));
  CHECK(tape.value(elu(tape.leaf(Tensor::scalar(-1.0)))).item() ==
        doctest::Approx(std::exp(-1.0) - 1.0).epsilon(1e-12));
  Var pooled = maxpool2x2(tape.leaf(Tensor({1, 1, 2, 2}, {1, 2, 3, 4})));
  CHECK(tape.value(pooled).size() == 1);
  CHECK(tape.value(pooled)[0] == 4.0);
  CHECK(tape.value(tanh_(tape.leaf(Tensor::scalar(0.0)))).item() == 0.0);
}

TEST_CASE("backward golden values") {
  SUBCASE("sigmoid derivative at 0") {
    Tape tape;
    Var x = tape.leaf(Tensor::scalar(0.0));
    tape.backward(sigmoid(x));
    CHECK(tape.grad(x)[0] == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("product rule leaf case") {
    Tape tape;
    Var x = tape.leaf(Tensor::scalar(2.0));
    Var y = tape.leaf(Tensor::scalar(3.0));
    tape.backward(mul(x, y));
    CHECK(tape.grad(x)[0] == 3.0);
    CHECK(tape.grad(y)[0] == 2.0);
  }
}

TEST_CASE("backward error contracts") {
  Tape tape;
  Var x = tape.leaf(Tensor({2}, {1.0, 2.0}));
  CHECK_THROWS_AS(tape.backward(square(x)), NotScalar);
  Tape other;
  Var y = other.leaf(Tensor::scalar(1.0));
  CHECK_THROWS_AS(tape.backward(y), DetachedOutput);
  CHECK_THROWS_AS(add(x, tape.leaf(Tensor({3}))), ShapeMismatch);
}

TEST_CASE("grad_check accepts exact gradients and rejects corrupted ones") {
  Rng rng(7);
  const Tensor point = random_tensor({5}, rng);
  auto quadratic = [](Tape& t, Var x) { return sum(square(x)); };
  CHECK(grad_check(quadratic, point, 1e-3, 1e-6).pass);

  // Deliberately corrupted backward rule: doubles the true gradient.
  auto corrupted = [](Tape& t, Var x) {
    const Tensor& xv = t.value(x);
    Tensor out(xv.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * xv[i];
    const int xi = x.id;
    Var bad = t.record(std::move(out), {xi}, [xi](Tape& tt, int self) {
      const Tensor& g = tt.grad_ref(self);
      const Tensor& xv2 = tt.value_ref(xi);
      Tensor& gx = tt.grad_ref(xi);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * 4.0 * xv2[i];
    });
    return sum(bad);
  };
  CHECK_FALSE(grad_check(corrupted, point, 1e-3, 1e-4).pass);
}

TEST_CASE("bce-of-sigmoid-of-affine passes grad_check") {
  Rng rng(11);
  for (int seed = 0; seed < 3; ++seed) {
    const Tensor point = random_tensor({4, 3}, rng);
    const Tensor w = random_tensor({3, 1}, rng);
    const Tensor b = random_tensor({1}, rng);
    Tensor target({4, 1});
    for (std::size_t i = 0; i < 4; ++i) target[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
    auto f = [&](Tape& t, Var x) {
      return bce(sigmoid(affine(x, t.leaf(w, false), t.leaf(b, false))), target);
    };
    CHECK(grad_check(f, point, 1e-3, 1e-4).pass);
  }
}

TEST_CASE("every primitive passes grad_check over seeds and shapes") {
  const std::vector<std::vector<std::size_t>> mat_shapes = {{2, 3}, {1, 4}, {3, 3}};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    for (const auto& shape : mat_shapes) {
      const Tensor point = random_tensor(shape, rng);
      const Tensor other = random_tensor(shape, rng);
      const Tensor point_nz = random_nonzero_tensor(shape, rng);

      auto with_other = [&](auto op) {
        return [op, &other](Tape& t, Var x) { return sum(op(x, t.leaf(other, false))); };
      };
      CHECK(grad_check(with_other([](Var a, Var b) { return add(a, b); }), point, 1e-3, 1e-4)
                .pass);
      CHECK(grad_check(with_other([](Var a, Var b) { return sub(a, b); }), point, 1e-3, 1e-4)
                .pass);
      CHECK(grad_check(with_other([](Var a, Var b) { return mul(a, b); }), point, 1e-3, 1e-4)
                .pass);
      CHECK(grad_check(with_other([](Var a, Var b) { return concat(a, b, 1); }), point, 1e-3,
                       1e-4)
                .pass);
      for (auto unary : {relu, elu, sigmoid, tanh_, abs_, square}) {
        auto f = [unary](Tape& t, Var x) { return sum(unary(x)); };
        CHECK(grad_check(f, unary == relu || unary == abs_ ? point_nz : point, 1e-3, 1e-4)
                  .pass);
      }
      auto f_mean = [](Tape& t, Var x) { return mean(square(x)); };
      CHECK(grad_check(f_mean, point, 1e-3, 1e-4).pass);

      const Tensor right = random_tensor({shape[1], 2}, rng);
      auto f_matmul = [&right](Tape& t, Var x) {
        return sum(square(matmul(x, t.leaf(right, false))));
      };
      CHECK(grad_check(f_matmul, point, 1e-3, 1e-4).pass);

      const Tensor w = random_tensor({shape[1], 2}, rng);
      const Tensor b = random_tensor({2}, rng);
      auto f_affine = [&](Tape& t, Var x) {
        return sum(square(affine(x, t.leaf(w, false), t.leaf(b, false))));
      };
      CHECK(grad_check(f_affine, point, 1e-3, 1e-4).pass);
    }

    // Spatial primitives.
    for (const std::size_t side : {4, 6, 8}) {
      const Tensor img = random_tensor({1, 2, side, side}, rng);
      const Tensor img_nz = random_nonzero_tensor({1, 2, side, side}, rng);
      const Tensor kernel = random_tensor({3, 2, 3, 3}, rng);
      const Tensor bias = random_tensor({3}, rng);
      for (const int stride : {1, 2}) {
        for (const Padding pad : {Padding::same, Padding::valid}) {
          auto f_conv = [&, stride, pad](Tape& t, Var x) {
            return sum(square(conv2d(x, t.leaf(kernel, false), t.leaf(bias, false), stride,
                                     pad)));
          };
          CHECK(grad_check(f_conv, img, 1e-3, 1e-4).pass);
          auto f_conv_w = [&, stride, pad](Tape& t, Var w) {
            return sum(square(conv2d(t.leaf(img, false), w, t.leaf(bias, false), stride, pad)));
          };
          CHECK(grad_check(f_conv_w, kernel, 1e-3, 1e-4).pass);
        }
      }
      auto f_pool = [](Tape& t, Var x) { return sum(square(maxpool2x2(x))); };
      CHECK(grad_check(f_pool, img_nz, 1e-4, 1e-4).pass);
      auto f_unpool = [](Tape& t, Var x) { return sum(square(unpool2x2(x))); };
      CHECK(grad_check(f_unpool, img, 1e-3, 1e-4).pass);
    }
  }
}

TEST_CASE("conv2d gradient matches finite differences on 6x6 input") {
  Rng rng(42);
  const Tensor img = random_tensor({1, 1, 6, 6}, rng);
  const Tensor kernel = random_tensor({1, 1, 3, 3}, rng);
  const Tensor bias({1});
  auto f = [&](Tape& t, Var x) {
    return sum(conv2d(x, t.leaf(kernel, false), t.leaf(bias, false), 1, Padding::valid));
  };
  const auto result = grad_check(f, img, 1e-3, 1e-4);
  CHECK(result.pass);
  CHECK(result.max_rel_error < 1e-4);
}

TEST_CASE("backward is linear in the loss") {
  Rng rng(3);
  const Tensor point = random_tensor({6}, rng);
  const double alpha = 1.7, beta = -0.4;

  auto grad_of = [&](auto loss_fn) {
    Tape tape;
    Var x = tape.leaf(point);
    tape.backward(loss_fn(tape, x));
    return tape.grad(x);
  };
  auto f = [](Tape& t, Var x) { return mean(square(x)); };
  auto g = [](Tape& t, Var x) { return sum(mul(x, sigmoid(x))); };
  const Tensor gf = grad_of(f);
  const Tensor gg = grad_of(g);
  const Tensor combined = grad_of([&](Tape& t, Var x) {
    return add(scale(f(t, x), alpha), scale(g(t, x), beta));
  });
  for (std::size_t i = 0; i < point.size(); ++i) {
    CHECK(combined[i] == doctest::Approx(alpha * gf[i] + beta * gg[i]).epsilon(1e-12));
  }
}

TEST_CASE("maxpool2x2 of unpool2x2 is the identity") {
  Rng rng(5);
  const Tensor x = random_tensor({2, 3, 4, 4}, rng);
  Tape tape;
  Var v = tape.leaf(x);
  Var round_trip = maxpool2x2(unpool2x2(v));
  const Tensor& y = tape.value(round_trip);
  REQUIRE(y.same_shape(x));
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("gradient accumulates over fan-out") {
  Tape tape;
  Var x = tape.leaf(Tensor::scalar(3.0));
  tape.backward(add(mul(x, x), x));  // d/dx (x^2 + x) = 2x + 1
  CHECK(tape.grad(x)[0] == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("rng determinism") {
  Rng a(123), b(123);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(123), d(123);
  for (int i = 0; i < 100; ++i) {
    const double x = c.normal(), y = d.normal();
    CHECK(std::memcmp(&x, &y, sizeof x) == 0);
  }
}

TEST_CASE("VTNS tensor file round trip") {
  Rng rng(9);
  const Tensor t = random_tensor({2, 3, 4}, rng);
  const std::string path =
      (std::filesystem::temp_directory_path() / "vacgan_test_tensor.vtns").string();
  save_tensor(t, path);
  const Tensor back = load_tensor(path);
  REQUIRE(back.same_shape(t));
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(back[i] == t[i]);
  std::filesystem::remove(path);
}
