#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vacgan/metrics.hpp"
#include "vacgan/training.hpp"

using namespace vacgan;

namespace {

double scalar_bce(std::initializer_list<double> preds, std::initializer_list<double> targets) {
  Tape tape;
  Tensor p({preds.size(), 1}, std::vector<double>(preds));
  Tensor t({targets.size(), 1}, std::vector<double>(targets));
  return tape.value(bce(tape.leaf(p, false), t)).item();
}

TrainConfig toy_config(Scheme scheme, std::uint64_t seed = 0) {
  TrainConfig cfg;
  cfg.scheme = scheme;
  cfg.batch_size = 8;
  cfg.seed = seed;
  cfg.dataset.kind = DatasetKind::two_gaussians;
  cfg.generator.latent_dim = 4;
  cfg.generator.widths = {8};
  cfg.discriminator.widths = {8};
  cfg.classifier.widths = {2, 8, 1};
  return cfg;
}

TrainConfig toy_image_config(Scheme scheme, std::uint64_t seed = 0) {
  TrainConfig cfg = toy_config(scheme, seed);
  cfg.dataset.kind = DatasetKind::procedural_glyphs;
  cfg.dataset.image_side = 8;
  cfg.generator.channels = 2;
  cfg.discriminator.channels = 2;
  cfg.discriminator.bottleneck = 4;
  return cfg;
}

Tensor copy_param(const Model& m, std::size_t idx) { return m.params()[idx].second; }

bool params_equal(const Model& a, const Model& b) {
  if (a.params().size() != b.params().size()) return false;
  for (std::size_t p = 0; p < a.params().size(); ++p) {
    const Tensor& ta = a.params()[p].second;
    const Tensor& tb = b.params()[p].second;
    if (!ta.same_shape(tb)) return false;
    for (std::size_t i = 0; i < ta.size(); ++i) {
      if (ta[i] != tb[i]) return false;
    }
  }
  return true;
}

double manual_mse(const Tensor& a, const Tensor& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("bce golden values") {
  CHECK(scalar_bce({0.5}, {1.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  const double near_perfect = scalar_bce({1.0 - 1e-7}, {1.0});
  CHECK(near_perfect > 0.0);
  CHECK(near_perfect < 2e-7);
  CHECK(scalar_bce({0.9, 0.2}, {1.0, 0.0}) ==
        doctest::Approx((-std::log(0.9) - std::log(0.8)) / 2.0).epsilon(1e-12));
}

TEST_CASE("autoencoder loss golden values and mse cross-check") {
  Tape tape;
  Var v = tape.leaf(Tensor({1, 2}, {1.0, 0.0}), false);
  Var rec = tape.leaf(Tensor({1, 2}, {0.0, 0.0}), false);
  CHECK(tape.value(mse_loss(v, v)).item() == 0.0);
  CHECK(tape.value(mse_loss(v, rec)).item() == doctest::Approx(0.5).epsilon(1e-12));

  Rng rng(5);
  Tensor a({1, 3, 4}), b({1, 3, 4});
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = rng.uniform();
    b[i] = rng.uniform();
  }
  Tape t2;
  const double via_loss = t2.value(mse_loss(t2.leaf(a, false), t2.leaf(b, false))).item();
  const double via_metric = mse(Image::from_tensor(a), Image::from_tensor(b));
  CHECK(std::fabs(via_loss - via_metric) < 1e-12);
}

TEST_CASE("began_k_update golden values and clamps") {
  BeganState s;  // k=0, lambda_k=0.001, gamma=0.5
  CHECK(began_k_update(s, 1.0, 0.2).k_t == doctest::Approx(0.0003).epsilon(1e-12));
  CHECK(began_k_update(s, 1.0, 100.0).k_t == 0.0);
  BeganState high = s;
  high.k_t = 1.0;
  CHECK(began_k_update(high, 2.0, 0.0).k_t == 1.0);
  CHECK_THROWS_AS(began_k_update(s, -1.0, 0.0), NonFinite);
  CHECK_THROWS_AS(began_k_update(s, std::nan(""), 0.0), NonFinite);
}

TEST_CASE("adam matches a hand-run textbook recurrence on a 1-parameter quadratic") {
  Model m;
  m.add_param("w", Tensor::scalar(1.5));
  OptimizerConfig oc;
  oc.kind = OptimizerConfig::Kind::adam;
  oc.learning_rate = 0.1;
  oc.beta1 = 0.5;
  oc.beta2 = 0.999;
  OptimizerState opt(oc);

  // Independent reference: bias-corrected moments form.
  double theta = 1.5, m1 = 0.0, v1 = 0.0;
  for (int t = 1; t <= 5; ++t) {
    {
      Tape tape;
      const auto pv = m.place_params(tape);
      tape.backward(square(pv.at("w")));
      opt.step(m, tape, pv);
    }
    const double g = 2.0 * theta;
    m1 = 0.5 * m1 + 0.5 * g;
    v1 = 0.999 * v1 + 0.001 * g * g;
    const double mhat = m1 / (1.0 - std::pow(0.5, t));
    const double vhat = v1 / (1.0 - std::pow(0.999, t));
    theta -= 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
    CHECK(m.param("w")[0] == doctest::Approx(theta).epsilon(1e-12));
  }
}

TEST_CASE("nesterov momentum matches a hand-run recurrence on a 1-parameter quadratic") {
  Model m;
  m.add_param("w", Tensor::scalar(2.0));
  OptimizerConfig oc;
  oc.kind = OptimizerConfig::Kind::nesterov_momentum;
  oc.learning_rate = 0.01;
  oc.momentum = 0.9;
  OptimizerState opt(oc);

  double theta = 2.0, vel = 0.0;
  for (int t = 0; t < 5; ++t) {
    {
      Tape tape;
      const auto pv = m.place_params(tape);
      tape.backward(square(pv.at("w")));
      opt.step(m, tape, pv);
    }
    const double g = 2.0 * theta;
    vel = 0.9 * vel - 0.01 * g;
    theta += 0.9 * vel - 0.01 * g;
    CHECK(m.param("w")[0] == doctest::Approx(theta).epsilon(1e-12));
  }
}

TEST_CASE("step_discriminator isolation and began recomposition") {
  TrainConfig cfg = toy_image_config(Scheme::vacgan_on_began, 3);
  GanModels models = build_models(cfg);
  const GanModels before = models;

  Rng data_rng(1), latent_rng(2);
  const Tensor batch_real = sample_batch(cfg.dataset, cfg.batch_size / 2, data_rng).samples;
  std::vector<int> labels(cfg.batch_size);
  for (std::size_t i = 0; i < cfg.batch_size; ++i) labels[i] = i < cfg.batch_size / 2 ? 0 : 1;
  const Tensor batch_z = make_latent_batch(cfg, labels, latent_rng);

  BeganState state = cfg.began_init;
  state.k_t = 0.25;
  const double k_before = state.k_t;

  // Independent recomputation of the loss parts from forward values.
  const Tensor fake = models.generator.forward_value(batch_z);
  const double loss_real = manual_mse(batch_real, models.discriminator.forward_value(batch_real));
  const double loss_fake = manual_mse(fake, models.discriminator.forward_value(fake));

  OptimizerState opt_d(cfg.opt_d);
  const DiscStepResult r = step_discriminator(cfg, models, batch_real, batch_z, opt_d, state);

  CHECK(std::fabs(r.loss_d - (loss_real - k_before * loss_fake)) < 1e-12);
  CHECK(std::fabs(r.loss_real - loss_real) < 1e-12);
  CHECK(std::fabs(r.loss_fake - loss_fake) < 1e-12);
  CHECK(state.k_t ==
        doctest::Approx(std::clamp(k_before + 0.001 * (0.5 * loss_real - loss_fake), 0.0, 1.0))
            .epsilon(1e-12));

  CHECK(params_equal(models.generator, before.generator));
  CHECK(params_equal(models.classifier, before.classifier));
  CHECK_FALSE(params_equal(models.discriminator, before.discriminator));
}

TEST_CASE("step_discriminator equals the manual optimizer-on-gradients composition") {
  TrainConfig cfg = toy_config(Scheme::gan, 9);
  GanModels models = build_models(cfg);
  GanModels manual = models;

  Rng data_rng(4), latent_rng(5);
  const Tensor batch_real = sample_batch(cfg.dataset, cfg.batch_size / 2, data_rng).samples;
  std::vector<int> labels(cfg.batch_size);
  for (std::size_t i = 0; i < cfg.batch_size; ++i) labels[i] = i < cfg.batch_size / 2 ? 0 : 1;
  const Tensor batch_z = make_latent_batch(cfg, labels, latent_rng);

  BeganState state;
  OptimizerState opt_d(cfg.opt_d);
  step_discriminator(cfg, models, batch_real, batch_z, opt_d, state);

  // By hand: assemble the same loss, backprop, and apply the first Adam step
  // (t=1 reduces to lr * g / (|g| * sqrt-bias + eps) with explicit moments).
  Tape tape;
  const auto pv_g = manual.generator.place_params(tape);
  const auto pv_d = manual.discriminator.place_params(tape);
  Var fake = manual.generator.forward(tape, tape.leaf(batch_z, false), pv_g);
  Var pred_real = manual.discriminator.forward(tape, tape.leaf(batch_real, false), pv_d);
  Var pred_fake = manual.discriminator.forward(tape, fake, pv_d);
  Tensor ones({cfg.batch_size, 1}), zeros({cfg.batch_size, 1});
  for (std::size_t i = 0; i < cfg.batch_size; ++i) ones[i] = 1.0;
  tape.backward(add(bce(pred_real, ones), bce(pred_fake, zeros)));

  const OptimizerConfig& oc = cfg.opt_d;
  for (auto& [name, param] : manual.discriminator.params()) {
    const Tensor& g = tape.grad(pv_d.at(name));
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double m1 = (1.0 - oc.beta1) * g[i];
      const double v1 = (1.0 - oc.beta2) * g[i] * g[i];
      param[i] -= oc.learning_rate * (m1 / (1.0 - oc.beta1)) /
                  (std::sqrt(v1 / (1.0 - oc.beta2)) + 1e-8);
    }
  }
  for (std::size_t p = 0; p < manual.discriminator.params().size(); ++p) {
    const Tensor& expect = manual.discriminator.params()[p].second;
    const Tensor& got = models.discriminator.params()[p].second;
    for (std::size_t i = 0; i < expect.size(); ++i) {
      CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("step_generator weight decomposition and isolation") {
  TrainConfig cfg = toy_config(Scheme::vacgan_on_gan, 13);
  GanModels models = build_models(cfg);
  const GanModels before = models;

  Rng latent_rng(6);
  std::vector<int> labels(cfg.batch_size);
  for (std::size_t i = 0; i < cfg.batch_size; ++i) labels[i] = i < cfg.batch_size / 2 ? 0 : 1;
  const Tensor batch_z = make_latent_batch(cfg, labels, latent_rng);

  // Recompute base and classification losses from forward values.
  const Tensor fake = models.generator.forward_value(batch_z);
  const Tensor pred_d = models.discriminator.forward_value(fake);
  const Tensor pred_c = models.classifier.forward_value(fake);
  double base = 0.0, cls = 0.0;
  for (std::size_t i = 0; i < cfg.batch_size; ++i) {
    const double pd = std::clamp(pred_d[i], 1e-7, 1.0 - 1e-7);
    const double pc = std::clamp(pred_c[i], 1e-7, 1.0 - 1e-7);
    base += -std::log(pd);
    cls += labels[i] == 1 ? -std::log(pc) : -std::log(1.0 - pc);
  }
  base /= static_cast<double>(cfg.batch_size);
  cls /= static_cast<double>(cfg.batch_size);

  OptimizerState opt_g(cfg.opt_g);
  BeganState state;
  const double loss_g = step_generator(cfg, models, batch_z, labels, opt_g, state);
  CHECK(std::fabs(loss_g - (0.997 * base + 0.003 * cls)) < 1e-12);

  CHECK(params_equal(models.discriminator, before.discriminator));
  CHECK(params_equal(models.classifier, before.classifier));
  CHECK_FALSE(params_equal(models.generator, before.generator));

  // zeta = 0, vartheta = 1 degenerates to the base generator loss.
  GanModels models2 = before;
  TrainConfig cfg2 = cfg;
  cfg2.weights.vartheta = 1.0;
  cfg2.weights.zeta = 0.0;
  OptimizerState opt_g2(cfg2.opt_g);
  CHECK(std::fabs(step_generator(cfg2, models2, batch_z, labels, opt_g2, state) - base) <
        1e-12);
}

TEST_CASE("step_classifier chance-level start, convergence, and isolation") {
  TrainConfig cfg = toy_config(Scheme::vacgan_on_gan, 21);
  cfg.generator.latent_dim = 2;
  cfg.generator.widths = {2};
  GanModels models = build_models(cfg);

  // Freeze G to a hand-set separable map: x = elu(z), classes split by sign(z0).
  Model& g = models.generator;
  for (auto& [name, t] : g.params()) {
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.0;
  }
  g.param("L0.W").at2(0, 0) = 1.0;
  g.param("L0.W").at2(1, 1) = 1.0;
  g.param("L1.W").at2(0, 0) = 1.0;
  g.param("L1.W").at2(1, 1) = 1.0;
  const Tensor g_before = copy_param(g, 0);

  OptimizerConfig oc;
  oc.kind = OptimizerConfig::Kind::nesterov_momentum;
  oc.learning_rate = 0.01;
  oc.momentum = 0.9;
  OptimizerState opt_c(oc);

  Rng latent_rng(31);
  std::vector<int> labels(32);
  for (std::size_t i = 0; i < 32; ++i) labels[i] = i < 16 ? 0 : 1;
  TrainConfig big = cfg;
  big.batch_size = 32;

  std::vector<double> losses;
  for (int step = 0; step < 50; ++step) {
    const Tensor batch_z = make_latent_batch(big, labels, latent_rng);
    losses.push_back(step_classifier(models, batch_z, labels, opt_c));
  }
  CHECK(std::fabs(losses.front() - std::log(2.0)) < 0.2);
  CHECK(losses.back() < losses.front());
  CHECK(losses.back() < 0.5);

  const Tensor g_after = copy_param(models.generator, 0);
  for (std::size_t i = 0; i < g_before.size(); ++i) CHECK(g_before[i] == g_after[i]);
}

TEST_CASE("train with steps=0 returns freshly built models") {
  TrainConfig cfg = toy_config(Scheme::vacgan_on_began, 2);
  cfg.dataset.kind = DatasetKind::procedural_glyphs;
  cfg = toy_image_config(Scheme::vacgan_on_began, 2);
  cfg.steps = 0;
  const TrainedBundle bundle = train(cfg);
  const GanModels fresh = build_models(cfg);
  CHECK(bundle.history.empty());
  CHECK(params_equal(bundle.models.generator, fresh.generator));
  CHECK(params_equal(bundle.models.discriminator, fresh.discriminator));
  CHECK(params_equal(bundle.models.classifier, fresh.classifier));
}

TEST_CASE("train is deterministic and keeps k_t in range") {
  TrainConfig cfg = toy_image_config(Scheme::vacgan_on_began, 7);
  cfg.steps = 10;
  const TrainedBundle a = train(cfg);
  const TrainedBundle b = train(cfg);
  CHECK(a.history_csv() == b.history_csv());
  REQUIRE(a.history.size() == 10);
  for (const auto& r : a.history) {
    CHECK(r.k_t >= 0.0);
    CHECK(r.k_t <= 1.0);
    CHECK(std::isfinite(r.convergence));
  }
}

TEST_CASE("vacgan_on_began with zeta=0 reproduces the began trace") {
  TrainConfig vac = toy_image_config(Scheme::vacgan_on_began, 11);
  vac.steps = 8;
  vac.weights.vartheta = 1.0;
  vac.weights.zeta = 0.0;
  TrainConfig base = vac;
  base.scheme = Scheme::began;

  const TrainedBundle bv = train(vac);
  const TrainedBundle bb = train(base);
  REQUIRE(bv.history.size() == bb.history.size());
  for (std::size_t i = 0; i < bv.history.size(); ++i) {
    CHECK(bv.history[i].loss_d == bb.history[i].loss_d);
    CHECK(bv.history[i].loss_g == bb.history[i].loss_g);
    CHECK(bv.history[i].k_t == bb.history[i].k_t);
    CHECK(bv.history[i].convergence == bb.history[i].convergence);
  }
  CHECK(params_equal(bv.models.generator, bb.models.generator));
  CHECK(params_equal(bv.models.discriminator, bb.models.discriminator));
}

TEST_CASE("config validation rejects bad settings") {
  TrainConfig cfg = toy_config(Scheme::began);
  cfg.batch_size = 3;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = toy_config(Scheme::vacgan_on_gan);
  cfg.weights.vartheta = 0.0;
  cfg.weights.zeta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = toy_config(Scheme::began);
  cfg.began_init.gamma = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
}
