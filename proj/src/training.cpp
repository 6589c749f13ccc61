#include "vacgan/training.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vacgan {

Scheme scheme_from_name(const std::string& name) {
  if (name == "gan") return Scheme::gan;
  if (name == "began") return Scheme::began;
  if (name == "cbegan") return Scheme::cbegan;
  if (name == "vacgan_on_gan") return Scheme::vacgan_on_gan;
  if (name == "vacgan_on_began") return Scheme::vacgan_on_began;
  throw InvalidConfig("unknown scheme: " + name);
}

std::string scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::gan: return "gan";
    case Scheme::began: return "began";
    case Scheme::cbegan: return "cbegan";
    case Scheme::vacgan_on_gan: return "vacgan_on_gan";
    case Scheme::vacgan_on_began: return "vacgan_on_began";
  }
  return "?";
}

Conditioning conditioning_from_name(const std::string& name) {
  if (name == "latent_partition") return Conditioning::latent_partition;
  if (name == "label_concat") return Conditioning::label_concat;
  throw InvalidConfig("unknown conditioning mode: " + name);
}

std::string conditioning_name(Conditioning mode) {
  return mode == Conditioning::latent_partition ? "latent_partition" : "label_concat";
}

BeganState began_k_update(const BeganState& state, double loss_real, double loss_fake) {
  if (!std::isfinite(loss_real) || !std::isfinite(loss_fake) || loss_real < 0.0 ||
      loss_fake < 0.0) {
    throw NonFinite("began_k_update: losses must be finite and nonnegative");
  }
  BeganState next = state;
  next.k_t = std::clamp(state.k_t + state.lambda_k * (state.gamma * loss_real - loss_fake),
                        0.0, 1.0);
  return next;
}

void OptimizerState::step(Model& model, Tape& tape, const Model::ParamVars& pv) {
  ++t_;
  for (auto& [name, param] : model.params()) {
    const Tensor& grad = tape.grad(pv.at(name));
    if (!grad.all_finite()) throw NonFinite("gradient of " + name + " is not finite");
    if (config_.kind == OptimizerConfig::Kind::adam) {
      auto& m = m1_.try_emplace(name, Tensor(param.shape())).first->second;
      auto& v = m2_.try_emplace(name, Tensor(param.shape())).first->second;
      const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
      const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
      for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * grad[i];
        v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
        param[i] -= config_.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + 1e-8);
      }
    } else {
      auto& vel = m1_.try_emplace(name, Tensor(param.shape())).first->second;
      const double mu = config_.momentum;
      for (std::size_t i = 0; i < param.size(); ++i) {
        vel[i] = mu * vel[i] - config_.learning_rate * grad[i];
        param[i] += mu * vel[i] - config_.learning_rate * grad[i];
      }
    }
  }
}

void TrainConfig::validate() const {
  if (batch_size < 2 || batch_size % 2 != 0) {
    throw InvalidConfig("batch_size must be even and >= 2");
  }
  if (weights.vartheta < 0.0 || weights.zeta < 0.0 ||
      weights.vartheta + weights.zeta <= 0.0) {
    throw InvalidConfig("vacgan weights must be nonnegative with positive sum");
  }
  if (began_init.gamma <= 0.0 || began_init.gamma > 1.0) {
    throw InvalidConfig("began gamma must be in (0,1]");
  }
  if (began_init.lambda_k <= 0.0) throw InvalidConfig("began lambda_k must be positive");
  if (began_init.k_t < 0.0 || began_init.k_t > 1.0) {
    throw InvalidConfig("began k0 must be in [0,1]");
  }
  if (conditioning == Conditioning::latent_partition && generator.latent_dim < 1) {
    throw InvalidConfig("latent partition needs latent_dim >= 1");
  }
}

namespace {

constexpr std::uint64_t kStreamStep = 0x9e3779b97f4a7c15ull;

Rng derived_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(seed + stream * kStreamStep);
}

bool is_image_dataset(const DatasetSpec& spec) {
  return spec.kind == DatasetKind::procedural_glyphs || spec.kind == DatasetKind::external;
}

}  // namespace

GanModels build_models(const TrainConfig& config) {
  config.validate();
  GanModels models;

  ModelConfig gen_cfg = config.generator;
  gen_cfg.role = Role::generator;
  if (config.conditioning == Conditioning::label_concat) {
    gen_cfg.latent_dim += 2;  // one-hot label appended to the noise vector
  }
  if (is_image_dataset(config.dataset)) {
    gen_cfg.image_side = config.dataset.image_side;
  } else {
    gen_cfg.image_side = 0;
    gen_cfg.point_dim = 2;
  }
  Rng gen_rng = derived_rng(config.seed, 11);
  models.generator = build(gen_cfg, gen_rng);

  ModelConfig disc_cfg = config.discriminator;
  disc_cfg.role = is_began_family(config.scheme) ? Role::discriminator_autoencoder
                                                 : Role::discriminator_scalar;
  if (is_image_dataset(config.dataset)) {
    disc_cfg.image_side = config.dataset.image_side;
  } else {
    disc_cfg.point_dim = 2;
  }
  Rng disc_rng = derived_rng(config.seed, 12);
  models.discriminator = build(disc_cfg, disc_rng);

  if (config.wants_classifier()) {
    ModelConfig cls_cfg = config.classifier;
    if (is_image_dataset(config.dataset)) {
      cls_cfg.role = Role::classifier_conv;
      cls_cfg.image_side = config.dataset.image_side;
    } else {
      cls_cfg.role = Role::classifier_mlp;
      if (cls_cfg.widths.empty()) cls_cfg.widths = {2, 16, 1};
    }
    Rng cls_rng = derived_rng(config.seed, 13);
    models.classifier = build(cls_cfg, cls_rng);
    models.classifier_present = true;
  }
  return models;
}

Tensor make_latent_batch(const TrainConfig& config, const std::vector<int>& labels, Rng& rng) {
  const std::size_t n = labels.size();
  const std::size_t noise_dim = config.generator.latent_dim;
  if (config.conditioning == Conditioning::latent_partition) {
    LatentSpec spec{noise_dim, 0};
    Tensor z({n, noise_dim});
    for (std::size_t i = 0; i < n; ++i) {
      const Tensor row = sample_latent(spec, labels[i], 1, rng);
      std::copy(row.data(), row.data() + noise_dim, z.data() + i * noise_dim);
    }
    return z;
  }
  Tensor z({n, noise_dim + 2});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < noise_dim; ++d) z.at2(i, d) = rng.normal();
    z.at2(i, noise_dim + (labels[i] == 0 ? 0 : 1)) = 1.0;
  }
  return z;
}

namespace {

Tensor const_targets(std::size_t n, double v) {
  Tensor t({n, 1});
  for (std::size_t i = 0; i < n; ++i) t[i] = v;
  return t;
}

Tensor label_targets(const std::vector<int>& labels) {
  Tensor t({labels.size(), 1});
  for (std::size_t i = 0; i < labels.size(); ++i) t[i] = static_cast<double>(labels[i]);
  return t;
}

}  // namespace

DiscStepResult step_discriminator(const TrainConfig& config, GanModels& models,
                                  const Tensor& batch_real, const Tensor& batch_z,
                                  OptimizerState& opt_d, BeganState& state) {
  Tape tape;
  const auto pv_g = models.generator.place_params(tape);
  const auto pv_d = models.discriminator.place_params(tape);
  Var real = tape.leaf(batch_real, false);
  Var z = tape.leaf(batch_z, false);
  Var fake = models.generator.forward(tape, z, pv_g);

  DiscStepResult result;
  Var loss{};
  if (is_began_family(config.scheme)) {
    Var loss_real = mse_loss(real, models.discriminator.forward(tape, real, pv_d));
    Var loss_fake = mse_loss(fake, models.discriminator.forward(tape, fake, pv_d));
    loss = sub(loss_real, scale(loss_fake, state.k_t));
    result.loss_real = tape.value(loss_real).item();
    result.loss_fake = tape.value(loss_fake).item();
  } else {
    Var pred_real = models.discriminator.forward(tape, real, pv_d);
    Var pred_fake = models.discriminator.forward(tape, fake, pv_d);
    const std::size_t n = batch_real.shape()[0];
    const std::size_t m = batch_z.shape()[0];
    loss = add(bce(pred_real, const_targets(n, 1.0)), bce(pred_fake, const_targets(m, 0.0)));
  }
  result.loss_d = tape.value(loss).item();
  tape.backward(loss);
  opt_d.step(models.discriminator, tape, pv_d);
  if (is_began_family(config.scheme)) {
    state = began_k_update(state, result.loss_real, result.loss_fake);
  }
  return result;
}

double step_generator(const TrainConfig& config, GanModels& models, const Tensor& batch_z,
                      const std::vector<int>& labels, OptimizerState& opt_g,
                      const BeganState& state) {
  (void)state;
  Tape tape;
  const auto pv_g = models.generator.place_params(tape);
  const auto pv_d = models.discriminator.place_params(tape);
  Var z = tape.leaf(batch_z, false);
  Var fake = models.generator.forward(tape, z, pv_g);

  Var base{};
  if (is_began_family(config.scheme)) {
    base = mse_loss(fake, models.discriminator.forward(tape, fake, pv_d));
  } else {
    Var pred = models.discriminator.forward(tape, fake, pv_d);
    const std::size_t n = batch_z.shape()[0];
    if (config.gan_minimax) {
      base = scale(bce(pred, const_targets(n, 0.0)), -1.0);  // minimize log(1 - D(G(z)))
    } else {
      base = bce(pred, const_targets(n, 1.0));  // non-saturating -log D(G(z))
    }
  }

  Var loss = base;
  if (is_vacgan(config.scheme)) {
    if (!models.classifier_present) throw InvalidConfig("vacgan scheme without classifier");
    const auto pv_c = models.classifier.place_params(tape);
    Var pred = models.classifier.forward(tape, fake, pv_c);
    Var cls = bce(pred, label_targets(labels));
    loss = add(scale(base, config.weights.vartheta), scale(cls, config.weights.zeta));
  }
  const double loss_value = tape.value(loss).item();
  tape.backward(loss);
  opt_g.step(models.generator, tape, pv_g);
  return loss_value;
}

double step_classifier(GanModels& models, const Tensor& batch_z, const std::vector<int>& labels,
                       OptimizerState& opt_c, const LabeledBatch* real) {
  if (!models.classifier_present) throw InvalidConfig("no classifier in this run");
  Tape tape;
  const auto pv_g = models.generator.place_params(tape);
  const auto pv_c = models.classifier.place_params(tape);
  Var z = tape.leaf(batch_z, false);
  Var samples = models.generator.forward(tape, z, pv_g);
  std::vector<int> all_labels = labels;
  if (real != nullptr) {
    samples = concat(samples, tape.leaf(real->samples, false), 0);
    all_labels.insert(all_labels.end(), real->labels.begin(), real->labels.end());
  }
  Var pred = models.classifier.forward(tape, samples, pv_c);
  Var loss = bce(pred, label_targets(all_labels));
  const double loss_value = tape.value(loss).item();
  tape.backward(loss);
  opt_c.step(models.classifier, tape, pv_c);
  return loss_value;
}

std::string TrainedBundle::history_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "step,loss_d,loss_g,loss_c,k_t,M\n";
  for (const auto& r : history) {
    os << r.step << "," << r.loss_d << "," << r.loss_g << "," << r.loss_c << "," << r.k_t << ","
       << r.convergence << "\n";
  }
  return os.str();
}

TrainedBundle train(const TrainConfig& config) {
  config.validate();
  TrainedBundle bundle;
  bundle.models = build_models(config);
  BeganState state = config.began_init;

  OptimizerState opt_g(config.opt_g), opt_d(config.opt_d), opt_c(config.opt_c);
  Rng data_rng = derived_rng(config.seed, 1);
  Rng latent_rng = derived_rng(config.seed, 2);

  LabeledBatch corpus;
  if (config.dataset.kind == DatasetKind::external) {
    corpus = load_external(config.dataset.corpus_path, config.dataset.corpus_path + "/manifest.tsv");
  }

  const std::size_t half = config.batch_size / 2;
  std::vector<int> labels(config.batch_size);
  for (std::size_t i = 0; i < config.batch_size; ++i) labels[i] = i < half ? 0 : 1;

  bundle.history.reserve(config.steps);
  for (std::size_t step = 0; step < config.steps; ++step) {
    StepRecord record;
    record.step = step;
    try {
      Tensor batch_real;
      if (config.dataset.kind == DatasetKind::external) {
        std::vector<std::size_t> per_sample(corpus.samples.shape().begin() + 1,
                                            corpus.samples.shape().end());
        const std::size_t stride = shape_size(per_sample);
        std::vector<std::size_t> shape = {config.batch_size};
        shape.insert(shape.end(), per_sample.begin(), per_sample.end());
        batch_real = Tensor(shape);
        for (std::size_t i = 0; i < config.batch_size; ++i) {
          const auto idx = static_cast<std::size_t>(data_rng.uniform() *
                                                    static_cast<double>(corpus.labels.size()));
          std::copy(corpus.samples.data() + idx * stride,
                    corpus.samples.data() + (idx + 1) * stride,
                    batch_real.data() + i * stride);
        }
      } else {
        batch_real = sample_batch(config.dataset, half, data_rng).samples;
      }
      const Tensor batch_z = make_latent_batch(config, labels, latent_rng);

      const DiscStepResult d = step_discriminator(config, bundle.models, batch_real, batch_z,
                                                  opt_d, state);
      record.loss_d = d.loss_d;
      if (bundle.models.classifier_present) {
        const LabeledBatch* real_for_c = nullptr;
        LabeledBatch real_batch;
        if (config.classifier_sees_real) {
          real_batch = sample_batch(config.dataset, half, data_rng);
          real_for_c = &real_batch;
        }
        for (std::size_t c = 0; c < config.classifier_steps; ++c) {
          record.loss_c = step_classifier(bundle.models, batch_z, labels, opt_c, real_for_c);
        }
      }
      record.loss_g = step_generator(config, bundle.models, batch_z, labels, opt_g, state);
      record.k_t = state.k_t;
      if (is_began_family(config.scheme)) {
        record.convergence = d.loss_real + std::fabs(state.gamma * d.loss_real - d.loss_fake);
      }
    } catch (const Error& e) {
      throw Error("training step " + std::to_string(step) + ": " + e.what());
    }
    bundle.history.push_back(record);
  }
  bundle.began_final = state;
  return bundle;
}

Tensor generate_class_samples(const Model& generator, Conditioning mode, int class_label,
                              std::size_t n, Rng& rng) {
  const std::size_t input_dim = generator.config.latent_dim;
  Tensor z({n, input_dim});
  if (mode == Conditioning::latent_partition) {
    z = sample_latent(LatentSpec{input_dim, 0}, class_label, n, rng);
  } else {
    const std::size_t noise_dim = input_dim - 2;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < noise_dim; ++d) z.at2(i, d) = rng.normal();
      z.at2(i, noise_dim + (class_label == 0 ? 0 : 1)) = 1.0;
      z.at2(i, noise_dim + (class_label == 0 ? 1 : 0)) = 0.0;
    }
  }
  return generator.forward_value(z);
}

Model train_probe_classifier(const DatasetSpec& dataset, const ModelConfig& config,
                             std::size_t steps, std::size_t batch_size, std::uint64_t seed) {
  Rng build_rng = derived_rng(seed, 21);
  Model probe = build(config, build_rng);
  OptimizerConfig opt_cfg;
  opt_cfg.kind = OptimizerConfig::Kind::adam;
  opt_cfg.learning_rate = 0.01;
  opt_cfg.beta1 = 0.9;
  OptimizerState opt(opt_cfg);
  Rng data_rng = derived_rng(seed, 22);
  for (std::size_t step = 0; step < steps; ++step) {
    const LabeledBatch batch = sample_batch(dataset, batch_size / 2, data_rng);
    Tape tape;
    const auto pv = probe.place_params(tape);
    Var x = tape.leaf(batch.samples, false);
    Var pred = probe.forward(tape, x, pv);
    Var loss = bce(pred, label_targets(batch.labels));
    tape.backward(loss);
    opt.step(probe, tape, pv);
  }
  return probe;
}

}  // namespace vacgan
