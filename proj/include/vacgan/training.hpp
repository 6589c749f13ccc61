#pragma once

#include <string>
#include <vector>

#include "vacgan/data.hpp"
#include "vacgan/latent.hpp"
#include "vacgan/models.hpp"
#include "vacgan/tape.hpp"

namespace vacgan {

enum class Scheme { gan, began, cbegan, vacgan_on_gan, vacgan_on_began };
enum class Conditioning { latent_partition, label_concat };

Scheme scheme_from_name(const std::string& name);
std::string scheme_name(Scheme scheme);
Conditioning conditioning_from_name(const std::string& name);
std::string conditioning_name(Conditioning mode);

inline bool is_began_family(Scheme s) {
  return s == Scheme::began || s == Scheme::cbegan || s == Scheme::vacgan_on_began;
}
inline bool is_vacgan(Scheme s) {
  return s == Scheme::vacgan_on_gan || s == Scheme::vacgan_on_began;
}

struct BeganState {
  double k_t = 0.0;
  double lambda_k = 0.001;
  double gamma = 0.5;
};

// k_{t+1} = clamp(k_t + lambda_k * (gamma * loss_real - loss_fake), 0, 1)
BeganState began_k_update(const BeganState& state, double loss_real, double loss_fake);

struct VacGanWeights {
  double vartheta = 0.997;
  double zeta = 0.003;
};

struct OptimizerConfig {
  enum class Kind { adam, nesterov_momentum };
  Kind kind = Kind::adam;
  double learning_rate = 0.0001;
  double beta1 = 0.5, beta2 = 0.999;  // adam
  double momentum = 0.9;              // nesterov
};

class OptimizerState {
 public:
  explicit OptimizerState(OptimizerConfig config = {}) : config_(config) {}

  const OptimizerConfig& config() const { return config_; }

  // Applies one update to every parameter of the model from the gradients
  // left on the tape by backward().
  void step(Model& model, Tape& tape, const Model::ParamVars& pv);

 private:
  OptimizerConfig config_;
  std::map<std::string, Tensor> m1_, m2_;  // adam moments / nesterov velocity
  long t_ = 0;
};

struct TrainConfig {
  Scheme scheme = Scheme::vacgan_on_began;
  Conditioning conditioning = Conditioning::latent_partition;
  std::size_t batch_size = 32;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  DatasetSpec dataset;
  ModelConfig generator, discriminator, classifier;
  VacGanWeights weights;
  BeganState began_init;
  OptimizerConfig opt_g, opt_d, opt_c;
  std::size_t classifier_steps = 1;   // classifier steps per iteration
  bool classifier_sees_real = false;  // mix real labeled data into C's batch
  bool gan_minimax = false;           // minimax generator loss instead of -log D(G(z))

  LatentSpec latent_spec() const { return {generator.latent_dim, 0}; }
  bool wants_classifier() const { return is_vacgan(scheme); }
  void validate() const;
};

struct GanModels {
  Model generator;
  Model discriminator;
  Model classifier;  // only meaningful when classifier_present
  bool classifier_present = false;
};

GanModels build_models(const TrainConfig& config);

// Latent batch for the generator plus the class labels it encodes.
// latent_partition folds the sign of coordinate 0; label_concat appends a
// one-hot label to an unconstrained normal vector.
Tensor make_latent_batch(const TrainConfig& config, const std::vector<int>& labels, Rng& rng);

struct DiscStepResult {
  double loss_d = 0.0;
  double loss_real = 0.0;  // L(x), began family only
  double loss_fake = 0.0;  // L(G(z|c)), began family only
};

// One optimizer step on D; G (and C) untouched. Updates the BEGAN state for
// began-family schemes.
DiscStepResult step_discriminator(const TrainConfig& config, GanModels& models,
                                  const Tensor& batch_real, const Tensor& batch_z,
                                  OptimizerState& opt_d, BeganState& state);

// One optimizer step on G. For vacgan schemes the classification gradient
// flows through G; C and D stay fixed.
double step_generator(const TrainConfig& config, GanModels& models, const Tensor& batch_z,
                      const std::vector<int>& labels, OptimizerState& opt_g,
                      const BeganState& state);

// One step on C against bce(C(G(z)), label); G untouched. Optional real
// labeled samples are appended to the batch.
double step_classifier(GanModels& models, const Tensor& batch_z, const std::vector<int>& labels,
                       OptimizerState& opt_c, const LabeledBatch* real = nullptr);

struct StepRecord {
  std::size_t step = 0;
  double loss_d = 0.0, loss_g = 0.0, loss_c = 0.0;
  double k_t = 0.0;
  double convergence = 0.0;  // M = L(x) + |gamma*L(x) - L(G(z))|, began family
};

struct TrainedBundle {
  GanModels models;
  std::vector<StepRecord> history;
  BeganState began_final;

  std::string history_csv() const;
};

// Interleaved D / C / G loop, deterministic given the seed.
TrainedBundle train(const TrainConfig& config);

// n class-conditioned samples from a trained generator.
Tensor generate_class_samples(const Model& generator, Conditioning mode, int class_label,
                              std::size_t n, Rng& rng);

// Classifier trained on real labeled data, for grading generated samples.
Model train_probe_classifier(const DatasetSpec& dataset, const ModelConfig& config,
                             std::size_t steps, std::size_t batch_size, std::uint64_t seed);

}  // namespace vacgan
