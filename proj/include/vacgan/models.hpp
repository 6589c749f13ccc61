#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vacgan/rng.hpp"
#include "vacgan/tape.hpp"
#include "vacgan/tensor.hpp"

namespace vacgan {

enum class Role {
  generator,
  discriminator_scalar,
  discriminator_autoencoder,
  classifier_mlp,
  classifier_conv,
};

std::string role_name(Role role);
Role role_from_name(const std::string& name);

struct ModelConfig {
  Role role = Role::classifier_mlp;
  // MLP roles: widths is the full layer chain including input and output dims.
  std::vector<std::size_t> widths;
  // Conv roles.
  std::size_t channels = 8;         // generator / autoencoder conv channels
  std::size_t conv_channels1 = 16;  // classifier_conv, Hidden 1
  std::size_t conv_channels2 = 8;   // classifier_conv, Hidden 2
  std::size_t dense_width = 1024;   // classifier_conv, Hidden 3
  std::size_t latent_dim = 8;
  std::size_t image_side = 8;  // 0 selects the 2D-point variant for generator
  std::size_t bottleneck = 8;  // autoencoder bottleneck width
  std::size_t point_dim = 2;   // sample dimension for point roles
};

struct Layer {
  enum class Kind { dense, conv, maxpool, unpool, reshape };
  enum class Act { none, relu, elu, sigmoid, tanh };

  Kind kind;
  Act act = Act::none;
  std::string weight, bias;  // param names (dense/conv)
  int stride = 1;
  Padding padding = Padding::same;
  std::vector<std::size_t> reshape_to;  // per-sample shape, batch excluded
  std::size_t out_features = 0;
  std::size_t kernel = 3;

  std::string summary() const;
};

class Model {
 public:
  using ParamVars = std::map<std::string, Var>;

  ModelConfig config;
  std::vector<Layer> layers;
  std::vector<std::size_t> input_shape;   // per-sample, batch excluded
  std::vector<std::size_t> output_shape;

  Tensor& param(const std::string& name);
  const Tensor& param(const std::string& name) const;
  const std::vector<std::pair<std::string, Tensor>>& params() const { return params_; }
  std::vector<std::pair<std::string, Tensor>>& params() { return params_; }
  void add_param(const std::string& name, Tensor t);
  std::size_t param_count() const;

  // Places every parameter on the tape as a leaf.
  ParamVars place_params(Tape& tape) const;
  Var forward(Tape& tape, Var x, const ParamVars& pv) const;

  // Convenience forward on a throwaway tape.
  Tensor forward_value(const Tensor& x) const;

  std::vector<std::string> layer_summaries() const;

  // Checkpoint: "<name>.manifest" plus one VTNS file per parameter.
  void save(const std::string& dir, const std::string& name) const;
  void load(const std::string& dir, const std::string& name);

 private:
  std::vector<std::pair<std::string, Tensor>> params_;
};

Model build(const ModelConfig& config, Rng& rng);

}  // namespace vacgan
