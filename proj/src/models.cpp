#include "vacgan/models.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace vacgan {

std::string role_name(Role role) {
  switch (role) {
    case Role::generator: return "generator";
    case Role::discriminator_scalar: return "discriminator_scalar";
    case Role::discriminator_autoencoder: return "discriminator_autoencoder";
    case Role::classifier_mlp: return "classifier_mlp";
    case Role::classifier_conv: return "classifier_conv";
  }
  return "?";
}

Role role_from_name(const std::string& name) {
  if (name == "generator") return Role::generator;
  if (name == "discriminator_scalar") return Role::discriminator_scalar;
  if (name == "discriminator_autoencoder") return Role::discriminator_autoencoder;
  if (name == "classifier_mlp") return Role::classifier_mlp;
  if (name == "classifier_conv") return Role::classifier_conv;
  throw InvalidConfig("unknown model role: " + name);
}

namespace {

std::string act_name(Layer::Act act) {
  switch (act) {
    case Layer::Act::none: return "";
    case Layer::Act::relu: return "ReLU";
    case Layer::Act::elu: return "ELU";
    case Layer::Act::sigmoid: return "Sigmoid";
    case Layer::Act::tanh: return "Tanh";
  }
  return "";
}

Var apply_act(Var v, Layer::Act act) {
  switch (act) {
    case Layer::Act::none: return v;
    case Layer::Act::relu: return relu(v);
    case Layer::Act::elu: return elu(v);
    case Layer::Act::sigmoid: return sigmoid(v);
    case Layer::Act::tanh: return tanh_(v);
  }
  return v;
}

Tensor glorot_uniform(const std::vector<std::size_t>& shape, std::size_t fan_in,
                      std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
  return t;
}

// Builder keeping track of the running per-sample shape.
struct Stack {
  Model& model;
  Rng& rng;
  std::vector<std::size_t> shape;  // per-sample
  int next_layer = 0;

  std::string pname(const char* suffix) {
    return "L" + std::to_string(next_layer) + "." + suffix;
  }

  // Dense flattens a conv shape implicitly (handled in forward).
  void dense(std::size_t out, Layer::Act act) {
    const std::size_t in = shape_size(shape);
    Layer layer;
    layer.kind = Layer::Kind::dense;
    layer.act = act;
    layer.out_features = out;
    layer.weight = pname("W");
    layer.bias = pname("b");
    model.add_param(layer.weight, glorot_uniform({in, out}, in, out, rng));
    model.add_param(layer.bias, Tensor({out}));
    model.layers.push_back(layer);
    shape = {out};
    ++next_layer;
  }

  void conv(std::size_t out_ch, Layer::Act act, int stride = 1, std::size_t kernel = 3) {
    const std::size_t in_ch = shape[0];
    Layer layer;
    layer.kind = Layer::Kind::conv;
    layer.act = act;
    layer.stride = stride;
    layer.kernel = kernel;
    layer.out_features = out_ch;
    layer.weight = pname("W");
    layer.bias = pname("b");
    model.add_param(layer.weight, glorot_uniform({out_ch, in_ch, kernel, kernel},
                                                 in_ch * kernel * kernel,
                                                 out_ch * kernel * kernel, rng));
    model.add_param(layer.bias, Tensor({out_ch}));
    model.layers.push_back(layer);
    const auto s = static_cast<std::size_t>(stride);
    shape = {out_ch, (shape[1] + s - 1) / s, (shape[2] + s - 1) / s};
    ++next_layer;
  }

  void maxpool() {
    Layer layer;
    layer.kind = Layer::Kind::maxpool;
    model.layers.push_back(layer);
    shape = {shape[0], shape[1] / 2, shape[2] / 2};
    ++next_layer;
  }

  void unpool() {
    Layer layer;
    layer.kind = Layer::Kind::unpool;
    model.layers.push_back(layer);
    shape = {shape[0], shape[1] * 2, shape[2] * 2};
    ++next_layer;
  }

  void reshape_to(std::vector<std::size_t> target) {
    Layer layer;
    layer.kind = Layer::Kind::reshape;
    layer.reshape_to = target;
    model.layers.push_back(layer);
    shape = std::move(target);
    ++next_layer;
  }
};

// BEGAN-style decoder convs: two convs per resolution, unpool between
// resolutions, ELU except the last conv which has no nonlinearity.
void decoder_convs(Stack& s, std::size_t channels) {
  s.conv(channels, Layer::Act::elu);
  s.conv(channels, Layer::Act::elu);
  s.unpool();
  s.conv(channels, Layer::Act::elu);
  s.conv(channels, Layer::Act::elu);
  s.unpool();
  s.conv(channels, Layer::Act::elu);
  s.conv(1, Layer::Act::none);
}

void check_side(const ModelConfig& config) {
  if (config.image_side == 0 || config.image_side % 4 != 0) {
    throw InvalidConfig("image_side must be a positive multiple of 4, got " +
                        std::to_string(config.image_side));
  }
}

}  // namespace

std::string Layer::summary() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::dense:
      os << "Dense(" << out_features << ")";
      break;
    case Kind::conv:
      os << "Conv" << kernel << "x" << kernel << "(" << out_features << ")";
      if (stride != 1) os << "/s" << stride;
      break;
    case Kind::maxpool:
      return "MaxPool2x2";
    case Kind::unpool:
      return "Unpool2x2";
    case Kind::reshape:
      return "Reshape" + shape_str(reshape_to);
  }
  const std::string a = act_name(act);
  if (!a.empty()) os << "/" << a;
  return os.str();
}

Tensor& Model::param(const std::string& name) {
  for (auto& [n, t] : params_) {
    if (n == name) return t;
  }
  throw InvalidConfig("unknown parameter: " + name);
}

const Tensor& Model::param(const std::string& name) const {
  for (const auto& [n, t] : params_) {
    if (n == name) return t;
  }
  throw InvalidConfig("unknown parameter: " + name);
}

void Model::add_param(const std::string& name, Tensor t) {
  params_.emplace_back(name, std::move(t));
}

std::size_t Model::param_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params_) n += t.size();
  return n;
}

Model::ParamVars Model::place_params(Tape& tape) const {
  ParamVars pv;
  for (const auto& [name, t] : params_) pv[name] = tape.leaf(t);
  return pv;
}

Var Model::forward(Tape& tape, Var x, const ParamVars& pv) const {
  const Tensor& xv = tape.value(x);
  if (xv.rank() < 1) throw ShapeMismatch("forward: empty input");
  const std::size_t batch = xv.shape()[0];
  {
    std::vector<std::size_t> per_sample(xv.shape().begin() + 1, xv.shape().end());
    if (per_sample != input_shape) {
      throw ShapeMismatch("forward: input " + shape_str(per_sample) + ", model expects " +
                          shape_str(input_shape));
    }
  }
  Var v = x;
  for (const auto& layer : layers) {
    switch (layer.kind) {
      case Layer::Kind::dense: {
        const Tensor& cur = tape.value(v);
        if (cur.rank() != 2) v = reshape(v, {batch, cur.size() / batch});
        v = affine(v, pv.at(layer.weight), pv.at(layer.bias));
        break;
      }
      case Layer::Kind::conv:
        v = conv2d(v, pv.at(layer.weight), pv.at(layer.bias), layer.stride, layer.padding);
        break;
      case Layer::Kind::maxpool:
        v = maxpool2x2(v);
        break;
      case Layer::Kind::unpool:
        v = unpool2x2(v);
        break;
      case Layer::Kind::reshape: {
        std::vector<std::size_t> s = {batch};
        s.insert(s.end(), layer.reshape_to.begin(), layer.reshape_to.end());
        v = reshape(v, std::move(s));
        break;
      }
    }
    v = apply_act(v, layer.act);
  }
  return v;
}

Tensor Model::forward_value(const Tensor& x) const {
  Tape tape;
  Var in = tape.leaf(x, false);
  Var out = forward(tape, in, place_params(tape));
  return tape.value(out);
}

std::vector<std::string> Model::layer_summaries() const {
  std::vector<std::string> out;
  out.reserve(layers.size());
  for (const auto& layer : layers) out.push_back(layer.summary());
  return out;
}

void Model::save(const std::string& dir, const std::string& name) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream manifest(fs::path(dir) / (name + ".manifest"));
  if (!manifest) throw IoError("cannot write manifest for " + name + " in " + dir);
  for (const auto& [pname, t] : params_) {
    const std::string file = name + "." + pname + ".vtns";
    save_tensor(t, (fs::path(dir) / file).string());
    manifest << pname << "\t" << file << "\n";
  }
}

void Model::load(const std::string& dir, const std::string& name) {
  namespace fs = std::filesystem;
  std::ifstream manifest(fs::path(dir) / (name + ".manifest"));
  if (!manifest) throw IoError("cannot read manifest for " + name + " in " + dir);
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw BadFormat("bad manifest line: " + line);
    const std::string pname = line.substr(0, tab);
    const std::string file = line.substr(tab + 1);
    Tensor t = load_tensor((fs::path(dir) / file).string());
    Tensor& dst = param(pname);
    if (!dst.same_shape(t)) {
      throw ShapeMismatch("checkpoint parameter " + pname + " has shape " +
                          shape_str(t.shape()) + ", model expects " + shape_str(dst.shape()));
    }
    dst = std::move(t);
  }
}

Model build(const ModelConfig& config, Rng& rng) {
  Model model;
  model.config = config;
  Stack s{model, rng, {}, 0};

  switch (config.role) {
    case Role::generator: {
      if (config.latent_dim == 0) throw InvalidConfig("latent_dim must be positive");
      model.input_shape = {config.latent_dim};
      s.shape = {config.latent_dim};
      if (config.image_side == 0) {
        // 2D-point generator: ELU hidden stack, linear output.
        std::vector<std::size_t> widths = config.widths;
        if (widths.empty()) widths = {32, 32};
        for (std::size_t w : widths) s.dense(w, Layer::Act::elu);
        s.dense(config.point_dim, Layer::Act::none);
        model.output_shape = {config.point_dim};
      } else {
        check_side(config);
        const std::size_t base = config.image_side / 4;
        const std::size_t c = config.channels;
        s.dense(c * base * base, Layer::Act::none);
        s.reshape_to({c, base, base});
        decoder_convs(s, c);
        model.output_shape = {1, config.image_side, config.image_side};
      }
      break;
    }
    case Role::discriminator_scalar: {
      model.input_shape = {config.point_dim};
      s.shape = {config.point_dim};
      std::vector<std::size_t> widths = config.widths;
      if (widths.empty()) widths = {32, 32};
      for (std::size_t w : widths) s.dense(w, Layer::Act::elu);
      s.dense(1, Layer::Act::sigmoid);
      model.output_shape = {1};
      break;
    }
    case Role::discriminator_autoencoder: {
      check_side(config);
      const std::size_t side = config.image_side;
      const std::size_t base = side / 4;
      const std::size_t c = config.channels;
      model.input_shape = {1, side, side};
      s.shape = {1, side, side};
      // Encoder: stride-2 downscale in every second conv, ELU throughout.
      s.conv(c, Layer::Act::elu);
      s.conv(c, Layer::Act::elu, 2);
      s.conv(c, Layer::Act::elu);
      s.conv(c, Layer::Act::elu, 2);
      // Bottleneck dense, no activation.
      s.dense(config.bottleneck, Layer::Act::none);
      // Decoder mirrors the generator.
      s.dense(c * base * base, Layer::Act::none);
      s.reshape_to({c, base, base});
      decoder_convs(s, c);
      model.output_shape = {1, side, side};
      break;
    }
    case Role::classifier_mlp: {
      if (config.widths.size() < 2) {
        throw InvalidConfig("classifier_mlp needs widths including input and output dims");
      }
      model.input_shape = {config.widths.front()};
      s.shape = {config.widths.front()};
      for (std::size_t i = 1; i + 1 < config.widths.size(); ++i)
        s.dense(config.widths[i], Layer::Act::relu);
      s.dense(config.widths.back(), Layer::Act::sigmoid);
      model.output_shape = {config.widths.back()};
      break;
    }
    case Role::classifier_conv: {
      check_side(config);
      const std::size_t side = config.image_side;
      model.input_shape = {1, side, side};
      s.shape = {1, side, side};
      s.conv(config.conv_channels1, Layer::Act::relu);
      s.maxpool();
      s.conv(config.conv_channels2, Layer::Act::relu);
      s.maxpool();
      s.dense(config.dense_width, Layer::Act::relu);
      s.dense(1, Layer::Act::sigmoid);
      model.output_shape = {1};
      break;
    }
  }
  return model;
}

}  // namespace vacgan
