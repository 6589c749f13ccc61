#include "vacgan/config.hpp"

#include <fstream>
#include <sstream>

namespace vacgan {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stoul(tok));
  }
  return out;
}

std::string fmt_size_list(const std::vector<std::size_t>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << v[i];
  }
  return os.str();
}

}  // namespace

KvConfig KvConfig::parse(const std::string& text) {
  KvConfig kv;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidConfig("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw InvalidConfig("line " + std::to_string(lineno) + ": empty key");
    kv.values_[key] = value;
  }
  return kv;
}

KvConfig KvConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidConfig("cannot open config file: " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return parse(os.str());
}

std::string KvConfig::serialize() const {
  std::ostringstream os;
  for (const auto& [key, value] : values_) os << key << " = " << value << "\n";
  return os.str();
}

const std::string& KvConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InvalidConfig("missing required key: " + key);
  return it->second;
}

std::string KvConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw InvalidConfig("key " + key + ": not a number: " + it->second);
  }
}

std::size_t KvConfig::get_size(const std::string& key, std::size_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stoul(it->second);
  } catch (const std::exception&) {
    throw InvalidConfig("key " + key + ": not a count: " + it->second);
  }
}

std::uint64_t KvConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw InvalidConfig("key " + key + ": not an integer: " + it->second);
  }
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw InvalidConfig("key " + key + ": not a boolean: " + it->second);
}

void KvConfig::set_double(const std::string& key, double value) { set(key, fmt_double(value)); }
void KvConfig::set_size(const std::string& key, std::size_t value) {
  set(key, std::to_string(value));
}
void KvConfig::set_bool(const std::string& key, bool value) {
  set(key, value ? "true" : "false");
}

RunConfig RunConfig::from_kv(const KvConfig& kv) {
  RunConfig rc;
  TrainConfig& tc = rc.train;
  tc.scheme = scheme_from_name(kv.get("train.scheme"));
  tc.conditioning = conditioning_from_name(kv.get("train.conditioning", "latent_partition"));
  tc.batch_size = kv.get_size("train.batch_size", 32);
  tc.steps = kv.get_size("train.steps", 0);
  if (!kv.has("train.steps")) throw InvalidConfig("missing required key: train.steps");
  tc.seed = kv.get_u64("train.seed", 0);
  tc.classifier_steps = kv.get_size("train.classifier_steps", 1);
  tc.classifier_sees_real = kv.get_bool("train.classifier_sees_real", false);
  tc.gan_minimax = kv.get_bool("train.gan_minimax", false);

  tc.began_init.gamma = kv.get_double("began.gamma", 0.5);
  tc.began_init.lambda_k = kv.get_double("began.lambda_k", 0.001);
  tc.began_init.k_t = kv.get_double("began.k0", 0.0);
  tc.weights.vartheta = kv.get_double("vacgan.vartheta", 0.997);
  tc.weights.zeta = kv.get_double("vacgan.zeta", 0.003);

  const auto read_opt = [&kv](const std::string& prefix, OptimizerConfig def) {
    OptimizerConfig oc = def;
    const std::string kind = kv.get(prefix + ".kind",
                                    def.kind == OptimizerConfig::Kind::adam
                                        ? "adam"
                                        : "nesterov_momentum");
    if (kind == "adam") {
      oc.kind = OptimizerConfig::Kind::adam;
    } else if (kind == "nesterov_momentum") {
      oc.kind = OptimizerConfig::Kind::nesterov_momentum;
    } else {
      throw InvalidConfig("key " + prefix + ".kind: unknown optimizer: " + kind);
    }
    oc.learning_rate = kv.get_double(prefix + ".lr", def.learning_rate);
    oc.beta1 = kv.get_double(prefix + ".beta1", def.beta1);
    oc.beta2 = kv.get_double(prefix + ".beta2", def.beta2);
    oc.momentum = kv.get_double(prefix + ".momentum", def.momentum);
    return oc;
  };
  OptimizerConfig adam_default;  // lr 0.0001, beta1 0.5, beta2 0.999
  OptimizerConfig nesterov_default;
  nesterov_default.kind = OptimizerConfig::Kind::nesterov_momentum;
  nesterov_default.learning_rate = 0.01;
  nesterov_default.momentum = 0.9;
  tc.opt_g = read_opt("opt.g", adam_default);
  tc.opt_d = read_opt("opt.d", adam_default);
  tc.opt_c = read_opt("opt.c", nesterov_default);

  tc.generator.latent_dim = kv.get_size("model.latent_dim", 4);
  tc.generator.widths = parse_size_list(kv.get("model.gen_widths", "32,32"));
  tc.generator.channels = kv.get_size("model.gen_channels", 8);
  tc.discriminator.widths = parse_size_list(kv.get("model.disc_widths", "32,32"));
  tc.discriminator.channels = kv.get_size("model.disc_channels", 8);
  tc.discriminator.bottleneck = kv.get_size("model.disc_bottleneck", 8);
  tc.classifier.widths = parse_size_list(kv.get("model.cls_widths", "2,16,1"));
  tc.classifier.conv_channels1 = kv.get_size("model.cls_channels1", 16);
  tc.classifier.conv_channels2 = kv.get_size("model.cls_channels2", 8);
  tc.classifier.dense_width = kv.get_size("model.cls_dense", 32);

  DatasetSpec& ds = tc.dataset;
  ds.kind = dataset_kind_from_name(kv.get("data.kind"));
  const auto pair2 = [&kv](const std::string& key, double* out, double dx, double dy) {
    const std::string s = kv.get(key, "");
    if (s.empty()) {
      out[0] = dx;
      out[1] = dy;
      return;
    }
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw InvalidConfig("key " + key + ": expected x,y");
    out[0] = std::stod(s.substr(0, comma));
    out[1] = std::stod(s.substr(comma + 1));
  };
  pair2("data.mu0", ds.mu0, -2.0, 0.0);
  pair2("data.mu1", ds.mu1, 2.0, 0.0);
  ds.sigma = kv.get_double("data.sigma", 1.0);
  ds.radius0 = kv.get_double("data.radius0", 1.0);
  ds.radius1 = kv.get_double("data.radius1", 2.5);
  ds.ring_sigma = kv.get_double("data.ring_sigma", 0.1);
  ds.image_side = kv.get_size("data.image_side", 8);
  ds.corpus_path = kv.get("data.path", "");
  ds.seed = tc.seed;

  rc.eval_n_per_class = kv.get_size("eval.n_per_class", 80);
  rc.out_dir = kv.get("out.dir", "out");
  return rc;
}

KvConfig RunConfig::to_kv() const {
  KvConfig kv;
  const TrainConfig& tc = train;
  kv.set("train.scheme", scheme_name(tc.scheme));
  kv.set("train.conditioning", conditioning_name(tc.conditioning));
  kv.set_size("train.batch_size", tc.batch_size);
  kv.set_size("train.steps", tc.steps);
  kv.set("train.seed", std::to_string(tc.seed));
  kv.set_size("train.classifier_steps", tc.classifier_steps);
  kv.set_bool("train.classifier_sees_real", tc.classifier_sees_real);
  kv.set_bool("train.gan_minimax", tc.gan_minimax);
  kv.set_double("began.gamma", tc.began_init.gamma);
  kv.set_double("began.lambda_k", tc.began_init.lambda_k);
  kv.set_double("began.k0", tc.began_init.k_t);
  kv.set_double("vacgan.vartheta", tc.weights.vartheta);
  kv.set_double("vacgan.zeta", tc.weights.zeta);
  const auto write_opt = [&kv](const std::string& prefix, const OptimizerConfig& oc) {
    kv.set(prefix + ".kind", oc.kind == OptimizerConfig::Kind::adam ? "adam"
                                                                    : "nesterov_momentum");
    kv.set_double(prefix + ".lr", oc.learning_rate);
    kv.set_double(prefix + ".beta1", oc.beta1);
    kv.set_double(prefix + ".beta2", oc.beta2);
    kv.set_double(prefix + ".momentum", oc.momentum);
  };
  write_opt("opt.g", tc.opt_g);
  write_opt("opt.d", tc.opt_d);
  write_opt("opt.c", tc.opt_c);
  kv.set_size("model.latent_dim", tc.generator.latent_dim);
  kv.set("model.gen_widths", fmt_size_list(tc.generator.widths));
  kv.set_size("model.gen_channels", tc.generator.channels);
  kv.set("model.disc_widths", fmt_size_list(tc.discriminator.widths));
  kv.set_size("model.disc_channels", tc.discriminator.channels);
  kv.set_size("model.disc_bottleneck", tc.discriminator.bottleneck);
  kv.set("model.cls_widths", fmt_size_list(tc.classifier.widths));
  kv.set_size("model.cls_channels1", tc.classifier.conv_channels1);
  kv.set_size("model.cls_channels2", tc.classifier.conv_channels2);
  kv.set_size("model.cls_dense", tc.classifier.dense_width);
  kv.set("data.kind", dataset_kind_name(tc.dataset.kind));
  kv.set("data.mu0", fmt_double(tc.dataset.mu0[0]) + "," + fmt_double(tc.dataset.mu0[1]));
  kv.set("data.mu1", fmt_double(tc.dataset.mu1[0]) + "," + fmt_double(tc.dataset.mu1[1]));
  kv.set_double("data.sigma", tc.dataset.sigma);
  kv.set_double("data.radius0", tc.dataset.radius0);
  kv.set_double("data.radius1", tc.dataset.radius1);
  kv.set_double("data.ring_sigma", tc.dataset.ring_sigma);
  kv.set_size("data.image_side", tc.dataset.image_side);
  kv.set("data.path", tc.dataset.corpus_path);
  kv.set_size("eval.n_per_class", eval_n_per_class);
  kv.set("out.dir", out_dir);
  return kv;
}

}  // namespace vacgan
