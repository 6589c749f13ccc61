#pragma once

#include <map>
#include <string>

#include "vacgan/training.hpp"

namespace vacgan {

// Flat key-value configuration: one "key = value" per line, '#' comments,
// dotted section prefixes. Serialization is sorted and canonical, so
// parse -> serialize -> parse is lossless.
class KvConfig {
 public:
  static KvConfig parse(const std::string& text);
  static KvConfig load(const std::string& path);
  std::string serialize() const;

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;  // throws InvalidConfig naming the key
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void set_double(const std::string& key, double value);
  void set_size(const std::string& key, std::size_t value);
  void set_bool(const std::string& key, bool value);

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct RunConfig {
  TrainConfig train;
  std::size_t eval_n_per_class = 80;
  std::string out_dir = "out";

  static RunConfig from_kv(const KvConfig& kv);
  KvConfig to_kv() const;
};

}  // namespace vacgan
