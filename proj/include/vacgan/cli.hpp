#pragma once

#include <optional>
#include <string>

namespace vacgan::cli {

inline constexpr int kOk = 0;
inline constexpr int kConfigError = 1;
inline constexpr int kRuntimeError = 2;
inline constexpr int kVerifyFailed = 3;

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed_override,
              std::optional<std::string> out_override);

// suite: prop1 | thm1 | thm2. steps only applies to prop1.
int cmd_verify(const std::string& suite, const std::string& out_dir, std::uint64_t seed,
               std::size_t prop1_steps = 5000);

int cmd_eval(const std::string& run_dir, std::optional<std::string> out_override,
             std::optional<std::size_t> n_per_class);

int cmd_compare(const std::string& dir_a, const std::string& dir_b,
                std::optional<std::string> out_override);

}  // namespace vacgan::cli
