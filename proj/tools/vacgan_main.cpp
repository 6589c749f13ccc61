#include <CLI11.hpp>

#include <cstdlib>
#include <optional>
#include <string>

#include "vacgan/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"VAC+GAN experimentation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, suite, run_dir, dir_a, dir_b;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_per_class;
  std::optional<std::string> out_opt;
  std::size_t verify_steps = 5000;

  auto* train = app.add_subcommand("train", "train a GAN per a config file");
  train->add_option("--config", config_path, "config file path")->required();
  auto* train_seed = train->add_option("--seed", "seed override");
  auto* train_out = train->add_option("--out", out_dir, "output directory override");

  auto* verify = app.add_subcommand("verify", "run a theorem verification suite");
  verify->add_option("--suite", suite, "prop1 | thm1 | thm2")->required();
  auto* verify_seed = verify->add_option("--seed", "rng seed (default 0)");
  verify->add_option("--out", out_dir, "output directory")->default_val("verify_out");
  verify->add_option("--steps", verify_steps, "prop1 classifier training steps");

  auto* eval = app.add_subcommand("eval", "evaluate a trained run directory");
  eval->add_option("--run", run_dir, "run directory with config.txt and checkpoints")
      ->required();
  auto* eval_out = eval->add_option("--out", out_dir, "output directory override");
  auto* eval_n = eval->add_option("--n-per-class", "samples per class (default from config)");

  auto* compare = app.add_subcommand("compare", "compare two evaluated runs");
  compare->add_option("run_a", dir_a, "first run directory")->required();
  compare->add_option("run_b", dir_b, "second run directory")->required();
  auto* compare_out = compare->add_option("--out", out_dir, "output directory override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : vacgan::cli::kConfigError;
  }

  if (train->parsed()) {
    if (train_seed->count()) seed = train_seed->as<std::uint64_t>();
    if (train_out->count()) out_opt = out_dir;
    return vacgan::cli::cmd_train(config_path, seed, out_opt);
  }
  if (verify->parsed()) {
    const std::uint64_t s = verify_seed->count() ? verify_seed->as<std::uint64_t>() : 0;
    return vacgan::cli::cmd_verify(suite, out_dir, s, verify_steps);
  }
  if (eval->parsed()) {
    if (eval_out->count()) out_opt = out_dir;
    if (eval_n->count()) n_per_class = eval_n->as<std::size_t>();
    return vacgan::cli::cmd_eval(run_dir, out_opt, n_per_class);
  }
  if (compare->parsed()) {
    if (compare_out->count()) out_opt = out_dir;
    return vacgan::cli::cmd_compare(dir_a, dir_b, out_opt);
  }
  return vacgan::cli::kConfigError;
}
