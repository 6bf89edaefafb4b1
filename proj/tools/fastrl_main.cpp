// fastrl command line: dataset generation, autoencoder and policy training,
// similarity-gated transfer runs, evaluation and hyperparameter search.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fastrl/cli/commands.hpp"
#include "fastrl/cli/config.hpp"
#include "fastrl/errors.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out;
  std::string mode = "baseline";
};

fastrl::cli::ExperimentConfig load_config(const GlobalArgs& args) {
  fastrl::cli::ExperimentConfig cfg;
  if (!args.config_path.empty())
    cfg = fastrl::cli::load_experiment_config(args.config_path);
  if (args.seed) cfg.seed = *args.seed;  // flag > file > default
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"similarity-gated policy transfer for 2D racing tasks"};
  app.require_subcommand(1);

  GlobalArgs args;
  app.add_option("--config", args.config_path, "experiment config file")
      ->configurable(false);
  app.add_option("--seed", args.seed, "training seed (overrides config)");
  app.add_option("--out", args.out, "output directory (skips the timestamped layout)");

  auto* gen = app.add_subcommand("gen-dataset", "roll out a policy and save frame stacks");
  auto* ae = app.add_subcommand("train-ae", "train (or grid-search) the frame autoencoder");
  auto* src = app.add_subcommand("train-source", "train a source policy and freeze it");
  auto* tgt = app.add_subcommand("train-target", "train the target task policy");
  tgt->add_option("--mode", args.mode, "baseline | F | FT")->default_val("baseline");
  auto* ev = app.add_subcommand("evaluate", "evaluate a policy or the whole repository");
  auto* se = app.add_subcommand("search", "two-phase or joint hyperparameter search");
  for (auto* sub : {gen, ae, src, tgt, ev, se}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    fastrl::cli::ExperimentConfig cfg = load_config(args);
    if (gen->parsed()) return fastrl::cli::cmd_gen_dataset(cfg, args.out, std::cout);
    if (ae->parsed()) return fastrl::cli::cmd_train_autoencoder(cfg, args.out, std::cout);
    if (src->parsed()) return fastrl::cli::cmd_train_source(cfg, args.out, std::cout);
    if (tgt->parsed())
      return fastrl::cli::cmd_train_target(cfg, args.mode, args.out, std::cout);
    if (ev->parsed()) return fastrl::cli::cmd_evaluate(cfg, args.out, std::cout);
    if (se->parsed()) return fastrl::cli::cmd_search(cfg, args.out, std::cout);
    return 2;
  } catch (const fastrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const fastrl::VersionMismatch& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const fastrl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
