#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fastrl/cli/config.hpp"
#include "fastrl/sac/learner.hpp"

namespace fastrl::cli {

// Directory for a command's outputs: the override verbatim when given,
// otherwise <output.dir>/<output.name>/<timestamp-N>.
std::string resolve_output_dir(const ExperimentConfig& cfg, const std::string& override_dir);

// Full resolved config plus a [manifest] section (command, config hash and
// any extras); the file reloads as a config, so any run can be reproduced
// from its manifest alone.
void write_manifest(const std::string& dir, const ExperimentConfig& cfg,
                    const std::string& command,
                    const std::map<std::string, std::string>& extras);
std::map<std::string, std::string> read_manifest_extras(const std::string& path);

// Applies one dotted search assignment like "sac.learning_rate" = "1e-3".
void apply_search_assignment(ExperimentConfig& cfg, const std::string& key,
                             const std::string& value);

using Assignment = std::map<std::string, std::string>;

// Deterministic trial enumeration: full Cartesian product for grid, or
// n_samples seeded draws for random.
std::vector<Assignment> enumerate_trials(
    const std::map<std::string, std::vector<std::string>>& values,
    const std::string& strategy, int n_samples, uint64_t seed);

struct TrialRun {
  double mean_ar = 0.0;
  uint64_t curve_hash = 0;
  uint64_t policy_hash = 0;
  int64_t steps = 0;
};

// One search trial end to end: train (baseline or transfer), then evaluate.
TrialRun run_search_trial(const ExperimentConfig& cfg, bool use_transfer, std::ostream& log);

// Command entry points; all return a process exit code (0 ok, they throw
// ConfigError for config problems which main maps to 2, anything else to 3).
int cmd_gen_dataset(ExperimentConfig cfg, const std::string& out_dir, std::ostream& log);
int cmd_train_autoencoder(ExperimentConfig cfg, const std::string& out_dir, std::ostream& log);
int cmd_train_source(ExperimentConfig cfg, const std::string& out_dir, std::ostream& log);
int cmd_train_target(ExperimentConfig cfg, const std::string& mode, const std::string& out_dir,
                     std::ostream& log);
int cmd_evaluate(ExperimentConfig cfg, const std::string& out_dir, std::ostream& log);
int cmd_search(ExperimentConfig cfg, const std::string& out_dir, std::ostream& log);

}  // namespace fastrl::cli
