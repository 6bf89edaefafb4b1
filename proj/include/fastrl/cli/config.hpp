#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fastrl/core/textio.hpp"
#include "fastrl/embed/autoencoder.hpp"
#include "fastrl/embed/representation.hpp"
#include "fastrl/sac/learner.hpp"
#include "fastrl/sim/env.hpp"
#include "fastrl/sim/track.hpp"
#include "fastrl/transfer/pipeline.hpp"

namespace fastrl::cli {

struct EnvSection {
  std::string track = "oval";  // built-in name or path to a .track file
  std::string description;     // task text; defaults per built-in track
  double dt = 0.1;
  double max_duration = 150.0;
  int n_vehicles_min = 1;
  int n_vehicles_max = 5;
  int observation_rows = 5;
  double reward_a = 1.0;
  double reward_b = 1.0;
  double v_min = 0.0;
  double v_max = 30.0;
  double accel_gain = 4.0;
  double steering_gain = 0.08;
  bool randomize_spawn = true;
  int frame_resolution = 64;
  double camera_extent = 120.0;
};

struct TransferSection {
  int64_t K = 100;
  double theta = 0.5;
  std::string mode = "F";
  std::string repository;  // directory path
  bool source_deterministic = true;
};

struct EmbedSection {
  std::string autoencoder;  // checkpoint path
  int latent_dim = 128;
  int d_text = 128;
  std::string text_overrides;  // optional embedding table path
};

struct AeTrainSection {
  std::string dataset;  // frames file
  embed::AeTrainConfig train;
};

struct DatasetSection {
  std::string mode = "corpus";  // corpus | source
  int episodes = 1000;
  int keep_top = 1;
  std::string policy = "scripted";  // scripted | random | checkpoint path
  std::vector<std::string> tracks;  // corpus mode; defaults to env.track
  double scripted_noise = 0.05;
};

struct EvalSection {
  int n_episodes = 50;
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string policy;     // checkpoint path
  bool one_shot = false;  // evaluate repository sources + random instead
  bool plot = false;
};

struct SearchSection {
  std::string strategy = "grid";  // grid | random
  int n_samples = 8;
  uint64_t search_seed = 7;
  std::string phase = "two";  // two | joint
  int64_t trial_timesteps = 10000;
  int eval_episodes = 10;
  // candidate values per dotted key, e.g. "sac.learning_rate" -> {1e-3, 3e-4}
  std::map<std::string, std::vector<std::string>> values;
};

struct OutputSection {
  std::string dir = "runs";
  std::string name = "exp";
};

struct ExperimentConfig {
  int format_version = 1;
  uint64_t seed = 42;  // training seed default
  EnvSection env;
  sac::SacHyperparams sac;
  TransferSection transfer;
  EmbedSection embed;
  AeTrainSection ae_train;
  DatasetSection dataset;
  EvalSection eval;
  SearchSection search;
  OutputSection output;
};

// Parse + strict-validate (unknown keys or sections are errors).
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);
core::KvFile experiment_config_to_kv(const ExperimentConfig& cfg);

// Default task description for the built-in tracks.
std::string default_description(const std::string& track_name);

sim::EnvConfig to_env_config(const ExperimentConfig& cfg);
sim::Track build_track(const EnvSection& env);

// Derived per-purpose seeds so environment and learner streams stay apart.
uint64_t env_seed(uint64_t run_seed);
uint64_t learner_seed(uint64_t run_seed);

transfer::TransferConfig to_transfer_config(const TransferSection& ts);

}  // namespace fastrl::cli
