#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fastrl/repo/repository.hpp"
#include "fastrl/sac/policy.hpp"
#include "fastrl/sim/env.hpp"
#include "fastrl/sim/scripted.hpp"

namespace fastrl::eval {

// Per-episode racing metrics. distance is gross forward progress along the
// centerline (backing up never subtracts); net progress is kept separately.
struct EpisodeMetrics {
  double distance = 0.0;
  double net_distance = 0.0;
  double reward = 0.0;
  double laps = 0.0;  // fractional: gross forward progress / track length
  double mean_speed = 0.0;
  double duration = 0.0;  // seconds
};

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;  // population (divide by N)
};

struct EvalReport {
  Stat distance, reward, laps, mean_speed;
  int n_episodes = 0;
  std::vector<uint64_t> seeds;
  std::map<std::string, std::string> config_snapshot;
  std::vector<EpisodeMetrics> episodes;
};

// Runs one already-reset episode to completion.
EpisodeMetrics run_episode(sim::Env& env, const sim::DriverFn& actor, core::Rng& rng);

// Deterministic-mode evaluation of a policy over n_episodes; episode i draws
// its seed from seeds[i % seeds.size()] mixed with i. Episodes run in
// parallel, each in its own environment instance.
EvalReport evaluate(const sac::PolicyHandle& policy, const sim::Track& track,
                    const sim::EnvConfig& env_config, int n_episodes,
                    const std::vector<uint64_t>& seeds);

EvalReport evaluate_actor(const sim::DriverFn& actor, const sim::Track& track,
                          const sim::EnvConfig& env_config, int n_episodes,
                          const std::vector<uint64_t>& seeds);

// Every frozen source policy plus a uniform-random policy, run directly on
// the target environment with no training.
std::vector<std::pair<std::string, EvalReport>> one_shot_eval(
    const repo::RepositoryIndex& index, const sim::Track& track,
    const sim::EnvConfig& env_config, int n_episodes, const std::vector<uint64_t>& seeds);

Stat aggregate(const std::vector<double>& values);

uint64_t episode_seed(const std::vector<uint64_t>& seeds, int episode);

}  // namespace fastrl::eval
