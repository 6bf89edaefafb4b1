#include "fastrl/eval/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "fastrl/core/hash.hpp"
#include "fastrl/errors.hpp"

namespace fastrl::eval {

Stat aggregate(const std::vector<double>& values) {
  Stat s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

uint64_t episode_seed(const std::vector<uint64_t>& seeds, int episode) {
  const uint64_t base = seeds.empty() ? 0x9e3779b97f4a7c15ull
                                      : seeds[static_cast<std::size_t>(episode) % seeds.size()];
  uint64_t state = base + 0xb5ad4eceda1ce2a9ull * static_cast<uint64_t>(episode);
  return core::splitmix64(state);
}

EpisodeMetrics run_episode(sim::Env& env, const sim::DriverFn& actor, core::Rng& rng) {
  EpisodeMetrics m;
  const double L = env.track().total_length();
  const double dt = env.config().episode.dt;
  sim::Observation obs = env.observe();
  double path_len = 0.0;
  while (!env.episode_done()) {
    sim::StepResult sr = env.step(actor(env, obs, rng));
    m.reward += sr.reward;
    m.net_distance += sr.info.distance_delta;
    if (sr.info.distance_delta > 0) m.distance += sr.info.distance_delta;
    path_len += env.ego().speed * dt;
    obs = std::move(sr.obs);
  }
  m.duration = env.elapsed_seconds();
  m.laps = L > 0 ? m.distance / L : 0.0;
  m.mean_speed = m.duration > 0 ? path_len / m.duration : 0.0;
  return m;
}

EvalReport evaluate_actor(const sim::DriverFn& actor, const sim::Track& track,
                          const sim::EnvConfig& env_config, int n_episodes,
                          const std::vector<uint64_t>& seeds) {
  if (n_episodes < 1) throw ConfigError("n_episodes must be at least 1");
  EvalReport report;
  report.n_episodes = n_episodes;
  report.seeds = seeds;
  report.episodes.resize(n_episodes);

  std::exception_ptr first_error = nullptr;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_episodes; ++i) {
    try {
      const uint64_t seed = episode_seed(seeds, i);
      sim::Env env(track, env_config, seed);
      env.reset_seeded(seed);
      core::Rng rng(core::fnv1a64("eval-actor", seed));
      report.episodes[i] = run_episode(env, actor, rng);
    } catch (...) {
#pragma omp critical
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<double> d, r, l, s;
  for (const auto& ep : report.episodes) {
    d.push_back(ep.distance);
    r.push_back(ep.reward);
    l.push_back(ep.laps);
    s.push_back(ep.mean_speed);
  }
  report.distance = aggregate(d);
  report.reward = aggregate(r);
  report.laps = aggregate(l);
  report.mean_speed = aggregate(s);
  return report;
}

EvalReport evaluate(const sac::PolicyHandle& policy, const sim::Track& track,
                    const sim::EnvConfig& env_config, int n_episodes,
                    const std::vector<uint64_t>& seeds) {
  sim::DriverFn actor = [&policy](const sim::Env&, const sim::Observation& obs,
                                  core::Rng& rng) {
    return sac::select_action(policy, obs, /*deterministic=*/true, rng);
  };
  EvalReport report = evaluate_actor(actor, track, env_config, n_episodes, seeds);
  report.config_snapshot["policy"] = policy.id();
  report.config_snapshot["track"] = track.name();
  return report;
}

std::vector<std::pair<std::string, EvalReport>> one_shot_eval(
    const repo::RepositoryIndex& index, const sim::Track& track,
    const sim::EnvConfig& env_config, int n_episodes, const std::vector<uint64_t>& seeds) {
  std::vector<std::pair<std::string, EvalReport>> out;
  for (const auto& rec : index.records()) {
    EvalReport rep = evaluate(rec.policy, track, env_config, n_episodes, seeds);
    rep.config_snapshot["policy"] = rec.name;
    out.emplace_back(rec.name, std::move(rep));
  }
  sim::DriverFn random_actor = sim::random_driver();
  EvalReport rnd = evaluate_actor(random_actor, track, env_config, n_episodes, seeds);
  rnd.config_snapshot["policy"] = "random";
  out.emplace_back("random", std::move(rnd));
  return out;
}

}  // namespace fastrl::eval
