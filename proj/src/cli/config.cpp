#include "fastrl/cli/config.hpp"

#include <algorithm>
#include <set>

#include "fastrl/core/hash.hpp"
#include "fastrl/errors.hpp"
#include "fastrl/sim/builtin_tracks.hpp"

namespace fastrl::cli {

namespace {

const std::map<std::string, std::set<std::string>>& section_schema() {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"", {"format_version", "seed"}},
      {"env",
       {"track", "description", "dt", "max_duration", "n_vehicles_min", "n_vehicles_max",
        "n_vehicles", "observation_rows", "reward_a", "reward_b", "v_min", "v_max",
        "accel_gain", "steering_gain", "randomize_spawn", "frame_resolution",
        "camera_extent"}},
      {"sac",
       {"learning_rate", "batch_size", "gamma", "tau", "alpha", "gradient_steps",
        "learning_starts", "replay_capacity", "total_timesteps", "hidden"}},
      {"transfer", {"K", "theta", "mode", "repository", "source_deterministic"}},
      {"embed", {"autoencoder", "latent_dim", "d_text", "text_overrides"}},
      {"ae_train",
       {"dataset", "learning_rate", "batch_size", "weight_decay", "max_epochs", "patience",
        "divergence_threshold", "train_frac", "val_frac", "test_frac"}},
      {"dataset", {"mode", "episodes", "keep_top", "policy", "tracks", "scripted_noise"}},
      {"eval", {"n_episodes", "seeds", "policy", "one_shot", "plot"}},
      {"search",
       {"strategy", "n_samples", "search_seed", "phase", "trial_timesteps",
        "eval_episodes"}},
      {"output", {"dir", "name"}},
      // written by commands; tolerated so manifests reload as configs
      {"manifest", {}},
  };
  return schema;
}

bool is_search_value_key(const std::string& key) {
  return key.rfind("sac.", 0) == 0 || key.rfind("transfer.", 0) == 0;
}

void check_known_keys(const core::KvFile& kv) {
  const auto& schema = section_schema();
  for (const auto& section : kv.section_order()) {
    auto it = schema.find(section);
    if (it == schema.end())
      throw ConfigError("unknown config section [" + section + "]");
    if (section == "manifest") continue;
    for (const auto& key : kv.keys(section)) {
      if (section == "search" && is_search_value_key(key)) continue;
      if (!it->second.count(key))
        throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
    }
  }
}

std::vector<uint64_t> parse_seed_list(const std::string& s) {
  std::vector<uint64_t> out;
  for (const auto& part : core::split(s, ','))
    out.push_back(static_cast<uint64_t>(core::parse_int(part)));
  return out;
}

}  // namespace

std::string default_description(const std::string& track_name) {
  // task texts follow the environment family's documentation; the two
  // racetrack layouts share one objective and one description
  static const std::map<std::string, std::string> texts = {
      {"straight_traffic",
       "The ego-vehicle is driving on a multilane highway populated with other vehicles. "
       "The agent's objective is to reach a high speed while avoiding collisions with "
       "neighbouring vehicles."},
      {"lane_centering",
       "The ego-veichle is driving on a single lane road which is not straight. The "
       "agent's objective is to maintain the car on the roadway."},
      {"merge_like",
       "The ego-vehicle starts on a main highway but soon approaches a road junction with "
       "incoming vehicles on the access ramp. The agent's objective is now to maintain a "
       "high speed while making room for the vehicles so that they can safely merge in the "
       "traffic."},
      {"cross_like",
       "The ego-veichle if approaching an intersection. It is an intersection negotiation "
       "task with dense traffic. The agent's objective is to cross the intersection "
       "without collisions."},
      {"ring_like",
       "The ego-vehicle if approaching a roundabout with flowing traffic. It will follow "
       "its planned route automatically, but has to handle lane changes and longitudinal "
       "control to pass the roundabout as fast as possible while avoiding collisions."},
      {"oval",
       "The ego-veichle is driving on a circuit. It is an oval circuit. The objective is "
       "to complete the track as fast as possible without touching the edges."},
      {"mixed",
       "The ego-veichle is driving on a racetrack. The agent's objective is to follow the "
       "tracks while avoiding collisions with other vehicles."},
      {"long_complex",
       "The ego-veichle is driving on a racetrack. The agent's objective is to follow the "
       "tracks while avoiding collisions with other vehicles."},
  };
  auto it = texts.find(track_name);
  return it == texts.end() ? "The ego-vehicle is driving on a custom track." : it->second;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  core::KvFile kv = core::KvFile::parse(text);
  check_known_keys(kv);

  ExperimentConfig cfg;
  cfg.format_version = static_cast<int>(core::parse_int(kv.get_or("", "format_version", "1")));
  if (cfg.format_version != 1)
    throw VersionMismatch("config format_version " + std::to_string(cfg.format_version));
  cfg.seed = static_cast<uint64_t>(core::parse_int(kv.get_or("", "seed", "42")));

  auto dbl = [&](const char* sec, const char* key, double fallback) {
    auto v = kv.get(sec, key);
    return v ? core::parse_double(*v) : fallback;
  };
  auto igt = [&](const char* sec, const char* key, int64_t fallback) {
    auto v = kv.get(sec, key);
    return v ? core::parse_int(*v) : fallback;
  };
  auto bl = [&](const char* sec, const char* key, bool fallback) {
    auto v = kv.get(sec, key);
    return v ? core::parse_bool(*v) : fallback;
  };
  auto str = [&](const char* sec, const char* key, const std::string& fallback) {
    return kv.get_or(sec, key, fallback);
  };

  // env (track-dependent defaults fill in unless explicitly set)
  cfg.env.track = str("env", "track", "oval");
  if (cfg.env.track == "lane_centering") {
    cfg.env.observation_rows = 1;
    cfg.env.n_vehicles_min = cfg.env.n_vehicles_max = 1;
  }
  cfg.env.description = str("env", "description", default_description(cfg.env.track));
  cfg.env.dt = dbl("env", "dt", cfg.env.dt);
  cfg.env.max_duration = dbl("env", "max_duration", cfg.env.max_duration);
  if (kv.has("env", "n_vehicles")) {
    const int n = static_cast<int>(igt("env", "n_vehicles", 1));
    cfg.env.n_vehicles_min = cfg.env.n_vehicles_max = n;
  }
  cfg.env.n_vehicles_min = static_cast<int>(igt("env", "n_vehicles_min", cfg.env.n_vehicles_min));
  cfg.env.n_vehicles_max = static_cast<int>(igt("env", "n_vehicles_max", cfg.env.n_vehicles_max));
  cfg.env.observation_rows =
      static_cast<int>(igt("env", "observation_rows", cfg.env.observation_rows));
  cfg.env.reward_a = dbl("env", "reward_a", cfg.env.reward_a);
  cfg.env.reward_b = dbl("env", "reward_b", cfg.env.reward_b);
  cfg.env.v_min = dbl("env", "v_min", cfg.env.v_min);
  cfg.env.v_max = dbl("env", "v_max", cfg.env.v_max);
  cfg.env.accel_gain = dbl("env", "accel_gain", cfg.env.accel_gain);
  cfg.env.steering_gain = dbl("env", "steering_gain", cfg.env.steering_gain);
  cfg.env.randomize_spawn = bl("env", "randomize_spawn", cfg.env.randomize_spawn);
  cfg.env.frame_resolution = static_cast<int>(igt("env", "frame_resolution", 64));
  cfg.env.camera_extent = dbl("env", "camera_extent", cfg.env.camera_extent);

  // sac
  cfg.sac.learning_rate = dbl("sac", "learning_rate", cfg.sac.learning_rate);
  cfg.sac.batch_size = static_cast<int>(igt("sac", "batch_size", cfg.sac.batch_size));
  cfg.sac.gamma = dbl("sac", "gamma", cfg.sac.gamma);
  cfg.sac.tau = dbl("sac", "tau", cfg.sac.tau);
  cfg.sac.alpha = dbl("sac", "alpha", cfg.sac.alpha);
  cfg.sac.gradient_steps = static_cast<int>(igt("sac", "gradient_steps", cfg.sac.gradient_steps));
  cfg.sac.learning_starts = igt("sac", "learning_starts", cfg.sac.learning_starts);
  cfg.sac.replay_capacity =
      static_cast<std::size_t>(igt("sac", "replay_capacity", cfg.sac.replay_capacity));
  cfg.sac.total_timesteps = igt("sac", "total_timesteps", cfg.sac.total_timesteps);
  cfg.sac.hidden = static_cast<int>(igt("sac", "hidden", cfg.sac.hidden));
  cfg.sac.validate();

  // transfer
  cfg.transfer.K = igt("transfer", "K", cfg.transfer.K);
  cfg.transfer.theta = dbl("transfer", "theta", cfg.transfer.theta);
  cfg.transfer.mode = str("transfer", "mode", cfg.transfer.mode);
  cfg.transfer.repository = str("transfer", "repository", "");
  cfg.transfer.source_deterministic =
      bl("transfer", "source_deterministic", cfg.transfer.source_deterministic);
  if (cfg.transfer.K < 1) throw ConfigError("transfer.K must be at least 1");
  embed::rep_mode_from_string(cfg.transfer.mode);  // validates

  // embed
  cfg.embed.autoencoder = str("embed", "autoencoder", "");
  cfg.embed.latent_dim = static_cast<int>(igt("embed", "latent_dim", cfg.embed.latent_dim));
  cfg.embed.d_text = static_cast<int>(igt("embed", "d_text", cfg.embed.d_text));
  cfg.embed.text_overrides = str("embed", "text_overrides", "");

  // ae_train
  cfg.ae_train.dataset = str("ae_train", "dataset", "");
  cfg.ae_train.train.learning_rate =
      dbl("ae_train", "learning_rate", cfg.ae_train.train.learning_rate);
  cfg.ae_train.train.batch_size =
      static_cast<int>(igt("ae_train", "batch_size", cfg.ae_train.train.batch_size));
  cfg.ae_train.train.weight_decay =
      dbl("ae_train", "weight_decay", cfg.ae_train.train.weight_decay);
  cfg.ae_train.train.max_epochs =
      static_cast<int>(igt("ae_train", "max_epochs", cfg.ae_train.train.max_epochs));
  cfg.ae_train.train.patience =
      static_cast<int>(igt("ae_train", "patience", cfg.ae_train.train.patience));
  cfg.ae_train.train.divergence_threshold =
      dbl("ae_train", "divergence_threshold", cfg.ae_train.train.divergence_threshold);
  cfg.ae_train.train.train_frac = dbl("ae_train", "train_frac", cfg.ae_train.train.train_frac);
  cfg.ae_train.train.val_frac = dbl("ae_train", "val_frac", cfg.ae_train.train.val_frac);
  cfg.ae_train.train.test_frac = dbl("ae_train", "test_frac", cfg.ae_train.train.test_frac);

  // dataset
  cfg.dataset.mode = str("dataset", "mode", cfg.dataset.mode);
  if (cfg.dataset.mode != "corpus" && cfg.dataset.mode != "source")
    throw ConfigError("dataset.mode must be corpus or source");
  cfg.dataset.episodes = static_cast<int>(igt("dataset", "episodes", cfg.dataset.episodes));
  cfg.dataset.keep_top = static_cast<int>(igt("dataset", "keep_top", cfg.dataset.keep_top));
  cfg.dataset.policy = str("dataset", "policy", cfg.dataset.policy);
  const std::string tracks = str("dataset", "tracks", "");
  if (!core::trim(tracks).empty()) cfg.dataset.tracks = core::split(tracks, ',');
  cfg.dataset.scripted_noise = dbl("dataset", "scripted_noise", cfg.dataset.scripted_noise);

  // eval
  cfg.eval.n_episodes = static_cast<int>(igt("eval", "n_episodes", cfg.eval.n_episodes));
  if (kv.has("eval", "seeds")) cfg.eval.seeds = parse_seed_list(*kv.get("eval", "seeds"));
  cfg.eval.policy = str("eval", "policy", "");
  cfg.eval.one_shot = bl("eval", "one_shot", cfg.eval.one_shot);
  cfg.eval.plot = bl("eval", "plot", cfg.eval.plot);
  if (cfg.eval.n_episodes < 1) throw ConfigError("eval.n_episodes must be at least 1");
  if (cfg.eval.seeds.empty()) throw ConfigError("eval.seeds must not be empty");

  // search
  cfg.search.strategy = str("search", "strategy", cfg.search.strategy);
  if (cfg.search.strategy != "grid" && cfg.search.strategy != "random")
    throw ConfigError("search.strategy must be grid or random");
  cfg.search.n_samples = static_cast<int>(igt("search", "n_samples", cfg.search.n_samples));
  if (cfg.search.n_samples < 1) throw ConfigError("search.n_samples must be at least 1");
  cfg.search.search_seed = static_cast<uint64_t>(igt("search", "search_seed", 7));
  cfg.search.phase = str("search", "phase", cfg.search.phase);
  if (cfg.search.phase != "two" && cfg.search.phase != "joint")
    throw ConfigError("search.phase must be two or joint");
  cfg.search.trial_timesteps = igt("search", "trial_timesteps", cfg.search.trial_timesteps);
  cfg.search.eval_episodes =
      static_cast<int>(igt("search", "eval_episodes", cfg.search.eval_episodes));
  for (const auto& e : kv.entries("search")) {
    if (!is_search_value_key(e.key)) continue;
    auto vals = core::split(e.value, ',');
    if (vals.empty() || (vals.size() == 1 && vals[0].empty()))
      throw ConfigError("search values for " + e.key + " must not be empty");
    cfg.search.values[e.key] = vals;
  }

  // output
  cfg.output.dir = str("output", "dir", cfg.output.dir);
  cfg.output.name = str("output", "name", cfg.output.name);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(core::read_file(path));
}

core::KvFile experiment_config_to_kv(const ExperimentConfig& cfg) {
  core::KvFile kv;
  auto d = core::format_double;
  kv.set("", "format_version", std::to_string(cfg.format_version));
  kv.set("", "seed", std::to_string(cfg.seed));

  kv.set("env", "track", cfg.env.track);
  kv.set("env", "description", cfg.env.description);
  kv.set("env", "dt", d(cfg.env.dt));
  kv.set("env", "max_duration", d(cfg.env.max_duration));
  kv.set("env", "n_vehicles_min", std::to_string(cfg.env.n_vehicles_min));
  kv.set("env", "n_vehicles_max", std::to_string(cfg.env.n_vehicles_max));
  kv.set("env", "observation_rows", std::to_string(cfg.env.observation_rows));
  kv.set("env", "reward_a", d(cfg.env.reward_a));
  kv.set("env", "reward_b", d(cfg.env.reward_b));
  kv.set("env", "v_min", d(cfg.env.v_min));
  kv.set("env", "v_max", d(cfg.env.v_max));
  kv.set("env", "accel_gain", d(cfg.env.accel_gain));
  kv.set("env", "steering_gain", d(cfg.env.steering_gain));
  kv.set("env", "randomize_spawn", cfg.env.randomize_spawn ? "true" : "false");
  kv.set("env", "frame_resolution", std::to_string(cfg.env.frame_resolution));
  kv.set("env", "camera_extent", d(cfg.env.camera_extent));

  kv.set("sac", "learning_rate", d(cfg.sac.learning_rate));
  kv.set("sac", "batch_size", std::to_string(cfg.sac.batch_size));
  kv.set("sac", "gamma", d(cfg.sac.gamma));
  kv.set("sac", "tau", d(cfg.sac.tau));
  kv.set("sac", "alpha", d(cfg.sac.alpha));
  kv.set("sac", "gradient_steps", std::to_string(cfg.sac.gradient_steps));
  kv.set("sac", "learning_starts", std::to_string(cfg.sac.learning_starts));
  kv.set("sac", "replay_capacity", std::to_string(cfg.sac.replay_capacity));
  kv.set("sac", "total_timesteps", std::to_string(cfg.sac.total_timesteps));
  kv.set("sac", "hidden", std::to_string(cfg.sac.hidden));

  kv.set("transfer", "K", std::to_string(cfg.transfer.K));
  kv.set("transfer", "theta", d(cfg.transfer.theta));
  kv.set("transfer", "mode", cfg.transfer.mode);
  kv.set("transfer", "repository", cfg.transfer.repository);
  kv.set("transfer", "source_deterministic",
         cfg.transfer.source_deterministic ? "true" : "false");

  kv.set("embed", "autoencoder", cfg.embed.autoencoder);
  kv.set("embed", "latent_dim", std::to_string(cfg.embed.latent_dim));
  kv.set("embed", "d_text", std::to_string(cfg.embed.d_text));
  kv.set("embed", "text_overrides", cfg.embed.text_overrides);

  kv.set("ae_train", "dataset", cfg.ae_train.dataset);
  kv.set("ae_train", "learning_rate", d(cfg.ae_train.train.learning_rate));
  kv.set("ae_train", "batch_size", std::to_string(cfg.ae_train.train.batch_size));
  kv.set("ae_train", "weight_decay", d(cfg.ae_train.train.weight_decay));
  kv.set("ae_train", "max_epochs", std::to_string(cfg.ae_train.train.max_epochs));
  kv.set("ae_train", "patience", std::to_string(cfg.ae_train.train.patience));
  kv.set("ae_train", "divergence_threshold", d(cfg.ae_train.train.divergence_threshold));
  kv.set("ae_train", "train_frac", d(cfg.ae_train.train.train_frac));
  kv.set("ae_train", "val_frac", d(cfg.ae_train.train.val_frac));
  kv.set("ae_train", "test_frac", d(cfg.ae_train.train.test_frac));

  kv.set("dataset", "mode", cfg.dataset.mode);
  kv.set("dataset", "episodes", std::to_string(cfg.dataset.episodes));
  kv.set("dataset", "keep_top", std::to_string(cfg.dataset.keep_top));
  kv.set("dataset", "policy", cfg.dataset.policy);
  std::string tracks;
  for (std::size_t i = 0; i < cfg.dataset.tracks.size(); ++i) {
    if (i) tracks += ",";
    tracks += cfg.dataset.tracks[i];
  }
  kv.set("dataset", "tracks", tracks);
  kv.set("dataset", "scripted_noise", d(cfg.dataset.scripted_noise));

  kv.set("eval", "n_episodes", std::to_string(cfg.eval.n_episodes));
  std::string seeds;
  for (std::size_t i = 0; i < cfg.eval.seeds.size(); ++i) {
    if (i) seeds += ",";
    seeds += std::to_string(cfg.eval.seeds[i]);
  }
  kv.set("eval", "seeds", seeds);
  kv.set("eval", "policy", cfg.eval.policy);
  kv.set("eval", "one_shot", cfg.eval.one_shot ? "true" : "false");
  kv.set("eval", "plot", cfg.eval.plot ? "true" : "false");

  kv.set("search", "strategy", cfg.search.strategy);
  kv.set("search", "n_samples", std::to_string(cfg.search.n_samples));
  kv.set("search", "search_seed", std::to_string(cfg.search.search_seed));
  kv.set("search", "phase", cfg.search.phase);
  kv.set("search", "trial_timesteps", std::to_string(cfg.search.trial_timesteps));
  kv.set("search", "eval_episodes", std::to_string(cfg.search.eval_episodes));
  for (const auto& [key, vals] : cfg.search.values) {
    std::string joined;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (i) joined += ",";
      joined += vals[i];
    }
    kv.set("search", key, joined);
  }

  kv.set("output", "dir", cfg.output.dir);
  kv.set("output", "name", cfg.output.name);
  return kv;
}

sim::EnvConfig to_env_config(const ExperimentConfig& cfg) {
  sim::EnvConfig ec;
  ec.episode.dt = cfg.env.dt;
  ec.episode.max_duration = cfg.env.max_duration;
  ec.episode.n_vehicles_min = cfg.env.n_vehicles_min;
  ec.episode.n_vehicles_max = cfg.env.n_vehicles_max;
  ec.episode.reward_a = cfg.env.reward_a;
  ec.episode.reward_b = cfg.env.reward_b;
  ec.episode.randomize_spawn = cfg.env.randomize_spawn;
  ec.vehicle.v_min = cfg.env.v_min;
  ec.vehicle.v_max = cfg.env.v_max;
  ec.vehicle.accel_gain = cfg.env.accel_gain;
  ec.vehicle.steering_gain = cfg.env.steering_gain;
  ec.ranges.velocity = cfg.env.v_max;
  ec.render.resolution = cfg.env.frame_resolution;
  ec.render.camera_extent = cfg.env.camera_extent;
  ec.observation_rows = cfg.env.observation_rows;
  return ec;
}

sim::Track build_track(const EnvSection& env) {
  if (sim::is_built_in_track(env.track)) return sim::Track(sim::built_in_track_spec(env.track));
  return sim::Track(sim::parse_track_spec(core::read_file(env.track)));
}

uint64_t env_seed(uint64_t run_seed) {
  uint64_t s = run_seed ^ 0x68756d616e6f6964ull;
  return core::splitmix64(s);
}

uint64_t learner_seed(uint64_t run_seed) {
  uint64_t s = run_seed ^ 0x6c6561726e657221ull;
  return core::splitmix64(s);
}

transfer::TransferConfig to_transfer_config(const TransferSection& ts) {
  transfer::TransferConfig tc;
  tc.K = ts.K;
  tc.theta = ts.theta;
  tc.mode = embed::rep_mode_from_string(ts.mode);
  tc.source_deterministic = ts.source_deterministic;
  return tc;
}

}  // namespace fastrl::cli
