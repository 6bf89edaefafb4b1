#include "fastrl/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

#include "fastrl/core/hash.hpp"
#include "fastrl/errors.hpp"
#include "fastrl/eval/evaluate.hpp"
#include "fastrl/eval/export.hpp"
#include "fastrl/repo/repository.hpp"
#include "fastrl/sim/builtin_tracks.hpp"
#include "fastrl/sim/scripted.hpp"
#include "fastrl/transfer/pipeline.hpp"

namespace fs = std::filesystem;

namespace fastrl::cli {

namespace {

std::string timestamp_dir_name() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return buf;
}

uint64_t config_hash(const ExperimentConfig& cfg) {
  return core::fnv1a64(experiment_config_to_kv(cfg).serialize());
}

uint64_t curve_hash(const sac::LearningCurve& curve) {
  uint64_t h = core::kFnvOffset;
  for (const auto& p : curve) {
    h = core::fnv1a64_bytes(&p.timestep, sizeof(p.timestep), h);
    h = core::fnv1a64_bytes(&p.episodic_reward, sizeof(p.episodic_reward), h);
  }
  return h;
}

sim::DriverFn make_dataset_driver(const ExperimentConfig& cfg,
                                  std::optional<sac::PolicyCheckpoint>& loaded) {
  if (cfg.dataset.policy == "random") return sim::random_driver();
  if (cfg.dataset.policy == "scripted") {
    // fresh target speed each episode keeps frames varied
    const double noise = cfg.dataset.scripted_noise;
    auto state = std::make_shared<std::pair<int64_t, sim::PurePursuitParams>>();
    state->first = -1;
    return [state, noise](const sim::Env& env, const sim::Observation& obs,
                          core::Rng& rng) {
      (void)obs;
      if (env.elapsed_steps() <= state->first || state->first < 0) {
        state->second.lookahead = 8.0;
        state->second.steering_noise = noise;
        state->second.target_speed =
            env.config().vehicle.v_max * rng.uniform(0.35, 0.95);
      }
      state->first = env.elapsed_steps();
      return sim::pure_pursuit_action(env, state->second, rng);
    };
  }
  if (!fs::exists(cfg.dataset.policy))
    throw ConfigError("dataset.policy checkpoint not found: " + cfg.dataset.policy);
  loaded = sac::load_policy(cfg.dataset.policy);
  return repo::driver_from_policy(loaded->policy, /*deterministic=*/false);
}

embed::AutoencoderConfig ae_config_for(const ExperimentConfig& cfg, int resolution) {
  embed::AutoencoderConfig ac;
  ac.resolution = resolution;
  ac.latent_dim = cfg.embed.latent_dim;
  return ac;
}

struct LoadedTransfer {
  repo::RepositoryIndex index;
  embed::Autoencoder ae;
  embed::TextEncoderConfig text_cfg;
  std::optional<embed::TextEmbeddingTable> overrides;
};

LoadedTransfer load_transfer_inputs(const ExperimentConfig& cfg, embed::RepMode mode) {
  if (cfg.transfer.repository.empty())
    throw ConfigError("transfer mode requires transfer.repository");
  if (cfg.embed.autoencoder.empty())
    throw ConfigError("transfer mode requires embed.autoencoder");
  LoadedTransfer lt{repo::RepositoryIndex::load(cfg.transfer.repository),
                    embed::Autoencoder::load(cfg.embed.autoencoder),
                    embed::TextEncoderConfig{cfg.embed.d_text},
                    std::nullopt};
  if (!cfg.embed.text_overrides.empty())
    lt.overrides = embed::TextEmbeddingTable::load(cfg.embed.text_overrides);
  if (!lt.index.representations_ready(mode))
    lt.index.precompute_representations(lt.ae, lt.text_cfg,
                                        lt.overrides ? &*lt.overrides : nullptr, mode);
  return lt;
}

}  // namespace

std::string resolve_output_dir(const ExperimentConfig& cfg, const std::string& override_dir) {
  std::string dir = override_dir;
  if (dir.empty()) {
    const std::string base = cfg.output.dir + "/" + cfg.output.name;
    std::string stamp = timestamp_dir_name();
    dir = base + "/" + stamp;
    for (int i = 1; fs::exists(dir); ++i) dir = base + "/" + stamp + "-" + std::to_string(i);
  }
  fs::create_directories(dir);
  return dir;
}

void write_manifest(const std::string& dir, const ExperimentConfig& cfg,
                    const std::string& command,
                    const std::map<std::string, std::string>& extras) {
  core::KvFile kv = experiment_config_to_kv(cfg);
  kv.set("manifest", "command", command);
  kv.set("manifest", "config_hash", core::hash_hex(config_hash(cfg)));
  for (const auto& [k, v] : extras) kv.set("manifest", k, v);
  kv.save(dir + "/manifest");
}

std::map<std::string, std::string> read_manifest_extras(const std::string& path) {
  core::KvFile kv = core::KvFile::load(path);
  std::map<std::string, std::string> out;
  for (const auto& e : kv.entries("manifest")) out[e.key] = e.value;
  return out;
}

void apply_search_assignment(ExperimentConfig& cfg, const std::string& key,
                             const std::string& value) {
  auto d = [&] { return core::parse_double(value); };
  auto i = [&] { return core::parse_int(value); };
  if (key == "sac.learning_rate") cfg.sac.learning_rate = d();
  else if (key == "sac.batch_size") cfg.sac.batch_size = static_cast<int>(i());
  else if (key == "sac.gamma") cfg.sac.gamma = d();
  else if (key == "sac.tau") cfg.sac.tau = d();
  else if (key == "sac.alpha") cfg.sac.alpha = d();
  else if (key == "sac.gradient_steps") cfg.sac.gradient_steps = static_cast<int>(i());
  else if (key == "sac.learning_starts") cfg.sac.learning_starts = i();
  else if (key == "sac.replay_capacity") cfg.sac.replay_capacity = static_cast<std::size_t>(i());
  else if (key == "sac.total_timesteps") cfg.sac.total_timesteps = i();
  else if (key == "sac.hidden") cfg.sac.hidden = static_cast<int>(i());
  else if (key == "transfer.K") cfg.transfer.K = i();
  else if (key == "transfer.theta") cfg.transfer.theta = d();
  else if (key == "transfer.mode") cfg.transfer.mode = value;
  else if (key == "ae.learning_rate") cfg.ae_train.train.learning_rate = d();
  else if (key == "ae.batch_size") cfg.ae_train.train.batch_size = static_cast<int>(i());
  else if (key == "ae.weight_decay") cfg.ae_train.train.weight_decay = d();
  else throw ConfigError("unknown search key: " + key);
}

std::vector<Assignment> enumerate_trials(
    const std::map<std::string, std::vector<std::string>>& values,
    const std::string& strategy, int n_samples, uint64_t seed) {
  std::vector<Assignment> trials;
  if (values.empty()) {
    trials.push_back({});
    return trials;
  }
  if (strategy == "grid") {
    trials.push_back({});
    for (const auto& [key, vals] : values) {
      std::vector<Assignment> next;
      for (const auto& t : trials) {
        for (const auto& v : vals) {
          Assignment a = t;
          a[key] = v;
          next.push_back(std::move(a));
        }
      }
      trials = std::move(next);
    }
    return trials;
  }
  if (strategy != "random") throw ConfigError("unknown search strategy: " + strategy);
  core::Rng rng(seed);
  for (int s = 0; s < n_samples; ++s) {
    Assignment a;
    for (const auto& [key, vals] : values)
      a[key] = vals[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int64_t>(vals.size()) - 1))];
    trials.push_back(std::move(a));
  }
  return trials;
}

TrialRun run_search_trial(const ExperimentConfig& cfg, bool use_transfer, std::ostream& log) {
  sim::Track track = build_track(cfg.env);
  sim::EnvConfig env_cfg = to_env_config(cfg);
  sim::Env env(track, env_cfg, env_seed(cfg.seed));

  TrialRun out;
  sac::PolicyHandle policy;
  if (use_transfer) {
    const embed::RepMode mode = embed::rep_mode_from_string(cfg.transfer.mode);
    LoadedTransfer lt = load_transfer_inputs(cfg, mode);
    transfer::FastRunConfig frc;
    frc.sac = cfg.sac;
    frc.transfer = to_transfer_config(cfg.transfer);
    frc.target_name = cfg.env.track;
    frc.target_description = cfg.env.description;
    frc.seed = learner_seed(cfg.seed);
    transfer::FastRunResult res = transfer::run_fast_training(
        env, &lt.index, &lt.ae, lt.text_cfg, lt.overrides ? &*lt.overrides : nullptr, frc);
    policy = res.train.policy;
    out.curve_hash = curve_hash(res.train.curve);
    out.policy_hash = res.train.final_param_hash;
    out.steps = res.train.steps_run;
  } else {
    sac::TrainRunResult res =
        sac::train_baseline(env, cfg.sac, learner_seed(cfg.seed));
    policy = res.policy;
    out.curve_hash = curve_hash(res.curve);
    out.policy_hash = res.final_param_hash;
    out.steps = res.steps_run;
  }

  eval::EvalReport report = eval::evaluate(policy, track, env_cfg,
                                           cfg.search.eval_episodes, cfg.eval.seeds);
  out.mean_ar = report.reward.mean;
  log << "  trial: mean AR " << report.reward.mean << " over " << cfg.search.eval_episodes
      << " episodes\n";
  return out;
}

int cmd_gen_dataset(ExperimentConfig cfg, const std::string& out_dir, std::ostream& log) {
  const std::string dir = resolve_output_dir(cfg, out_dir);
  std::vector<std::string> tracks = cfg.dataset.tracks;
  if (tracks.empty()) tracks = {cfg.env.track};

  std::optional<sac::PolicyCheckpoint> loaded;
  sim::DriverFn driver = make_dataset_driver(cfg, loaded);

  std::map<std::string, std::string> extras;
  std::vector<embed::FrameStack> corpus;
  std::vector<std::string> warnings;
  for (const auto& track_name : tracks) {
    ExperimentConfig tcfg = cfg;
    tcfg.env.track = track_name;
    sim::Track track = build_track(tcfg.env);
    sim::EnvConfig env_cfg = to_env_config(tcfg);
    const uint64_t tseed = core::fnv1a64(track_name, core::kFnvOffset ^ cfg.seed);
    sim::Env env(track, env_cfg, env_seed(tseed));
    core::Rng rng(core::fnv1a64("dataset", tseed));

    const int keep = cfg.dataset.mode == "corpus" ? cfg.dataset.episodes
                                                  : cfg.dataset.keep_top;
    auto samples = repo::generate_source_dataset(driver, env, cfg.dataset.episodes, keep,
                                                 rng, &warnings);
    log << "track " << track_name << ": " << samples.size() << " stacks";
    if (!samples.empty()) log << ", best episode reward " << samples.front().episode_reward;
    log << "\n";

    if (cfg.dataset.mode == "corpus") {
      for (auto& s : samples) corpus.push_back(std::move(s.stack));
    } else {
      std::vector<embed::FrameStack> stacks;
      for (auto& s : samples) stacks.push_back(std::move(s.stack));
      const std::string file = dir + "/" + track_name + ".frames";
      embed::save_frame_dataset(stacks, file);
      extras["frames_" + track_name] = core::hash_hex(core::hash_file(file));
    }
  }
  if (cfg.dataset.mode == "corpus") {
    const std::string file = dir + "/corpus.frames";
    embed::save_frame_dataset(corpus, file);
    extras["frames_corpus"] = core::hash_hex(core::hash_file(file));
    extras["corpus_count"] = std::to_string(corpus.size());
    log << "corpus: " << corpus.size() << " stacks -> " << file << "\n";
  }
  for (const auto& w : warnings) log << "warning: " << w << "\n";
  write_manifest(dir, cfg, "gen-dataset", extras);
  log << "outputs in " << dir << "\n";
  return 0;
}

int cmd_train_autoencoder(ExperimentConfig cfg, const std::string& out_dir,
                          std::ostream& log) {
  if (cfg.ae_train.dataset.empty())
    throw ConfigError("train-ae requires ae_train.dataset");
  const std::string dir = resolve_output_dir(cfg, out_dir);
  std::vector<embed::FrameStack> dataset = embed::load_frame_dataset(cfg.ae_train.dataset);
  if (dataset.empty()) throw EmptyDataset("dataset file has no stacks");
  const int resolution = dataset.front().resolution;

  std::map<std::string, std::vector<std::string>> ae_values;
  for (const auto& [k, v] : cfg.search.values)
    if (k.rfind("ae.", 0) == 0) ae_values[k] = v;
  auto trials = enumerate_trials(ae_values, cfg.search.strategy, cfg.search.n_samples,
                                 cfg.search.search_seed);

  struct Row {
    Assignment a;
    double val_mse = 0.0;
    double test_mse = 0.0;
    std::string status = "ok";
  };
  std::vector<Row> rows;
  std::optional<embed::Autoencoder> best;
  double best_val = std::numeric_limits<double>::infinity();
  embed::AeTrainResult best_result;

  for (std::size_t t = 0; t < trials.size(); ++t) {
    ExperimentConfig tcfg = cfg;
    for (const auto& [k, v] : trials[t]) apply_search_assignment(tcfg, k, v);
    embed::Autoencoder ae(ae_config_for(tcfg, resolution));
    ae.init_weights(core::splitmix64(tcfg.seed));
    Row row;
    row.a = trials[t];
    try {
      embed::AeTrainResult res =
          embed::train_autoencoder(ae, dataset, tcfg.ae_train.train, tcfg.seed + t);
      row.val_mse = res.best_val_mse;
      row.test_mse = res.test_mse;
      log << "trial " << t << ": val MSE " << res.best_val_mse << ", test MSE "
          << res.test_mse << " (" << res.curves.size() << " epochs)\n";
      if (res.best_val_mse < best_val) {
        best_val = res.best_val_mse;
        best = std::move(ae);
        best_result = std::move(res);
      }
    } catch (const DivergedTraining& e) {
      row.status = "diverged";
      row.val_mse = std::numeric_limits<double>::infinity();
      log << "trial " << t << ": diverged (" << e.what() << ")\n";
    }
    rows.push_back(std::move(row));
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.val_mse < b.val_mse; });
  std::ostringstream lb;
  lb << "# fastrl-ae-leaderboard v1\n";
  lb << "rank,learning_rate,batch_size,weight_decay,val_mse,test_mse,status\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ExperimentConfig view = cfg;
    for (const auto& [k, v] : rows[i].a) apply_search_assignment(view, k, v);
    lb << i + 1 << "," << core::format_double(view.ae_train.train.learning_rate) << ","
       << view.ae_train.train.batch_size << ","
       << core::format_double(view.ae_train.train.weight_decay) << ","
       << core::format_double(rows[i].val_mse) << ","
       << core::format_double(rows[i].test_mse) << "," << rows[i].status << "\n";
  }
  core::write_file(dir + "/ae_leaderboard.csv", lb.str());

  if (!best) throw DivergedTraining("every autoencoder trial diverged");
  best->save(dir + "/ae.ckpt");
  std::ostringstream curves;
  curves << "# fastrl-ae-curves v1\nepoch,train_mse,val_mse\n";
  for (std::size_t e = 0; e < best_result.curves.size(); ++e)
    curves << e << "," << core::format_double(best_result.curves[e].train_mse) << ","
           << core::format_double(best_result.curves[e].val_mse) << "\n";
  core::write_file(dir + "/ae_curves.csv", curves.str());

  write_manifest(dir, cfg, "train-ae",
                 {{"ae_checkpoint", core::hash_hex(core::hash_file(dir + "/ae.ckpt"))},
                  {"best_val_mse", core::format_double(best_val)}});
  log << "best val MSE " << best_val << ", checkpoint " << dir << "/ae.ckpt\n";
  return 0;
}

int cmd_train_source(ExperimentConfig cfg, const std::string& out_dir, std::ostream& log) {
  const std::string dir = resolve_output_dir(cfg, out_dir);
  sim::Track track = build_track(cfg.env);
  sim::EnvConfig env_cfg = to_env_config(cfg);
  sim::Env env(track, env_cfg, env_seed(cfg.seed));

  log << "training source policy on " << cfg.env.track << " for "
      << cfg.sac.total_timesteps << " steps\n";
  sac::TrainRunResult res = sac::train_baseline(env, cfg.sac, learner_seed(cfg.seed));
  sac::PolicyHandle frozen = res.policy;
  frozen = sac::PolicyHandle(cfg.env.track, frozen.actor(), /*frozen=*/true);

  sac::save_policy(frozen, cfg.sac, dir + "/source.policy");
  eval::export_curves(res.curve, dir + "/curve.csv");
  eval::export_curve_pgm(res.curve, dir + "/curve.pgm");

  std::map<std::string, std::string> extras;
  extras["policy_checksum"] = core::hash_hex(core::hash_file(dir + "/source.policy"));

  if (!cfg.transfer.repository.empty()) {
    repo::RepositoryIndex index;
    if (fs::exists(cfg.transfer.repository + "/repository.manifest"))
      index = repo::RepositoryIndex::load(cfg.transfer.repository);
    sim::Env data_env(track, env_cfg, env_seed(cfg.seed ^ 0x5eedull));
    core::Rng rng(core::fnv1a64("source-stacks", cfg.seed));
    auto samples = repo::generate_source_dataset(
        repo::driver_from_policy(frozen, /*deterministic=*/true), data_env,
        cfg.dataset.episodes, cfg.dataset.keep_top, rng);
    if (samples.empty()) throw EmptyDataset("no usable episodes for source stacks");
    std::vector<embed::FrameStack> stacks;
    for (auto& s : samples) stacks.push_back(std::move(s.stack));
    index.add_source_task(cfg.env.track, cfg.env.description, frozen, cfg.sac,
                          std::move(stacks));
    if (!cfg.embed.autoencoder.empty()) {
      embed::Autoencoder ae = embed::Autoencoder::load(cfg.embed.autoencoder);
      embed::TextEncoderConfig text_cfg{cfg.embed.d_text};
      std::optional<embed::TextEmbeddingTable> overrides;
      if (!cfg.embed.text_overrides.empty())
        overrides = embed::TextEmbeddingTable::load(cfg.embed.text_overrides);
      index.ae_checkpoint_ref = cfg.embed.autoencoder;
      index.text_config_ref = "hashed-bigrams d_text=" + std::to_string(cfg.embed.d_text);
      index.precompute_representations(ae, text_cfg, overrides ? &*overrides : nullptr,
                                       embed::RepMode::F);
      index.precompute_representations(ae, text_cfg, overrides ? &*overrides : nullptr,
                                       embed::RepMode::FT);
    }
    index.save(cfg.transfer.repository);
    extras["repository_checksum"] = core::hash_hex(index.content_checksum());
    log << "registered '" << cfg.env.track << "' in repository "
        << cfg.transfer.repository << "\n";
  }

  write_manifest(dir, cfg, "train-source", extras);
  log << "outputs in " << dir << "\n";
  return 0;
}

int cmd_train_target(ExperimentConfig cfg, const std::string& mode, const std::string& out_dir,
                     std::ostream& log) {
  if (mode != "baseline" && mode != "F" && mode != "FT")
    throw ConfigError("mode must be baseline, F or FT");
  if (mode != "baseline") cfg.transfer.mode = mode;

  const std::string dir = resolve_output_dir(cfg, out_dir);
  sim::Track track = build_track(cfg.env);
  sim::EnvConfig env_cfg = to_env_config(cfg);
  sim::Env env(track, env_cfg, env_seed(cfg.seed));

  std::map<std::string, std::string> extras;
  extras["mode"] = mode;

  sac::TrainRunResult train_res;
  transfer::UsageLog usage;
  if (mode == "baseline") {
    if (!cfg.transfer.repository.empty())
      log << "warning: baseline mode ignores the transfer section\n";
    train_res = sac::train_baseline(env, cfg.sac, learner_seed(cfg.seed));
  } else {
    const embed::RepMode rep_mode = embed::rep_mode_from_string(mode);
    LoadedTransfer lt = load_transfer_inputs(cfg, rep_mode);
    transfer::FastRunConfig frc;
    frc.sac = cfg.sac;
    frc.transfer = to_transfer_config(cfg.transfer);
    frc.transfer.mode = rep_mode;
    frc.target_name = cfg.env.track;
    frc.target_description = cfg.env.description;
    frc.seed = learner_seed(cfg.seed);
    transfer::FastRunResult res = transfer::run_fast_training(
        env, &lt.index, &lt.ae, lt.text_cfg, lt.overrides ? &*lt.overrides : nullptr, frc);
    train_res = std::move(res.train);
    usage = std::move(res.usage);
    extras["repository_checksum"] = core::hash_hex(lt.index.content_checksum());
  }

  sac::save_policy(train_res.policy, cfg.sac, dir + "/target.policy");
  eval::export_curves(train_res.curve, dir + "/curve.csv");
  eval::export_curve_pgm(train_res.curve, dir + "/curve.pgm");
  if (!usage.acting.empty()) {
    eval::export_usage_csv(usage, dir + "/usage.csv");
  } else {
    core::write_file(dir + "/usage.csv", "# fastrl-usage v1\nsource,percent\n");
  }
  extras["policy_checksum"] = core::hash_hex(core::hash_file(dir + "/target.policy"));
  extras["steps_run"] = std::to_string(train_res.steps_run);
  write_manifest(dir, cfg, "train-target", extras);
  log << "trained " << train_res.steps_run << " steps, outputs in " << dir << "\n";
  return 0;
}

int cmd_evaluate(ExperimentConfig cfg, const std::string& out_dir, std::ostream& log) {
  const std::string dir = resolve_output_dir(cfg, out_dir);
  sim::Track track = build_track(cfg.env);
  sim::EnvConfig env_cfg = to_env_config(cfg);

  std::vector<eval::ReportRow> rows;
  if (cfg.eval.one_shot) {
    if (cfg.transfer.repository.empty())
      throw ConfigError("one-shot evaluation requires transfer.repository");
    repo::RepositoryIndex index = repo::RepositoryIndex::load(cfg.transfer.repository);
    auto reports = eval::one_shot_eval(index, track, env_cfg, cfg.eval.n_episodes,
                                       cfg.eval.seeds);
    for (const auto& [name, rep] : reports) {
      rows.push_back(eval::report_row(name, rep));
      log << name << ": AR " << rep.reward.mean << " +- " << rep.reward.stddev << "\n";
    }
  } else {
    if (cfg.eval.policy.empty()) throw ConfigError("evaluate requires eval.policy");
    if (!fs::exists(cfg.eval.policy))
      throw ConfigError("policy checkpoint not found: " + cfg.eval.policy);
    sac::PolicyCheckpoint ckpt = sac::load_policy(cfg.eval.policy);
    eval::EvalReport rep =
        eval::evaluate(ckpt.policy, track, env_cfg, cfg.eval.n_episodes, cfg.eval.seeds);
    rows.push_back(eval::report_row(ckpt.policy.id().empty() ? "policy" : ckpt.policy.id(),
                                    rep));
    log << "AD " << rep.distance.mean << " +- " << rep.distance.stddev << "\n";
    log << "AR " << rep.reward.mean << " +- " << rep.reward.stddev << "\n";
    log << "AL " << rep.laps.mean << " +- " << rep.laps.stddev << "\n";
    log << "AS " << rep.mean_speed.mean << " +- " << rep.mean_speed.stddev << "\n";
    if (cfg.eval.plot) {
      sac::LearningCurve ep_curve;
      for (std::size_t i = 0; i < rep.episodes.size(); ++i)
        ep_curve.push_back({static_cast<int64_t>(i + 1), rep.episodes[i].reward});
      eval::export_curve_pgm(ep_curve, dir + "/episodes.pgm");
    }
  }
  eval::export_report_csv(rows, dir + "/report.csv");
  write_manifest(dir, cfg, "evaluate", {});
  log << "report in " << dir << "/report.csv\n";
  return 0;
}

int cmd_search(ExperimentConfig cfg, const std::string& out_dir, std::ostream& log) {
  const std::string dir = resolve_output_dir(cfg, out_dir);

  std::map<std::string, std::vector<std::string>> sac_values, transfer_values, joint_values;
  for (const auto& [k, v] : cfg.search.values) {
    if (k.rfind("sac.", 0) == 0) sac_values[k] = v;
    if (k.rfind("transfer.", 0) == 0) transfer_values[k] = v;
    joint_values[k] = v;
  }

  struct Row {
    Assignment a;
    TrialRun run;
    std::string status = "ok";
    std::string manifest;
  };

  auto run_phase = [&](const std::string& phase_name,
                       const std::map<std::string, std::vector<std::string>>& values,
                       const ExperimentConfig& base, bool use_transfer) {
    auto trials = enumerate_trials(values, cfg.search.strategy, cfg.search.n_samples,
                                   cfg.search.search_seed);
    std::vector<Row> rows;
    for (std::size_t t = 0; t < trials.size(); ++t) {
      ExperimentConfig tcfg = base;
      for (const auto& [k, v] : trials[t]) apply_search_assignment(tcfg, k, v);
      tcfg.sac.total_timesteps = cfg.search.trial_timesteps;
      const std::string tdir = dir + "/" + phase_name + "_trial_" + std::to_string(t);
      fs::create_directories(tdir);
      Row row;
      row.a = trials[t];
      row.manifest = tdir + "/manifest";
      write_manifest(tdir, tcfg, "search-trial",
                     {{"trial_kind", use_transfer ? "fast" : "baseline"},
                      {"phase", phase_name}});
      log << phase_name << " trial " << t << "/" << trials.size() << ":";
      for (const auto& [k, v] : trials[t]) log << " " << k << "=" << v;
      log << "\n";
      try {
        row.run = run_search_trial(tcfg, use_transfer, log);
      } catch (const Error& e) {
        row.status = std::string("failed: ") + e.what();
        row.run.mean_ar = -std::numeric_limits<double>::infinity();
        log << "  trial failed: " << e.what() << "\n";
      }
      rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      return a.run.mean_ar > b.run.mean_ar;
    });

    std::ostringstream lb;
    lb << "# fastrl-leaderboard v1\n";
    lb << "rank,assignment,mean_ar,steps,curve_hash,manifest,status\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::string assign;
      for (const auto& [k, v] : rows[i].a) {
        if (!assign.empty()) assign += ";";
        assign += k + "=" + v;
      }
      lb << i + 1 << "," << assign << "," << core::format_double(rows[i].run.mean_ar) << ","
         << rows[i].run.steps << "," << core::hash_hex(rows[i].run.curve_hash) << ","
         << rows[i].manifest << "," << rows[i].status << "\n";
    }
    core::write_file(dir + "/leaderboard_" + phase_name + ".csv", lb.str());
    return rows;
  };

  if (cfg.search.phase == "joint") {
    const bool use_transfer = !cfg.transfer.repository.empty();
    auto rows = run_phase("joint", joint_values, cfg, use_transfer);
    if (!rows.empty() && rows.front().status == "ok")
      fs::copy_file(rows.front().manifest, dir + "/winner.manifest",
                    fs::copy_options::overwrite_existing);
  } else {
    // phase 1: SAC hyperparameters with plain baseline training
    auto sac_rows = run_phase("sac", sac_values, cfg, /*use_transfer=*/false);
    if (sac_rows.empty() || sac_rows.front().status != "ok")
      throw Error("search phase 1 produced no successful trial");
    ExperimentConfig winner = cfg;
    for (const auto& [k, v] : sac_rows.front().a) apply_search_assignment(winner, k, v);
    log << "phase 1 winner:";
    for (const auto& [k, v] : sac_rows.front().a) log << " " << k << "=" << v;
    log << " (mean AR " << sac_rows.front().run.mean_ar << ")\n";

    // phase 2: transfer parameters on top of the fixed winner
    if (!transfer_values.empty() && !cfg.transfer.repository.empty()) {
      auto tr_rows = run_phase("transfer", transfer_values, winner, /*use_transfer=*/true);
      if (!tr_rows.empty() && tr_rows.front().status == "ok")
        fs::copy_file(tr_rows.front().manifest, dir + "/winner.manifest",
                      fs::copy_options::overwrite_existing);
    } else {
      const std::string tmp = dir + "/winner_tmp";
      fs::create_directories(tmp);
      write_manifest(tmp, winner, "search-winner", {});
      fs::rename(tmp + "/manifest", dir + "/winner.manifest");
      fs::remove_all(tmp);
      log << "no transfer values or repository; phase 2 skipped\n";
    }
  }

  write_manifest(dir, cfg, "search", {});
  log << "search outputs in " << dir << "\n";
  return 0;
}

}  // namespace fastrl::cli
