#include <doctest.h>

#include <cmath>

#include "fastrl/errors.hpp"
#include "fastrl/sim/builtin_tracks.hpp"
#include "fastrl/transfer/pipeline.hpp"

using namespace fastrl;
using namespace fastrl::transfer;

namespace {

sac::PolicyHandle make_policy(const std::string& id, int obs_dim, uint64_t seed) {
  core::Rng rng(seed);
  sac::ActorNet actor(obs_dim, 2, 8, rng);
  return sac::PolicyHandle(id, actor, true);
}

embed::FrameStack make_stack(int resolution, uint64_t seed) {
  core::Rng rng(seed);
  embed::FrameStack s;
  s.resolution = resolution;
  s.data.resize(std::size_t(embed::FrameStack::kFrames) * resolution * resolution);
  for (auto& v : s.data) v = static_cast<float>(rng.uniform());
  return s;
}

// repository whose cached representations are set directly so selection math
// can be tested against hand-picked cosine scores
repo::RepositoryIndex fabricated_index(const std::vector<std::vector<double>>& reps,
                                       embed::RepMode mode, int obs_dim = 9) {
  repo::RepositoryIndex index;
  sac::SacHyperparams hp;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const std::string name = "src" + std::to_string(i);
    index.add_source_task(name, "task " + std::to_string(i),
                          make_policy(name, obs_dim, 900 + i), hp,
                          {make_stack(16, 950 + i)});
    embed::TaskRepresentation rep;
    rep.mode = mode;
    rep.values = reps[i];
    index.mutable_record(i).cached_reps[mode] = std::move(rep);
  }
  return index;
}

embed::TaskRepresentation rep_of(std::vector<double> values, embed::RepMode mode) {
  embed::TaskRepresentation rep;
  rep.mode = mode;
  rep.values = std::move(values);
  return rep;
}

struct SmallSetup {
  sim::Track track;
  sim::EnvConfig env_cfg;
  embed::Autoencoder ae;
  embed::TextEncoderConfig text_cfg;

  SmallSetup()
      : track(sim::built_in_track_spec("lane_centering")),
        env_cfg(),
        ae([] {
          embed::AutoencoderConfig cfg;
          cfg.resolution = 16;
          cfg.stages = {{4, 3, 2, 1}, {8, 3, 2, 1}};
          cfg.latent_dim = 6;
          return cfg;
        }()) {
    env_cfg.observation_rows = 1;
    env_cfg.episode.n_vehicles_min = env_cfg.episode.n_vehicles_max = 1;
    env_cfg.episode.max_duration = 30.0;
    env_cfg.render.resolution = 16;
    ae.init_weights(77);
  }

  repo::RepositoryIndex make_repo(int n_sources) {
    repo::RepositoryIndex index;
    sac::SacHyperparams hp;
    core::Rng stack_rng(500);
    for (int i = 0; i < n_sources; ++i) {
      const std::string name = "lane_src" + std::to_string(i);
      sim::Env env(track, env_cfg, 600 + i);
      env.reset();
      std::vector<sim::Frame> frames;
      for (int f = 0; f < 4; ++f) {
        frames.push_back(env.render_frame());
        if (!env.episode_done()) env.step({0.05, 0.2});
      }
      index.add_source_task(name, "winding single lane road", make_policy(name, 9, 700 + i),
                            hp, {embed::make_stack(frames, 0)});
    }
    index.precompute_representations(ae, text_cfg, nullptr, embed::RepMode::F);
    index.precompute_representations(ae, text_cfg, nullptr, embed::RepMode::FT);
    return index;
  }

  sac::SacHyperparams small_hp(int64_t steps) {
    sac::SacHyperparams hp;
    hp.hidden = 16;
    hp.batch_size = 16;
    hp.learning_starts = 64;
    hp.replay_capacity = 4000;
    hp.total_timesteps = steps;
    return hp;
  }
};

}  // namespace

TEST_SUITE("transfer") {

TEST_CASE("select_policy follows the argmax-threshold rule") {
  const auto mode = embed::RepMode::F;
  const embed::TaskRepresentation target = rep_of({1.0, 0.0}, mode);

  SUBCASE("all scores below theta select the target") {
    auto index = fabricated_index({{0.4, std::sqrt(1 - 0.16)}, {0.6, 0.8}}, mode);
    SelectionOutcome out = select_policy(target, index, 0.7);
    CHECK(out.chosen == kTargetPolicy);
    REQUIRE(out.scores.size() == 2);
    CHECK(out.scores[0] == doctest::Approx(0.4));
    CHECK(out.scores[1] == doctest::Approx(0.6));
    CHECK(out.max_score == doctest::Approx(0.6));
  }

  SUBCASE("argmax above theta wins") {
    auto index = fabricated_index({{0.9, std::sqrt(1 - 0.81)}, {0.2, std::sqrt(1 - 0.04)}},
                                  mode);
    SelectionOutcome out = select_policy(target, index, 0.7);
    CHECK(out.chosen == 0);
    CHECK(out.max_score == doctest::Approx(0.9));
  }

  SUBCASE("ties break to the lowest index") {
    auto index = fabricated_index({{0.8, 0.6}, {0.8, 0.6}}, mode);
    SelectionOutcome out = select_policy(target, index, 0.7);
    CHECK(out.chosen == 0);
  }

  SUBCASE("empty repository selects the target") {
    repo::RepositoryIndex empty;
    SelectionOutcome out = select_policy(target, empty, 0.1);
    CHECK(out.chosen == kTargetPolicy);
    CHECK(out.scores.empty());
  }

  SUBCASE("missing mode caches raise ModeMismatch") {
    auto index = fabricated_index({{0.5, 0.5}}, mode);
    const embed::TaskRepresentation ft_target = rep_of({1.0, 0.0, 0.0}, embed::RepMode::FT);
    CHECK_THROWS_AS(select_policy(ft_target, index, 0.5), ModeMismatch);
  }
}

TEST_CASE("usage percentages") {
  UsageLog log;
  log.source_names = {"A", "B"};
  for (int i = 0; i < 30; ++i) log.acting.push_back(0);
  for (int i = 0; i < 20; ++i) log.acting.push_back(1);
  for (int i = 0; i < 50; ++i) log.acting.push_back(kTargetPolicy);

  auto pct = usage_percentages(log);
  CHECK(pct.at("A") == doctest::Approx(0.3));
  CHECK(pct.at("B") == doctest::Approx(0.2));
  double sum = 0;
  for (const auto& [name, f] : pct) sum += f;
  CHECK(sum <= 1.0 + 1e-12);

  UsageLog all_target;
  all_target.source_names = {"A"};
  all_target.acting.assign(10, kTargetPolicy);
  CHECK(usage_percentages(all_target).empty());

  UsageLog empty;
  CHECK_THROWS_AS(usage_percentages(empty), EmptyLog);
}

TEST_CASE("unreachable theta reproduces the baseline bit for bit") {
  SmallSetup s;
  auto index = s.make_repo(2);
  sac::SacHyperparams hp = s.small_hp(1200);

  sac::TrainOptions opts;
  opts.record_trajectory = true;

  sim::Env env_base(s.track, s.env_cfg, 321);
  sac::TrainRunResult base = sac::train_baseline(env_base, hp, 654, opts);

  FastRunConfig frc;
  frc.sac = hp;
  frc.transfer.K = 50;
  frc.transfer.theta = 1.1;
  frc.transfer.mode = embed::RepMode::F;
  frc.seed = 654;
  frc.train = opts;
  frc.target_description = "winding single lane road";

  sim::Env env_fast(s.track, s.env_cfg, 321);
  FastRunResult fast = run_fast_training(env_fast, &index, &s.ae, s.text_cfg, nullptr, frc);

  CHECK(fast.train.action_trace == base.action_trace);
  CHECK(fast.train.reward_trace == base.reward_trace);
  CHECK(fast.train.final_param_hash == base.final_param_hash);

  // comparisons ran but every one chose the target
  CHECK(!fast.usage.comparisons.empty());
  for (const auto& ev : fast.usage.comparisons) CHECK(ev.outcome.chosen == kTargetPolicy);
  CHECK(usage_percentages(fast.usage).empty());

  SUBCASE("empty repository behaves the same way") {
    repo::RepositoryIndex empty;
    sim::Env env_fast2(s.track, s.env_cfg, 321);
    FastRunConfig frc2 = frc;
    frc2.transfer.theta = 0.0;
    FastRunResult fast2 =
        run_fast_training(env_fast2, &empty, nullptr, s.text_cfg, nullptr, frc2);
    CHECK(fast2.train.action_trace == base.action_trace);
    CHECK(fast2.train.final_param_hash == base.final_param_hash);
  }
}

TEST_CASE("comparisons fire on the K grid and sources stay frozen") {
  SmallSetup s;
  auto index = s.make_repo(2);
  std::vector<uint64_t> hashes_before;
  for (const auto& rec : index.records()) hashes_before.push_back(rec.policy.param_hash());

  sac::SacHyperparams hp = s.small_hp(800);
  FastRunConfig frc;
  frc.sac = hp;
  frc.transfer.K = 100;
  frc.transfer.theta = 0.0;  // representations are non-negative, a source always wins
  frc.transfer.mode = embed::RepMode::F;
  frc.seed = 99;
  frc.target_description = "winding single lane road";

  sim::Env env(s.track, s.env_cfg, 17);
  FastRunResult res = run_fast_training(env, &index, &s.ae, s.text_cfg, nullptr, frc);

  REQUIRE(!res.usage.comparisons.empty());
  for (const auto& ev : res.usage.comparisons) {
    if (!ev.deferred) CHECK(ev.step % frc.transfer.K == 0);
    CHECK(ev.outcome.chosen != kTargetPolicy);
  }

  // sources acted, and nothing about them changed
  auto pct = usage_percentages(res.usage);
  CHECK(!pct.empty());
  double total = 0;
  for (const auto& [name, f] : pct) total += f;
  CHECK(total > 0.0);
  CHECK(total <= 1.0 + 1e-12);
  for (std::size_t i = 0; i < index.size(); ++i)
    CHECK(index.records()[i].policy.param_hash() == hashes_before[i]);

  // log length equals steps executed
  CHECK(res.usage.total_steps() == res.train.steps_run);
}

TEST_CASE("one comparison when K equals the horizon") {
  SmallSetup s;
  auto index = s.make_repo(1);
  sac::SacHyperparams hp = s.small_hp(130);
  FastRunConfig frc;
  frc.sac = hp;
  frc.transfer.K = 60;
  frc.transfer.theta = 2.0;  // force target selection, we only count events
  frc.transfer.mode = embed::RepMode::F;
  frc.seed = 5;
  frc.target_description = "x";

  sim::Env env(s.track, s.env_cfg, 23);
  FastRunResult res = run_fast_training(env, &index, &s.ae, s.text_cfg, nullptr, frc);
  CHECK(res.usage.comparisons.size() >= 1);
  CHECK(res.usage.comparisons.size() <= 2);
}

TEST_CASE("incompatible repositories are rejected before stepping") {
  SmallSetup s;
  sac::SacHyperparams hp = s.small_hp(100);
  FastRunConfig frc;
  frc.sac = hp;
  frc.transfer.mode = embed::RepMode::FT;
  frc.seed = 1;
  frc.target_description = "y";

  SUBCASE("missing representations for the mode") {
    repo::RepositoryIndex index;
    sac::SacHyperparams dummy;
    index.add_source_task("only_f", "task", make_policy("only_f", 9, 1), dummy,
                          {make_stack(16, 2)});
    sim::Env env(s.track, s.env_cfg, 2);
    CHECK_THROWS_AS(
        run_fast_training(env, &index, &s.ae, s.text_cfg, nullptr, frc),
        IncompatibleRepository);
  }

  SUBCASE("missing autoencoder") {
    auto index = s.make_repo(1);
    sim::Env env(s.track, s.env_cfg, 2);
    CHECK_THROWS_AS(run_fast_training(env, &index, nullptr, s.text_cfg, nullptr, frc),
                    IncompatibleRepository);
  }

  SUBCASE("wrong representation length") {
    auto index = s.make_repo(1);
    index.mutable_record(0).cached_reps[embed::RepMode::FT].values.push_back(0.5);
    sim::Env env(s.track, s.env_cfg, 2);
    CHECK_THROWS_AS(run_fast_training(env, &index, &s.ae, s.text_cfg, nullptr, frc),
                    IncompatibleRepository);
  }
}

}  // TEST_SUITE
