#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "fastrl/core/textio.hpp"

#include "fastrl/errors.hpp"
#include "fastrl/sac/learner.hpp"
#include "fastrl/sim/builtin_tracks.hpp"
#include "support/finite_diff.hpp"

using namespace fastrl;
using namespace fastrl::sac;

namespace {

SacHyperparams toy_hp() {
  SacHyperparams hp;
  hp.hidden = 8;
  hp.batch_size = 5;
  hp.replay_capacity = 1000;
  hp.learning_starts = 10;
  hp.alpha = 0.2;
  return hp;
}

SacBatch random_batch(int n, int obs_dim, int act_dim, core::Rng& rng) {
  SacBatch b;
  b.n = n;
  b.obs_dim = obs_dim;
  b.act_dim = act_dim;
  b.obs.resize(std::size_t(n) * obs_dim);
  b.act.resize(std::size_t(n) * act_dim);
  b.next_obs.resize(std::size_t(n) * obs_dim);
  b.rew.resize(n);
  b.done.resize(n);
  for (auto& v : b.obs) v = rng.uniform(-1, 1);
  for (auto& v : b.act) v = rng.uniform(-0.9, 0.9);
  for (auto& v : b.next_obs) v = rng.uniform(-1, 1);
  for (auto& v : b.rew) v = rng.uniform(-1, 1);
  for (auto& v : b.done) v = rng.uniform() < 0.2 ? 1.0 : 0.0;
  return b;
}

sim::Observation obs_of(const std::vector<double>& data) {
  sim::Observation o;
  o.rows = 1;
  o.data = data;
  return o;
}

}  // namespace

TEST_SUITE("sac") {

TEST_CASE("compute_return") {
  CHECK(compute_return({1, 1, 1}, 0.0) == 1.0);
  CHECK(compute_return({1, 1, 1}, 0.5) == doctest::Approx(1.75));
  CHECK(compute_return({}, 0.9) == 0.0);
}

TEST_CASE("hyperparameter validation") {
  SacHyperparams hp = toy_hp();
  hp.gamma = 1.0;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  hp = toy_hp();
  hp.tau = 0.0;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  hp = toy_hp();
  hp.batch_size = 5000;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
}

TEST_CASE("action selection") {
  core::Rng init(1);
  ActorNet actor(9, 2, 8, init);
  PolicyHandle policy("p", actor, false);
  core::Rng rng(2);

  SUBCASE("deterministic mode repeats exactly") {
    auto obs = obs_of(std::vector<double>(9, 0.25));
    sim::Action a = select_action(policy, obs, true, rng);
    sim::Action b = select_action(policy, obs, true, rng);
    CHECK(a.steering == b.steering);
    CHECK(a.acceleration == b.acceleration);
  }

  SUBCASE("all sampled actions stay inside the box") {
    for (int i = 0; i < 10000; ++i) {
      std::vector<double> data(9);
      for (auto& v : data) v = rng.uniform(-1, 1);
      sim::Action a = select_action(policy, obs_of(data), false, rng);
      CHECK(a.steering >= -1.0);
      CHECK(a.steering <= 1.0);
      CHECK(a.acceleration >= -1.0);
      CHECK(a.acceleration <= 1.0);
    }
  }

  SUBCASE("zero-weight actor squashes to the zero action") {
    ActorNet zero(9, 2, 8, init);
    std::fill(zero.net().params().begin(), zero.net().params().end(), 0.0);
    PolicyHandle zp("z", zero, false);
    sim::Action a = select_action(zp, obs_of(std::vector<double>(9, 0.7)), true, rng);
    CHECK(a.steering == 0.0);
    CHECK(a.acceleration == 0.0);
  }

  SUBCASE("shape mismatch is rejected") {
    CHECK_THROWS_AS(select_action(policy, obs_of(std::vector<double>(5, 0.0)), true, rng),
                    ShapeMismatch);
  }
}

TEST_CASE("squashed gaussian density integrates to one") {
  const double mean = 0.3;
  const double log_std = std::log(0.5);
  const int n = 40001;
  const double lo = -1.0 + 1e-9, hi = 1.0 - 1e-9;
  double integral = 0.0;
  double prev = std::exp(squashed_gaussian_log_prob(lo, mean, log_std));
  for (int i = 1; i < n; ++i) {
    const double a = lo + (hi - lo) * i / (n - 1);
    const double cur = std::exp(squashed_gaussian_log_prob(a, mean, log_std));
    integral += 0.5 * (prev + cur) * (hi - lo) / (n - 1);
    prev = cur;
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("replay buffer eviction and uniform sampling") {
  ReplayBuffer buf(2, 1, 8);
  const double obs[2] = {0, 0};
  const double act[1] = {0};
  for (int i = 0; i < 12; ++i) buf.add(obs, act, static_cast<double>(i), obs, false);
  CHECK(buf.size() == 8);
  // oldest four rewards (0..3) were overwritten
  std::vector<bool> present(12, false);
  for (std::size_t s = 0; s < 8; ++s)
    present[static_cast<std::size_t>(buf.reward_at(s))] = true;
  for (int i = 0; i < 4; ++i) CHECK_FALSE(present[i]);
  for (int i = 4; i < 12; ++i) CHECK(present[i]);

  core::Rng rng(3);
  SacBatch batch;
  buf.sample(16, rng, batch);
  CHECK(batch.n == 16);
  for (double r : batch.rew) CHECK(r >= 4.0);
}

TEST_CASE("soft updates") {
  SacHyperparams hp = toy_hp();

  SUBCASE("tau = 1 copies the online critics") {
    hp.tau = 1.0;
    SacLearner learner(4, 2, hp, 5);
    core::Rng rng(6);
    SacBatch batch = random_batch(5, 4, 2, rng);
    learner.update_on_batch(batch);
    CHECK(learner.q1().params() == learner.q1_target().params());
    CHECK(learner.q2().params() == learner.q2_target().params());
  }

  SUBCASE("soft update contracts toward the online parameters") {
    hp.tau = 0.25;
    SacLearner learner(4, 2, hp, 5);
    auto& q = learner.q1().params();
    auto& t = learner.q1_target().params();
    std::fill(q.begin(), q.end(), 1.0);
    std::fill(t.begin(), t.end(), 0.0);
    std::vector<double> before_gap(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) before_gap[i] = t[i] - q[i];
    learner.soft_update_targets();
    for (std::size_t i = 0; i < q.size(); ++i) {
      CHECK(std::abs((t[i] - q[i]) - (1.0 - hp.tau) * before_gap[i]) < 1e-15);
      CHECK(t[i] == doctest::Approx(0.25).epsilon(1e-12));
    }
  }
}

TEST_CASE("alpha zero removes the entropy term") {
  SacHyperparams hp = toy_hp();
  hp.alpha = 0.0;
  SacLearner learner(4, 2, hp, 7);
  core::Rng rng(8);
  SacBatch batch = random_batch(5, 4, 2, rng);
  SacLosses losses = learner.update_on_batch(batch);
  CHECK(losses.entropy_term == 0.0);
}

TEST_CASE("frozen policies reject updates bit-for-bit") {
  SacHyperparams hp = toy_hp();
  SacLearner learner(4, 2, hp, 9);
  core::Rng rng(10);
  SacBatch batch = random_batch(5, 4, 2, rng);

  learner.freeze();
  const uint64_t before = learner.actor_param_hash();
  CHECK_THROWS_AS(learner.update_on_batch(batch), FrozenPolicy);
  CHECK(learner.actor_param_hash() == before);

  PolicyHandle frozen = learner.policy_snapshot("expert", true);
  CHECK_THROWS_AS(frozen.mutable_actor(), FrozenPolicy);
  PolicyHandle open = learner.policy_snapshot("dev", false);
  CHECK_NOTHROW(open.mutable_actor());
}

TEST_CASE("critic gradients match finite differences") {
  SacHyperparams hp = toy_hp();
  SacLearner learner(4, 2, hp, 11);
  core::Rng rng(12);

  for (int trial = 0; trial < 25; ++trial) {
    SacBatch batch = random_batch(5, 4, 2, rng);
    std::vector<double> y(5);
    for (auto& v : y) v = rng.uniform(-2, 2);

    for (int which : {1, 2}) {
      std::vector<double> grads;
      learner.critic_grad(batch, y, which, grads);
      auto& params = which == 1 ? learner.q1().params() : learner.q2().params();
      auto loss = [&] { return learner.critic_loss(batch, y, which); };
      for (int k = 0; k < 4; ++k) {
        const std::size_t i = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int64_t>(params.size()) - 1));
        const double fd = testing::central_diff(params, i, loss);
        CHECK(testing::rel_err(grads[i], fd) < 1e-3);
      }
    }
  }
}

TEST_CASE("actor gradients match finite differences") {
  SacHyperparams hp = toy_hp();
  SacLearner learner(4, 2, hp, 13);
  core::Rng rng(14);

  for (int trial = 0; trial < 25; ++trial) {
    SacBatch batch = random_batch(5, 4, 2, rng);
    std::vector<double> eps(10);
    for (auto& v : eps) v = rng.normal();

    std::vector<double> grads;
    learner.actor_grad(batch, eps, grads, nullptr);
    auto& params = learner.actor().net().params();
    auto loss = [&] { return learner.actor_loss(batch, eps); };
    for (int k = 0; k < 4; ++k) {
      const std::size_t i = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int64_t>(params.size()) - 1));
      const double fd = testing::central_diff(params, i, loss);
      CHECK(testing::rel_err(grads[i], fd) < 1e-3);
    }
  }
}

TEST_CASE("actor losses are consistent between the two entry points") {
  SacHyperparams hp = toy_hp();
  SacLearner learner(4, 2, hp, 15);
  core::Rng rng(16);
  SacBatch batch = random_batch(5, 4, 2, rng);
  std::vector<double> eps(10);
  for (auto& v : eps) v = rng.normal();
  std::vector<double> grads;
  const double via_grad = learner.actor_grad(batch, eps, grads, nullptr);
  const double via_loss = learner.actor_loss(batch, eps);
  CHECK(via_grad == doctest::Approx(via_loss).epsilon(1e-12));
}

TEST_CASE("baseline training runs deterministically") {
  sim::Track track(sim::built_in_track_spec("lane_centering"));
  sim::EnvConfig env_cfg;
  env_cfg.observation_rows = 1;
  env_cfg.episode.n_vehicles_min = env_cfg.episode.n_vehicles_max = 1;
  env_cfg.episode.max_duration = 15.0;

  SacHyperparams hp;
  hp.hidden = 16;
  hp.batch_size = 16;
  hp.learning_starts = 50;
  hp.replay_capacity = 4000;
  hp.total_timesteps = 800;

  SUBCASE("zero steps returns the fresh policy and no curve") {
    SacHyperparams hp0 = hp;
    hp0.total_timesteps = 0;
    sim::Env env(track, env_cfg, 77);
    TrainRunResult res = train_baseline(env, hp0, 123);
    CHECK(res.curve.empty());
    CHECK(res.steps_run == 0);
    CHECK(res.policy.actor().obs_dim() == 9);
  }

  SUBCASE("same seed, same run") {
    TrainOptions opts;
    opts.record_trajectory = true;
    sim::Env env1(track, env_cfg, 77);
    TrainRunResult a = train_baseline(env1, hp, 123, opts);
    sim::Env env2(track, env_cfg, 77);
    TrainRunResult b = train_baseline(env2, hp, 123, opts);
    CHECK(a.final_param_hash == b.final_param_hash);
    REQUIRE(a.curve.size() == b.curve.size());
    for (std::size_t i = 0; i < a.curve.size(); ++i) {
      CHECK(a.curve[i].timestep == b.curve[i].timestep);
      CHECK(a.curve[i].episodic_reward == b.curve[i].episodic_reward);
    }
    CHECK(a.action_trace == b.action_trace);
    CHECK(a.reward_trace == b.reward_trace);
  }
}

TEST_CASE("policy checkpoints round-trip and verify") {
  core::Rng init(17);
  ActorNet actor(45, 2, 32, init);
  PolicyHandle policy("expert-oval", actor, true);
  SacHyperparams hp = toy_hp();
  const std::string path =
      (std::filesystem::temp_directory_path() / "fastrl_policy.ckpt").string();
  save_policy(policy, hp, path);

  PolicyCheckpoint loaded = load_policy(path);
  CHECK(loaded.policy.id() == "expert-oval");
  CHECK(loaded.policy.frozen());
  CHECK(loaded.policy.actor().net().params() == actor.net().params());
  CHECK(loaded.hyperparams.hidden == hp.hidden);
  CHECK(loaded.policy.param_hash() == policy.param_hash());

  std::string data = core::read_file(path);
  core::write_file(path, data.substr(0, data.size() - 3));
  CHECK_THROWS_AS(load_policy(path), CorruptFile);
}

}  // TEST_SUITE
