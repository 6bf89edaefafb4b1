#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fastrl/sac/policy.hpp"
#include "fastrl/sac/replay.hpp"
#include "fastrl/sim/env.hpp"

namespace fastrl::sac {

struct SacHyperparams {
  double learning_rate = 3e-4;
  int batch_size = 64;
  double gamma = 0.99;       // in [0, 1)
  double tau = 0.02;         // in (0, 1]; target <- tau*online + (1-tau)*target
  double alpha = 0.2;        // fixed entropy temperature
  int gradient_steps = 1;    // updates per environment step
  int64_t learning_starts = 1000;
  std::size_t replay_capacity = 100000;
  int64_t total_timesteps = 100000;
  int hidden = 64;           // width of both hidden layers

  void validate() const;
};

struct SacLosses {
  double critic1 = 0.0;
  double critic2 = 0.0;
  double actor = 0.0;
  double entropy_term = 0.0;  // alpha * mean log-prob part of the actor loss
};

// Discounted return of a reward sequence.
double compute_return(const std::vector<double>& rewards, double gamma);

// Soft actor-critic learner: squashed-Gaussian actor, twin critics with target
// copies, fixed entropy temperature, Adam on everything. Single-threaded.
class SacLearner {
 public:
  SacLearner(int obs_dim, int act_dim, SacHyperparams hp, uint64_t seed);

  const SacHyperparams& hyperparams() const { return hp_; }
  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }

  sim::Action act(const sim::Observation& obs, bool deterministic);
  void record(const sim::Observation& obs, const sim::Action& action, double reward,
              const sim::Observation& next_obs, bool terminal);

  bool ready_to_update() const;
  // One gradient step on a sampled batch. Throws FrozenPolicy / NonFiniteLoss.
  SacLosses update();
  SacLosses update_on_batch(const SacBatch& batch);

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  // target <- online + (1 - tau) * (target - online), both critics
  void soft_update_targets();

  PolicyHandle policy_snapshot(const std::string& id, bool frozen) const;
  uint64_t actor_param_hash() const;

  ReplayBuffer& replay() { return replay_; }
  core::Rng& rng() { return rng_; }

  // --- exposed for gradient verification ---
  ActorNet& actor() { return actor_; }
  Mlp& q1() { return q1_; }
  Mlp& q2() { return q2_; }
  Mlp& q1_target() { return tq1_; }
  Mlp& q2_target() { return tq2_; }
  // Critic MSE loss of `which` (1 or 2) against fixed targets y.
  double critic_loss(const SacBatch& batch, const std::vector<double>& y, int which) const;
  double critic_grad(const SacBatch& batch, const std::vector<double>& y, int which,
                     std::vector<double>& grads) const;
  // Actor loss with a fixed noise matrix eps [n, act_dim].
  double actor_loss(const SacBatch& batch, const std::vector<double>& eps) const;
  double actor_grad(const SacBatch& batch, const std::vector<double>& eps,
                    std::vector<double>& grads, double* entropy_term) const;
  // Bellman targets; consumes rng for the next-action noise unless eps given.
  std::vector<double> compute_targets(const SacBatch& batch, const std::vector<double>* eps);

 private:
  int obs_dim_, act_dim_;
  SacHyperparams hp_;
  core::Rng rng_;
  ActorNet actor_;
  Mlp q1_, q2_, tq1_, tq2_;
  ReplayBuffer replay_;
  bool frozen_ = false;

  // update-loop scratch, reused across calls (learner is single-threaded)
  struct Workspace {
    Mlp::Cache actor_cache, q1_cache, q2_cache, t1_cache, t2_cache;
    SacBatch batch;
    std::vector<double> x, next_act, logp, y, dy, dy1, dy2, dx1, dx2;
    std::vector<double> mean, log_std, raw, sig, act, dout;
    std::vector<double> grads, q_scratch1, q_scratch2, eps;
  };
  mutable Workspace ws_;

  void fill_critic_input(const double* obs, const double* act, int n,
                         std::vector<double>& out) const;

  struct AdamState {
    std::vector<double> m, v;
    int64_t t = 0;
  };
  AdamState actor_adam_, q1_adam_, q2_adam_;
  void adam_apply(std::vector<double>& params, const std::vector<double>& grads,
                  AdamState& state);
};

struct CurvePoint {
  int64_t timestep = 0;
  double episodic_reward = 0.0;
};
using LearningCurve = std::vector<CurvePoint>;

// Hook interface for the training loop. The transfer pipeline implements it;
// baseline training runs without one. Overrides must not consume the learner
// or environment RNG streams.
class TrainingCallbacks {
 public:
  virtual ~TrainingCallbacks() = default;
  // Return an action to act with instead of the learner's (source policy in
  // control); nullopt leaves the learner acting.
  virtual std::optional<sim::Action> override_action(const sim::Observation& obs) {
    (void)obs;
    return std::nullopt;
  }
  struct StepContext {
    int64_t step = 0;  // 0-based environment step index
    const sim::StepResult* result = nullptr;
    sim::Env* env = nullptr;
    SacLearner* learner = nullptr;
  };
  virtual void on_step(const StepContext& ctx) { (void)ctx; }
  virtual bool should_stop(int64_t step, SacLearner& learner) {
    (void)step;
    (void)learner;
    return false;
  }
};

struct TrainOptions {
  bool record_trajectory = false;
};

struct TrainRunResult {
  PolicyHandle policy;
  LearningCurve curve;
  int64_t steps_run = 0;
  std::vector<double> action_trace;  // [steps, 2] when recorded
  std::vector<double> reward_trace;
  uint64_t final_param_hash = 0;
};

// Shared training loop: act (learner or override), store the transition,
// update after learning_starts with `gradient_steps` steps, then fire hooks.
TrainRunResult run_training_loop(sim::Env& env, SacLearner& learner,
                                 const TrainOptions& opts, TrainingCallbacks* callbacks);

// Plain SAC from scratch; the learner acts on every step.
TrainRunResult train_baseline(sim::Env& env, const SacHyperparams& hp, uint64_t seed,
                              const TrainOptions& opts = {},
                              TrainingCallbacks* callbacks = nullptr);

// --- policy checkpoints ---

struct PolicyCheckpoint {
  PolicyHandle policy;
  SacHyperparams hyperparams;
};

void save_policy(const PolicyHandle& policy, const SacHyperparams& hp,
                 const std::string& path);
PolicyCheckpoint load_policy(const std::string& path);

}  // namespace fastrl::sac
