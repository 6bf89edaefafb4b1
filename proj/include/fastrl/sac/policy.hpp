#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fastrl/core/rng.hpp"
#include "fastrl/sac/mlp.hpp"
#include "fastrl/sim/env.hpp"

namespace fastrl::sac {

constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;

// log-density of a squashed Gaussian in action space, one dimension
double squashed_gaussian_log_prob(double action, double mean, double log_std);

// raw head output -> bounded log standard deviation (smooth squash)
double bound_log_std(double raw);

// Squashed-Gaussian actor: trunk MLP emits per-action mean and a raw value
// squashed into [kLogStdMin, kLogStdMax]; actions are tanh(u), u ~ N(mean, std).
class ActorNet {
 public:
  ActorNet() = default;
  ActorNet(int obs_dim, int act_dim, int hidden, core::Rng& init_rng);

  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }
  int hidden() const { return hidden_; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

  // Splits a forward output row into heads.
  void heads(const double* out_row, double* mean, double* log_std, double* raw_log_std) const;

  std::vector<double> act_deterministic(const double* obs) const;
  std::vector<double> act_stochastic(const double* obs, core::Rng& rng,
                                     double* log_prob = nullptr) const;

 private:
  int obs_dim_ = 0, act_dim_ = 0, hidden_ = 0;
  Mlp net_;
};

// A named actor with an update guard; frozen handles never change and are
// safe to share across threads for action selection.
class PolicyHandle {
 public:
  PolicyHandle() = default;
  PolicyHandle(std::string id, ActorNet actor, bool frozen = false);

  const std::string& id() const { return id_; }
  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }

  const ActorNet& actor() const { return actor_; }
  // Throws FrozenPolicy when frozen.
  ActorNet& mutable_actor();

  uint64_t param_hash() const;

 private:
  std::string id_;
  ActorNet actor_;
  bool frozen_ = false;
};

// Samples (or takes the squashed mean of) the policy on one observation.
// Throws ShapeMismatch when the observation does not fit the network.
sim::Action select_action(const PolicyHandle& policy, const sim::Observation& obs,
                          bool deterministic, core::Rng& rng);

std::vector<double> flatten_observation(const sim::Observation& obs);

}  // namespace fastrl::sac
