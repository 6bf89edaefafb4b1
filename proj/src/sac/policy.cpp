#include "fastrl/sac/policy.hpp"

#include <algorithm>
#include <cmath>

#include "fastrl/core/hash.hpp"
#include "fastrl/errors.hpp"

namespace fastrl::sac {

namespace {

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }

constexpr double kLogTwoPi = 1.8378770664093453;  // log(2*pi)

}  // namespace

double bound_log_std(double raw) {
  return kLogStdMin + 0.5 * (kLogStdMax - kLogStdMin) * (std::tanh(raw) + 1.0);
}

double squashed_gaussian_log_prob(double action, double mean, double log_std) {
  const double a = std::clamp(action, -1.0 + 1e-12, 1.0 - 1e-12);
  const double u = std::atanh(a);
  const double sigma = std::exp(log_std);
  const double z = (u - mean) / sigma;
  const double gauss = -0.5 * z * z - log_std - 0.5 * kLogTwoPi;
  return gauss - std::log(1.0 - a * a);
}

ActorNet::ActorNet(int obs_dim, int act_dim, int hidden, core::Rng& init_rng)
    : obs_dim_(obs_dim), act_dim_(act_dim), hidden_(hidden) {
  MlpSpec spec;
  spec.input = obs_dim;
  spec.hidden = {hidden, hidden};
  spec.output = 2 * act_dim;
  net_ = Mlp(spec);
  net_.init_weights(init_rng);
}

void ActorNet::heads(const double* out_row, double* mean, double* log_std,
                     double* raw_log_std) const {
  for (int i = 0; i < act_dim_; ++i) {
    mean[i] = out_row[i];
    const double raw = out_row[act_dim_ + i];
    if (raw_log_std) raw_log_std[i] = raw;
    log_std[i] = bound_log_std(raw);
  }
}

std::vector<double> ActorNet::act_deterministic(const double* obs) const {
  Mlp::Cache cache;
  net_.forward(obs, 1, cache);
  std::vector<double> action(act_dim_);
  for (int i = 0; i < act_dim_; ++i) action[i] = std::tanh(cache.out[i]);
  return action;
}

std::vector<double> ActorNet::act_stochastic(const double* obs, core::Rng& rng,
                                             double* log_prob) const {
  Mlp::Cache cache;
  net_.forward(obs, 1, cache);
  std::vector<double> action(act_dim_);
  double logp = 0.0;
  for (int i = 0; i < act_dim_; ++i) {
    const double mean = cache.out[i];
    const double log_std = bound_log_std(cache.out[act_dim_ + i]);
    const double sigma = std::exp(log_std);
    const double eps = rng.normal();
    const double u = mean + sigma * eps;
    action[i] = std::tanh(u);
    const double t = 2.0 * (std::log(2.0) - u - softplus(-2.0 * u));
    logp += -0.5 * eps * eps - log_std - 0.5 * kLogTwoPi - t;
  }
  if (log_prob) *log_prob = logp;
  return action;
}

PolicyHandle::PolicyHandle(std::string id, ActorNet actor, bool frozen)
    : id_(std::move(id)), actor_(std::move(actor)), frozen_(frozen) {}

ActorNet& PolicyHandle::mutable_actor() {
  if (frozen_) throw FrozenPolicy("policy '" + id_ + "' is frozen");
  return actor_;
}

uint64_t PolicyHandle::param_hash() const {
  return core::fnv1a64(actor_.net().params());
}

std::vector<double> flatten_observation(const sim::Observation& obs) {
  return obs.data;  // already row-major
}

sim::Action select_action(const PolicyHandle& policy, const sim::Observation& obs,
                          bool deterministic, core::Rng& rng) {
  const auto& actor = policy.actor();
  if (static_cast<int>(obs.data.size()) != actor.obs_dim())
    throw ShapeMismatch("observation size " + std::to_string(obs.data.size()) +
                        " does not match policy input " + std::to_string(actor.obs_dim()));
  if (actor.act_dim() != 2) throw ShapeMismatch("racing policies have 2 action dims");
  std::vector<double> a = deterministic ? actor.act_deterministic(obs.data.data())
                                        : actor.act_stochastic(obs.data.data(), rng);
  sim::Action act;
  act.steering = a[0];
  act.acceleration = a[1];
  return act;
}

}  // namespace fastrl::sac
