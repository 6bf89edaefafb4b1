#include "fastrl/sac/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "fastrl/core/hash.hpp"
#include "fastrl/core/kernels.hpp"
#include "fastrl/core/textio.hpp"
#include "fastrl/errors.hpp"

namespace fastrl::sac {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }

}  // namespace

void SacHyperparams::validate() const {
  if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("gamma must be in [0, 1)");
  if (tau <= 0.0 || tau > 1.0) throw ConfigError("tau must be in (0, 1]");
  if (alpha < 0.0) throw ConfigError("alpha must be non-negative");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (static_cast<std::size_t>(batch_size) > replay_capacity)
    throw ConfigError("batch_size cannot exceed replay_capacity");
  if (gradient_steps < 1) throw ConfigError("gradient_steps must be positive");
  if (hidden < 1) throw ConfigError("hidden width must be positive");
  if (total_timesteps < 0) throw ConfigError("total_timesteps must be non-negative");
}

double compute_return(const std::vector<double>& rewards, double gamma) {
  double g = 0.0;
  for (auto it = rewards.rbegin(); it != rewards.rend(); ++it) g = *it + gamma * g;
  return g;
}

SacLearner::SacLearner(int obs_dim, int act_dim, SacHyperparams hp, uint64_t seed)
    : obs_dim_(obs_dim),
      act_dim_(act_dim),
      hp_(hp),
      rng_(seed),
      replay_(obs_dim, act_dim, hp.replay_capacity) {
  hp_.validate();
  core::Rng init_rng = rng_.split(0xac70);
  actor_ = ActorNet(obs_dim, act_dim, hp_.hidden, init_rng);
  MlpSpec qspec;
  qspec.input = obs_dim + act_dim;
  qspec.hidden = {hp_.hidden, hp_.hidden};
  qspec.output = 1;
  q1_ = Mlp(qspec);
  q2_ = Mlp(qspec);
  q1_.init_weights(init_rng);
  q2_.init_weights(init_rng);
  tq1_ = q1_;
  tq2_ = q2_;
  actor_adam_.m.assign(actor_.net().param_count(), 0.0);
  actor_adam_.v.assign(actor_.net().param_count(), 0.0);
  q1_adam_.m.assign(q1_.param_count(), 0.0);
  q1_adam_.v.assign(q1_.param_count(), 0.0);
  q2_adam_.m.assign(q2_.param_count(), 0.0);
  q2_adam_.v.assign(q2_.param_count(), 0.0);
}

sim::Action SacLearner::act(const sim::Observation& obs, bool deterministic) {
  if (static_cast<int>(obs.data.size()) != obs_dim_)
    throw ShapeMismatch("observation does not match learner input");
  const std::vector<double> a = deterministic
                                    ? actor_.act_deterministic(obs.data.data())
                                    : actor_.act_stochastic(obs.data.data(), rng_);
  sim::Action action;
  action.steering = a[0];
  action.acceleration = a[1];
  return action;
}

void SacLearner::record(const sim::Observation& obs, const sim::Action& action,
                        double reward, const sim::Observation& next_obs, bool terminal) {
  if (static_cast<int>(obs.data.size()) != obs_dim_ ||
      static_cast<int>(next_obs.data.size()) != obs_dim_)
    throw ShapeMismatch("observation does not match learner input");
  const double act[2] = {action.steering, action.acceleration};
  replay_.add(obs.data.data(), act, reward, next_obs.data.data(), terminal);
}

bool SacLearner::ready_to_update() const {
  const std::size_t threshold =
      std::max<std::size_t>(static_cast<std::size_t>(hp_.learning_starts),
                            static_cast<std::size_t>(hp_.batch_size));
  return replay_.size() >= threshold;
}

void SacLearner::fill_critic_input(const double* obs, const double* act, int n,
                                   std::vector<double>& out) const {
  out.resize(std::size_t(n) * (obs_dim_ + act_dim_));
  for (int b = 0; b < n; ++b) {
    std::copy(obs + std::size_t(b) * obs_dim_, obs + std::size_t(b + 1) * obs_dim_,
              out.begin() + std::size_t(b) * (obs_dim_ + act_dim_));
    std::copy(act + std::size_t(b) * act_dim_, act + std::size_t(b + 1) * act_dim_,
              out.begin() + std::size_t(b) * (obs_dim_ + act_dim_) + obs_dim_);
  }
}

std::vector<double> SacLearner::compute_targets(const SacBatch& batch,
                                                const std::vector<double>* eps_in) {
  const int n = batch.n;
  Mlp::Cache& actor_cache = ws_.actor_cache;
  actor_.net().forward(batch.next_obs.data(), n, actor_cache);

  std::vector<double>& next_act = ws_.next_act;
  std::vector<double>& logp = ws_.logp;
  next_act.resize(std::size_t(n) * act_dim_);
  logp.assign(n, 0.0);
  for (int b = 0; b < n; ++b) {
    const double* row = actor_cache.out.data() + std::size_t(b) * 2 * act_dim_;
    for (int i = 0; i < act_dim_; ++i) {
      const double mean = row[i];
      const double log_std = bound_log_std(row[act_dim_ + i]);
      const double sigma = std::exp(log_std);
      const double eps = eps_in ? (*eps_in)[std::size_t(b) * act_dim_ + i] : rng_.normal();
      const double u = mean + sigma * eps;
      const double a = std::tanh(u);
      next_act[std::size_t(b) * act_dim_ + i] = a;
      const double t = 2.0 * (std::log(2.0) - u - softplus(-2.0 * u));
      logp[b] += -0.5 * eps * eps - log_std - 0.5 * kLogTwoPi - t;
    }
  }

  fill_critic_input(batch.next_obs.data(), next_act.data(), n, ws_.x);
  tq1_.forward(ws_.x.data(), n, ws_.t1_cache);
  tq2_.forward(ws_.x.data(), n, ws_.t2_cache);

  std::vector<double> y(n);
  for (int b = 0; b < n; ++b) {
    const double qmin = std::min(ws_.t1_cache.out[b], ws_.t2_cache.out[b]);
    y[b] = batch.rew[b] +
           hp_.gamma * (1.0 - batch.done[b]) * (qmin - hp_.alpha * logp[b]);
  }
  return y;
}

double SacLearner::critic_loss(const SacBatch& batch, const std::vector<double>& y,
                               int which) const {
  const Mlp& q = which == 1 ? q1_ : q2_;
  fill_critic_input(batch.obs.data(), batch.act.data(), batch.n, ws_.x);
  Mlp::Cache& cache = ws_.q1_cache;
  q.forward(ws_.x.data(), batch.n, cache);
  double loss = 0.0;
  for (int b = 0; b < batch.n; ++b) {
    const double d = cache.out[b] - y[b];
    loss += d * d;
  }
  return loss / batch.n;
}

double SacLearner::critic_grad(const SacBatch& batch, const std::vector<double>& y,
                               int which, std::vector<double>& grads) const {
  const Mlp& q = which == 1 ? q1_ : q2_;
  fill_critic_input(batch.obs.data(), batch.act.data(), batch.n, ws_.x);
  Mlp::Cache& cache = ws_.q1_cache;
  q.forward(ws_.x.data(), batch.n, cache);
  std::vector<double>& dy = ws_.dy;
  dy.resize(batch.n);
  double loss = 0.0;
  for (int b = 0; b < batch.n; ++b) {
    const double d = cache.out[b] - y[b];
    loss += d * d;
    dy[b] = 2.0 * d / batch.n;
  }
  grads.assign(q.param_count(), 0.0);
  q.backward(ws_.x.data(), batch.n, cache, dy.data(), grads, nullptr);
  return loss / batch.n;
}

double SacLearner::actor_loss(const SacBatch& batch, const std::vector<double>& eps) const {
  const int n = batch.n;
  Mlp::Cache& cache = ws_.actor_cache;
  actor_.net().forward(batch.obs.data(), n, cache);
  std::vector<double>& act = ws_.act;
  std::vector<double>& logp = ws_.logp;
  act.resize(std::size_t(n) * act_dim_);
  logp.assign(n, 0.0);
  double loss = 0.0;
  for (int b = 0; b < n; ++b) {
    const double* row = cache.out.data() + std::size_t(b) * 2 * act_dim_;
    for (int i = 0; i < act_dim_; ++i) {
      const double mean = row[i];
      const double log_std = bound_log_std(row[act_dim_ + i]);
      const double sigma = std::exp(log_std);
      const double e = eps[std::size_t(b) * act_dim_ + i];
      const double u = mean + sigma * e;
      const double a = std::tanh(u);
      act[std::size_t(b) * act_dim_ + i] = a;
      const double t = 2.0 * (std::log(2.0) - u - softplus(-2.0 * u));
      logp[b] += -0.5 * e * e - log_std - 0.5 * kLogTwoPi - t;
    }
  }
  fill_critic_input(batch.obs.data(), act.data(), n, ws_.x);
  q1_.forward(ws_.x.data(), n, ws_.q1_cache);
  q2_.forward(ws_.x.data(), n, ws_.q2_cache);
  for (int b = 0; b < n; ++b)
    loss += hp_.alpha * logp[b] - std::min(ws_.q1_cache.out[b], ws_.q2_cache.out[b]);
  return loss / n;
}

double SacLearner::actor_grad(const SacBatch& batch, const std::vector<double>& eps,
                              std::vector<double>& grads, double* entropy_term) const {
  const int n = batch.n;
  Mlp::Cache& cache = ws_.actor_cache;
  actor_.net().forward(batch.obs.data(), n, cache);

  std::vector<double>& act = ws_.act;
  std::vector<double>& mean = ws_.mean;
  std::vector<double>& log_std = ws_.log_std;
  std::vector<double>& raw = ws_.raw;
  std::vector<double>& sig = ws_.sig;
  std::vector<double>& logp = ws_.logp;
  act.resize(std::size_t(n) * act_dim_);
  mean.resize(std::size_t(n) * act_dim_);
  log_std.resize(std::size_t(n) * act_dim_);
  raw.resize(std::size_t(n) * act_dim_);
  sig.resize(std::size_t(n) * act_dim_);
  logp.assign(n, 0.0);
  for (int b = 0; b < n; ++b) {
    const double* row = cache.out.data() + std::size_t(b) * 2 * act_dim_;
    for (int i = 0; i < act_dim_; ++i) {
      const std::size_t k = std::size_t(b) * act_dim_ + i;
      mean[k] = row[i];
      raw[k] = row[act_dim_ + i];
      log_std[k] = bound_log_std(raw[k]);
      sig[k] = std::exp(log_std[k]);
      const double u = mean[k] + sig[k] * eps[k];
      act[k] = std::tanh(u);
      const double t = 2.0 * (std::log(2.0) - u - softplus(-2.0 * u));
      logp[b] += -0.5 * eps[k] * eps[k] - log_std[k] - 0.5 * kLogTwoPi - t;
    }
  }

  // dQmin/da through whichever critic is the per-sample minimum
  fill_critic_input(batch.obs.data(), act.data(), n, ws_.x);
  Mlp::Cache& c1 = ws_.q1_cache;
  Mlp::Cache& c2 = ws_.q2_cache;
  q1_.forward(ws_.x.data(), n, c1);
  q2_.forward(ws_.x.data(), n, c2);
  std::vector<double>& dy1 = ws_.dy1;
  std::vector<double>& dy2 = ws_.dy2;
  dy1.assign(n, 0.0);
  dy2.assign(n, 0.0);
  double loss = 0.0;
  double entropy = 0.0;
  for (int b = 0; b < n; ++b) {
    const double qmin = std::min(c1.out[b], c2.out[b]);
    loss += hp_.alpha * logp[b] - qmin;
    entropy += hp_.alpha * logp[b];
    if (c1.out[b] <= c2.out[b])
      dy1[b] = -1.0 / n;
    else
      dy2[b] = -1.0 / n;
  }
  loss /= n;
  entropy /= n;
  if (entropy_term) *entropy_term = entropy;

  const int in_dim = obs_dim_ + act_dim_;
  ws_.q_scratch1.assign(q1_.param_count(), 0.0);
  ws_.q_scratch2.assign(q2_.param_count(), 0.0);
  std::vector<double>& dx1 = ws_.dx1;
  std::vector<double>& dx2 = ws_.dx2;
  dx1.resize(std::size_t(n) * in_dim);
  dx2.resize(std::size_t(n) * in_dim);
  q1_.backward(ws_.x.data(), n, c1, dy1.data(), ws_.q_scratch1, dx1.data());
  q2_.backward(ws_.x.data(), n, c2, dy2.data(), ws_.q_scratch2, dx2.data());

  // gradient on the actor heads
  std::vector<double>& dout = ws_.dout;
  dout.assign(std::size_t(n) * 2 * act_dim_, 0.0);
  const double half_span = 0.5 * (kLogStdMax - kLogStdMin);
  for (int b = 0; b < n; ++b) {
    for (int i = 0; i < act_dim_; ++i) {
      const std::size_t k = std::size_t(b) * act_dim_ + i;
      const double a = act[k];
      const double one_m_a2 = 1.0 - a * a;
      const double g_a = dx1[std::size_t(b) * in_dim + obs_dim_ + i] +
                         dx2[std::size_t(b) * in_dim + obs_dim_ + i];
      const double dmu = (hp_.alpha * 2.0 * a) / n + g_a * one_m_a2;
      const double se = sig[k] * eps[k];
      const double dlogs = (hp_.alpha * (-1.0 + 2.0 * a * se)) / n + g_a * one_m_a2 * se;
      const double th = std::tanh(raw[k]);
      dout[std::size_t(b) * 2 * act_dim_ + i] = dmu;
      dout[std::size_t(b) * 2 * act_dim_ + act_dim_ + i] =
          dlogs * half_span * (1.0 - th * th);
    }
  }

  grads.assign(actor_.net().param_count(), 0.0);
  actor_.net().backward(batch.obs.data(), n, cache, dout.data(), grads, nullptr);
  return loss;
}

void SacLearner::adam_apply(std::vector<double>& params, const std::vector<double>& grads,
                            AdamState& state) {
  ++state.t;
  const double c1 = 1.0 - std::pow(0.9, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(0.999, static_cast<double>(state.t));
  core::adam_step(params.data(), grads.data(), state.m.data(), state.v.data(), params.size(),
                  hp_.learning_rate, 0.9, 0.999, 1e-8, 0.0, c1, c2);
}

void SacLearner::soft_update_targets() {
  auto blend = [&](Mlp& target, const Mlp& online) {
    auto& t = target.params();
    const auto& q = online.params();
    const double keep = 1.0 - hp_.tau;
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = q[i] + keep * (t[i] - q[i]);
  };
  blend(tq1_, q1_);
  blend(tq2_, q2_);
}

SacLosses SacLearner::update() {
  if (frozen_) throw FrozenPolicy("learner is frozen");
  replay_.sample(hp_.batch_size, rng_, ws_.batch);
  return update_on_batch(ws_.batch);
}

SacLosses SacLearner::update_on_batch(const SacBatch& batch) {
  if (frozen_) throw FrozenPolicy("learner is frozen");
  SacLosses losses;
  std::vector<double> y = compute_targets(batch, nullptr);

  std::vector<double>& grads = ws_.grads;
  losses.critic1 = critic_grad(batch, y, 1, grads);
  adam_apply(q1_.params(), grads, q1_adam_);
  losses.critic2 = critic_grad(batch, y, 2, grads);
  adam_apply(q2_.params(), grads, q2_adam_);

  std::vector<double>& eps = ws_.eps;
  eps.resize(std::size_t(batch.n) * act_dim_);
  for (auto& e : eps) e = rng_.normal();
  losses.actor = actor_grad(batch, eps, grads, &losses.entropy_term);
  adam_apply(actor_.net().params(), grads, actor_adam_);

  soft_update_targets();

  if (!std::isfinite(losses.critic1) || !std::isfinite(losses.critic2) ||
      !std::isfinite(losses.actor))
    throw NonFiniteLoss("sac update produced a non-finite loss");
  return losses;
}

PolicyHandle SacLearner::policy_snapshot(const std::string& id, bool frozen) const {
  return PolicyHandle(id, actor_, frozen);
}

uint64_t SacLearner::actor_param_hash() const {
  return core::fnv1a64(actor_.net().params());
}

TrainRunResult run_training_loop(sim::Env& env, SacLearner& learner,
                                 const TrainOptions& opts, TrainingCallbacks* callbacks) {
  TrainRunResult res;
  const int64_t total = learner.hyperparams().total_timesteps;
  if (total == 0) {
    res.policy = learner.policy_snapshot("target", false);
    res.final_param_hash = learner.actor_param_hash();
    return res;
  }

  sim::Observation obs = env.episode_done() ? env.reset() : env.observe();
  double episode_reward = 0.0;
  for (int64_t step = 0; step < total; ++step) {
    std::optional<sim::Action> overridden =
        callbacks ? callbacks->override_action(obs) : std::nullopt;
    const sim::Action action = overridden ? *overridden : learner.act(obs, false);

    sim::StepResult sr = env.step(action);
    // crashes terminate the MDP; time/route caps are truncations and bootstrap
    const bool terminal = sr.info.crashed || sr.info.off_track;
    learner.record(obs, action, sr.reward, sr.obs, terminal);
    episode_reward += sr.reward;

    if (opts.record_trajectory) {
      res.action_trace.push_back(action.steering);
      res.action_trace.push_back(action.acceleration);
      res.reward_trace.push_back(sr.reward);
    }

    if (learner.ready_to_update())
      for (int g = 0; g < learner.hyperparams().gradient_steps; ++g) learner.update();

    if (callbacks) {
      TrainingCallbacks::StepContext ctx;
      ctx.step = step;
      ctx.result = &sr;
      ctx.env = &env;
      ctx.learner = &learner;
      callbacks->on_step(ctx);
    }

    if (sr.done) {
      res.curve.push_back({step + 1, episode_reward});
      episode_reward = 0.0;
      obs = env.reset();
    } else {
      obs = std::move(sr.obs);
    }

    res.steps_run = step + 1;
    if (callbacks && callbacks->should_stop(step + 1, learner)) break;
  }

  res.policy = learner.policy_snapshot("target", false);
  res.final_param_hash = learner.actor_param_hash();
  return res;
}

TrainRunResult train_baseline(sim::Env& env, const SacHyperparams& hp, uint64_t seed,
                              const TrainOptions& opts, TrainingCallbacks* callbacks) {
  SacLearner learner(env.observation_dim(), 2, hp, seed);
  return run_training_loop(env, learner, opts, callbacks);
}

// --- checkpoints ---

namespace {
constexpr char kPolicyMagic[8] = {'F', 'R', 'L', 'P', 'O', 'L', 'I', '1'};
constexpr uint32_t kPolicyVersion = 1;

void put_hyperparams(std::string& out, const SacHyperparams& hp) {
  core::put_f64(out, hp.learning_rate);
  core::put_u64(out, static_cast<uint64_t>(hp.batch_size));
  core::put_f64(out, hp.gamma);
  core::put_f64(out, hp.tau);
  core::put_f64(out, hp.alpha);
  core::put_u64(out, static_cast<uint64_t>(hp.gradient_steps));
  core::put_u64(out, static_cast<uint64_t>(hp.learning_starts));
  core::put_u64(out, hp.replay_capacity);
  core::put_u64(out, static_cast<uint64_t>(hp.total_timesteps));
  core::put_u64(out, static_cast<uint64_t>(hp.hidden));
}

SacHyperparams get_hyperparams(core::ByteReader& r) {
  SacHyperparams hp;
  hp.learning_rate = r.get_f64();
  hp.batch_size = static_cast<int>(r.get_u64());
  hp.gamma = r.get_f64();
  hp.tau = r.get_f64();
  hp.alpha = r.get_f64();
  hp.gradient_steps = static_cast<int>(r.get_u64());
  hp.learning_starts = static_cast<int64_t>(r.get_u64());
  hp.replay_capacity = r.get_u64();
  hp.total_timesteps = static_cast<int64_t>(r.get_u64());
  hp.hidden = static_cast<int>(r.get_u64());
  return hp;
}
}  // namespace

void save_policy(const PolicyHandle& policy, const SacHyperparams& hp,
                 const std::string& path) {
  std::string out;
  out.append(kPolicyMagic, sizeof(kPolicyMagic));
  core::put_u32(out, kPolicyVersion);
  core::put_u32(out, static_cast<uint32_t>(policy.id().size()));
  out.append(policy.id());
  core::put_u32(out, policy.frozen() ? 1u : 0u);
  put_hyperparams(out, hp);
  const auto& actor = policy.actor();
  core::put_u32(out, static_cast<uint32_t>(actor.obs_dim()));
  core::put_u32(out, static_cast<uint32_t>(actor.act_dim()));
  core::put_u32(out, static_cast<uint32_t>(actor.hidden()));
  const auto& params = actor.net().params();
  core::put_u64(out, params.size());
  core::write_bytes(out, params.data(), params.size() * sizeof(double));
  core::put_u64(out, core::fnv1a64_bytes(out.data(), out.size()));
  core::write_file(path, out);
}

PolicyCheckpoint load_policy(const std::string& path) {
  const std::string data = core::read_file(path);
  if (data.size() < sizeof(kPolicyMagic) + 8) throw CorruptFile("policy checkpoint too short");
  if (std::memcmp(data.data(), kPolicyMagic, sizeof(kPolicyMagic)) != 0)
    throw CorruptFile("bad policy checkpoint magic");
  uint64_t file_sum;
  std::memcpy(&file_sum, data.data() + data.size() - 8, 8);
  if (file_sum != core::fnv1a64_bytes(data.data(), data.size() - 8))
    throw CorruptFile("policy checkpoint checksum mismatch");

  std::string body = data.substr(sizeof(kPolicyMagic), data.size() - sizeof(kPolicyMagic) - 8);
  core::ByteReader r(body);
  const uint32_t version = r.get_u32();
  if (version != kPolicyVersion)
    throw VersionMismatch("policy checkpoint version " + std::to_string(version));
  const uint32_t id_len = r.get_u32();
  std::string id(id_len, '\0');
  r.get_bytes(id.data(), id_len);
  const bool frozen = r.get_u32() != 0;
  SacHyperparams hp = get_hyperparams(r);
  const int obs_dim = static_cast<int>(r.get_u32());
  const int act_dim = static_cast<int>(r.get_u32());
  const int hidden = static_cast<int>(r.get_u32());
  const uint64_t count = r.get_u64();

  core::Rng dummy(0);
  ActorNet actor(obs_dim, act_dim, hidden, dummy);
  if (count != actor.net().param_count())
    throw CorruptFile("policy checkpoint parameter count mismatch");
  r.get_bytes(actor.net().params().data(), count * sizeof(double));

  PolicyCheckpoint ckpt;
  ckpt.policy = PolicyHandle(id, std::move(actor), frozen);
  ckpt.hyperparams = hp;
  return ckpt;
}

}  // namespace fastrl::sac
