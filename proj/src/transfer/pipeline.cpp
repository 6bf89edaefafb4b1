#include "fastrl/transfer/pipeline.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "fastrl/core/hash.hpp"
#include "fastrl/errors.hpp"

namespace fastrl::transfer {

SelectionOutcome select_policy(const embed::TaskRepresentation& target_rep,
                               const repo::RepositoryIndex& index, double theta) {
  SelectionOutcome out;
  out.max_score = -std::numeric_limits<double>::infinity();
  if (index.empty()) {
    out.chosen = kTargetPolicy;
    return out;
  }
  out.scores.reserve(index.size());
  int best = -1;
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto& rec = index.records()[i];
    auto it = rec.cached_reps.find(target_rep.mode);
    if (it == rec.cached_reps.end())
      throw ModeMismatch("source '" + rec.name + "' has no cached representation for mode " +
                         embed::to_string(target_rep.mode));
    const double score = embed::cosine_similarity(it->second, target_rep);
    out.scores.push_back(score);
    if (score > out.max_score) {
      out.max_score = score;
      best = static_cast<int>(i);
    }
  }
  out.chosen = (out.max_score >= theta) ? best : kTargetPolicy;
  return out;
}

std::map<std::string, double> usage_percentages(const UsageLog& log) {
  if (log.acting.empty()) throw EmptyLog("usage log has no steps");
  std::map<std::string, double> out;
  std::vector<int64_t> counts(log.source_names.size(), 0);
  for (int idx : log.acting) {
    if (idx >= 0 && idx < static_cast<int>(counts.size())) ++counts[idx];
  }
  const double total = static_cast<double>(log.acting.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) out[log.source_names[i]] = static_cast<double>(counts[i]) / total;
  }
  return out;
}

namespace {

// Training-loop hook implementing the K-periodic similarity comparison.
class FastDriver : public sac::TrainingCallbacks {
 public:
  FastDriver(const repo::RepositoryIndex* index, const embed::Autoencoder* ae,
             const TransferConfig& cfg, std::vector<double> target_text_emb,
             uint64_t transfer_seed, sac::TrainingCallbacks* extra)
      : index_(index),
        ae_(ae),
        cfg_(cfg),
        target_text_emb_(std::move(target_text_emb)),
        rng_(transfer_seed),
        extra_(extra) {
    if (index_) {
      for (const auto& r : index_->records()) usage_.source_names.push_back(r.name);
    }
  }

  std::optional<sim::Action> override_action(const sim::Observation& obs) override {
    if (current_ < 0) return std::nullopt;
    const auto& policy = index_->records()[current_].policy;
    return sac::select_action(policy, obs, cfg_.source_deterministic, rng_);
  }

  void on_step(const StepContext& ctx) override {
    usage_.acting.push_back(current_);
    ++count_;

    const bool have_sources = index_ && !index_->empty();
    if (count_ >= cfg_.K && !pending_) {
      pending_ = true;
      scheduled_step_ = ctx.step + 1;
    }

    if (have_sources) {
      // keep the rolling 4-frame window warm near scheduled comparisons; a
      // gap in rendered steps restarts the window so stacks stay consecutive
      if (pending_ || count_ + 3 >= cfg_.K) {
        if (!frames_.empty() && ctx.step != last_frame_step_ + 1) frames_.clear();
        frames_.push_back(ctx.env->render_frame());
        last_frame_step_ = ctx.step;
        if (frames_.size() > embed::FrameStack::kFrames) frames_.pop_front();
      }
      if (pending_ && frames_.size() == embed::FrameStack::kFrames) {
        fire_comparison(ctx.step + 1);
      }
    } else if (pending_) {
      // vacuous comparison: nothing to compare against, target keeps acting
      ComparisonEvent ev;
      ev.step = ctx.step + 1;
      ev.deferred = false;
      ev.outcome.chosen = kTargetPolicy;
      ev.outcome.max_score = -std::numeric_limits<double>::infinity();
      usage_.comparisons.push_back(std::move(ev));
      pending_ = false;
      count_ = 0;
    }

    if (ctx.result->done) frames_.clear();
    if (extra_) extra_->on_step(ctx);
  }

  bool should_stop(int64_t step, sac::SacLearner& learner) override {
    return extra_ ? extra_->should_stop(step, learner) : false;
  }

  UsageLog take_usage() { return std::move(usage_); }

 private:
  void fire_comparison(int64_t step) {
    std::vector<sim::Frame> window(frames_.begin(), frames_.end());
    const embed::FrameStack stack = embed::make_stack(window, 0);
    const std::vector<double> frame_emb = ae_->encode(stack);
    const embed::TaskRepresentation rep = embed::build_representation(
        frame_emb, cfg_.mode == embed::RepMode::FT ? &target_text_emb_ : nullptr, cfg_.mode);
    ComparisonEvent ev;
    ev.step = step;
    ev.deferred = step != scheduled_step_;
    ev.outcome = select_policy(rep, *index_, cfg_.theta);
    current_ = ev.outcome.chosen;
    usage_.comparisons.push_back(std::move(ev));
    pending_ = false;
    count_ = 0;
  }

  const repo::RepositoryIndex* index_;
  const embed::Autoencoder* ae_;
  TransferConfig cfg_;
  std::vector<double> target_text_emb_;
  core::Rng rng_;  // transfer-machinery stream, never the learner's
  sac::TrainingCallbacks* extra_;

  std::deque<sim::Frame> frames_;
  int64_t last_frame_step_ = -2;
  int64_t count_ = 0;
  bool pending_ = false;
  int64_t scheduled_step_ = 0;
  int current_ = kTargetPolicy;
  UsageLog usage_;
};

}  // namespace

FastRunResult run_fast_training(sim::Env& env, const repo::RepositoryIndex* index,
                                const embed::Autoencoder* ae,
                                const embed::TextEncoderConfig& text_cfg,
                                const embed::TextEmbeddingTable* text_overrides,
                                const FastRunConfig& cfg,
                                sac::TrainingCallbacks* extra) {
  if (cfg.transfer.K < 1) throw ConfigError("K must be at least 1");

  const bool have_sources = index && !index->empty();
  std::vector<double> target_text_emb;
  if (have_sources) {
    if (!ae) throw IncompatibleRepository("transfer requires an autoencoder checkpoint");
    if (!index->representations_ready(cfg.transfer.mode))
      throw IncompatibleRepository("repository lacks representations for mode " +
                                   embed::to_string(cfg.transfer.mode));
    const std::size_t expect =
        static_cast<std::size_t>(ae->latent_dim()) +
        (cfg.transfer.mode == embed::RepMode::FT ? static_cast<std::size_t>(text_cfg.d_text)
                                                 : 0u);
    for (const auto& rec : index->records()) {
      const auto& rep = rec.cached_reps.at(cfg.transfer.mode);
      if (rep.values.size() != expect)
        throw IncompatibleRepository("representation length mismatch for '" + rec.name +
                                     "': have " + std::to_string(rep.values.size()) +
                                     ", expected " + std::to_string(expect));
      if (rec.policy.actor().obs_dim() != env.observation_dim())
        throw IncompatibleRepository("source policy '" + rec.name +
                                     "' does not fit this observation space");
    }
    if (cfg.transfer.mode == embed::RepMode::FT) {
      if (text_overrides) {
        if (auto v = text_overrides->lookup(cfg.target_name)) target_text_emb = *v;
      }
      if (target_text_emb.empty())
        target_text_emb = embed::embed_text(text_cfg, cfg.target_description);
    }
  }

  sac::SacLearner learner(env.observation_dim(), 2, cfg.sac, cfg.seed);
  const uint64_t transfer_seed =
      core::fnv1a64("transfer-stream", core::kFnvOffset ^ cfg.seed);
  FastDriver driver(index, ae, cfg.transfer, std::move(target_text_emb), transfer_seed,
                    extra);

  FastRunResult result;
  result.train = sac::run_training_loop(env, learner, cfg.train, &driver);
  result.usage = driver.take_usage();
  return result;
}

}  // namespace fastrl::transfer
