#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fastrl/embed/autoencoder.hpp"
#include "fastrl/embed/representation.hpp"
#include "fastrl/embed/text_encoder.hpp"
#include "fastrl/repo/repository.hpp"
#include "fastrl/sac/learner.hpp"

namespace fastrl::transfer {

struct TransferConfig {
  int64_t K = 100;               // environment steps between comparisons
  double theta = 0.5;            // similarity threshold
  embed::RepMode mode = embed::RepMode::F;
  bool source_deterministic = true;  // how a selected source policy acts
};

constexpr int kTargetPolicy = -1;

struct SelectionOutcome {
  std::vector<double> scores;  // cosine per source, repository order
  int chosen = kTargetPolicy;  // source index or kTargetPolicy
  double max_score = 0.0;
};

// Argmax cosine against every cached source representation; the source wins
// only when its score reaches theta. Ties break to the lowest index. Empty
// repositories select the target.
SelectionOutcome select_policy(const embed::TaskRepresentation& target_rep,
                               const repo::RepositoryIndex& index, double theta);

struct ComparisonEvent {
  int64_t step = 0;  // 1-based environment step at which the selection fired
  bool deferred = false;  // fired later than scheduled (too few frames)
  SelectionOutcome outcome;
};

struct UsageLog {
  std::vector<std::string> source_names;
  std::vector<int> acting;  // per step: source index or kTargetPolicy
  std::vector<ComparisonEvent> comparisons;

  int64_t total_steps() const { return static_cast<int64_t>(acting.size()); }
};

// Fraction of all timesteps each source policy acted. Sources that never
// acted are omitted; the remainder up to 1 is target-policy usage.
// Throws EmptyLog on an empty log.
std::map<std::string, double> usage_percentages(const UsageLog& log);

struct FastRunConfig {
  sac::SacHyperparams sac;
  TransferConfig transfer;
  std::string target_name = "target";
  std::string target_description;
  uint64_t seed = 42;
  sac::TrainOptions train;
};

struct FastRunResult {
  sac::TrainRunResult train;
  UsageLog usage;
};

// Algorithm: every step the current policy (target or a selected source) acts
// and the transition feeds the target learner's replay buffer; the target is
// the only policy updated. Every K steps the most recent 4 frames are encoded,
// the task representation rebuilt, and the acting policy re-selected. The
// comparison machinery never touches the learner or environment RNG streams,
// so an unreachable theta reproduces the baseline run bit for bit.
//
// `index` may be null or empty (no transfer). Throws IncompatibleRepository
// when the repository lacks representations for the configured mode, before
// any environment stepping.
FastRunResult run_fast_training(sim::Env& env, const repo::RepositoryIndex* index,
                                const embed::Autoencoder* ae,
                                const embed::TextEncoderConfig& text_cfg,
                                const embed::TextEmbeddingTable* text_overrides,
                                const FastRunConfig& cfg,
                                sac::TrainingCallbacks* extra = nullptr);

}  // namespace fastrl::transfer
