#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fastrl/embed/autoencoder.hpp"
#include "fastrl/embed/representation.hpp"
#include "fastrl/embed/text_encoder.hpp"
#include "fastrl/sac/learner.hpp"
#include "fastrl/sim/scripted.hpp"

namespace fastrl::repo {

// One stored source task: frames + description + frozen expert policy, plus
// caches that are recomputable from those raw fields.
struct SourceTaskRecord {
  std::string name;
  std::string description;
  sac::PolicyHandle policy;  // always frozen
  sac::SacHyperparams policy_hyperparams;
  std::vector<embed::FrameStack> stacks;  // highest-reward episode first
  std::optional<std::vector<double>> cached_frame_embedding;
  std::map<embed::RepMode, embed::TaskRepresentation> cached_reps;
};

class RepositoryIndex {
 public:
  // Throws DuplicateName / UnfrozenPolicy / EmptyDataset (no stacks).
  void add_source_task(const std::string& name, const std::string& description,
                       sac::PolicyHandle policy, const sac::SacHyperparams& hp,
                       std::vector<embed::FrameStack> stacks);

  const std::vector<SourceTaskRecord>& records() const { return records_; }
  SourceTaskRecord& mutable_record(std::size_t i) { return records_.at(i); }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::vector<std::string> names() const;

  // Embeds each record's representative stack (top episode) and builds the
  // cached representation for `mode`. Uses the override table when the task
  // name is present in it, the hashed text encoder otherwise.
  void precompute_representations(const embed::Autoencoder& ae,
                                  const embed::TextEncoderConfig& text_cfg,
                                  const embed::TextEmbeddingTable* overrides,
                                  embed::RepMode mode);

  bool representations_ready(embed::RepMode mode) const;

  std::string ae_checkpoint_ref;
  std::string text_config_ref;

  // Directory layout: a manifest plus per-task policy / frames / cached-
  // representation files, each checksummed in the manifest.
  void save(const std::string& dir) const;
  static RepositoryIndex load(const std::string& dir);

  uint64_t content_checksum() const;

 private:
  std::vector<SourceTaskRecord> records_;
};

struct EpisodeSample {
  embed::FrameStack stack;
  double episode_reward = 0.0;
};

// Runs `n_episodes` of the policy, ranks them by episodic reward and returns
// the last-4-frame stack of the `keep_top` best episodes (reward descending).
// Episodes shorter than 4 frames are skipped with a warning.
std::vector<EpisodeSample> generate_source_dataset(const sim::DriverFn& policy,
                                                   sim::Env& env, int n_episodes,
                                                   int keep_top, core::Rng& rng,
                                                   std::vector<std::string>* warnings = nullptr);

sim::DriverFn driver_from_policy(const sac::PolicyHandle& policy, bool deterministic);

}  // namespace fastrl::repo
