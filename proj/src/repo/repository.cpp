#include "fastrl/repo/repository.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <numeric>

#include "fastrl/core/hash.hpp"
#include "fastrl/core/textio.hpp"
#include "fastrl/errors.hpp"

namespace fs = std::filesystem;

namespace fastrl::repo {

namespace {

void validate_task_name(const std::string& name) {
  if (name.empty()) throw ConfigError("task name must not be empty");
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      throw ConfigError("task name '" + name + "' may only use [A-Za-z0-9_-]");
  }
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += core::format_double(v[i]);
  }
  return out;
}

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  if (core::trim(s).empty()) return out;
  for (const auto& part : core::split(s, ',')) out.push_back(core::parse_double(part));
  return out;
}

}  // namespace

void RepositoryIndex::add_source_task(const std::string& name, const std::string& description,
                                      sac::PolicyHandle policy, const sac::SacHyperparams& hp,
                                      std::vector<embed::FrameStack> stacks) {
  validate_task_name(name);
  for (const auto& r : records_)
    if (r.name == name) throw DuplicateName("source task '" + name + "' already present");
  if (!policy.frozen()) throw UnfrozenPolicy("source task '" + name + "' needs a frozen policy");
  if (stacks.empty()) throw EmptyDataset("source task '" + name + "' needs frame stacks");
  SourceTaskRecord rec;
  rec.name = name;
  rec.description = description;
  rec.policy = std::move(policy);
  rec.policy_hyperparams = hp;
  rec.stacks = std::move(stacks);
  records_.push_back(std::move(rec));
}

std::vector<std::string> RepositoryIndex::names() const {
  std::vector<std::string> out;
  for (const auto& r : records_) out.push_back(r.name);
  return out;
}

void RepositoryIndex::precompute_representations(const embed::Autoencoder& ae,
                                                 const embed::TextEncoderConfig& text_cfg,
                                                 const embed::TextEmbeddingTable* overrides,
                                                 embed::RepMode mode) {
  for (auto& rec : records_) {
    if (!rec.cached_frame_embedding)
      rec.cached_frame_embedding = ae.encode(rec.stacks.front());
    if (mode == embed::RepMode::F) {
      rec.cached_reps[mode] =
          embed::build_representation(*rec.cached_frame_embedding, nullptr, mode);
    } else {
      std::vector<double> text_emb;
      if (overrides) {
        if (auto v = overrides->lookup(rec.name)) text_emb = *v;
      }
      if (text_emb.empty()) text_emb = embed::embed_text(text_cfg, rec.description);
      rec.cached_reps[mode] = embed::build_representation(*rec.cached_frame_embedding,
                                                          &text_emb, mode);
    }
  }
}

bool RepositoryIndex::representations_ready(embed::RepMode mode) const {
  for (const auto& r : records_)
    if (!r.cached_reps.count(mode)) return false;
  return true;
}

void RepositoryIndex::save(const std::string& dir) const {
  fs::create_directories(dir);
  core::KvFile manifest;
  manifest.set("", "format_version", "1");
  manifest.set("", "ae_checkpoint", ae_checkpoint_ref);
  manifest.set("", "text_config", text_config_ref);
  std::string order;
  for (const auto& r : records_) {
    if (!order.empty()) order += ",";
    order += r.name;
  }
  manifest.set("", "order", order);

  for (const auto& r : records_) {
    const std::string policy_file = r.name + ".policy";
    const std::string frames_file = r.name + ".frames";
    const std::string reps_file = r.name + ".reps";
    sac::save_policy(r.policy, r.policy_hyperparams, dir + "/" + policy_file);
    embed::save_frame_dataset(r.stacks, dir + "/" + frames_file);

    core::KvFile reps;
    reps.set("", "format_version", "1");
    if (r.cached_frame_embedding)
      reps.set("", "frame_embedding", join_doubles(*r.cached_frame_embedding));
    for (const auto& [mode, rep] : r.cached_reps)
      reps.set("", "rep_" + embed::to_string(mode), join_doubles(rep.values));
    reps.save(dir + "/" + reps_file);

    const std::string section = "task:" + r.name;
    manifest.set(section, "description", r.description);
    manifest.set(section, "policy_file", policy_file);
    manifest.set(section, "frames_file", frames_file);
    manifest.set(section, "reps_file", reps_file);
    manifest.set(section, "policy_checksum",
                 core::hash_hex(core::hash_file(dir + "/" + policy_file)));
    manifest.set(section, "frames_checksum",
                 core::hash_hex(core::hash_file(dir + "/" + frames_file)));
    manifest.set(section, "reps_checksum",
                 core::hash_hex(core::hash_file(dir + "/" + reps_file)));
  }
  manifest.save(dir + "/repository.manifest");
}

RepositoryIndex RepositoryIndex::load(const std::string& dir) {
  const std::string manifest_path = dir + "/repository.manifest";
  core::KvFile manifest = core::KvFile::load(manifest_path);
  const int version = static_cast<int>(core::parse_int(manifest.get_or("", "format_version", "1")));
  if (version != 1)
    throw VersionMismatch("repository format_version " + std::to_string(version));

  RepositoryIndex index;
  index.ae_checkpoint_ref = manifest.get_or("", "ae_checkpoint", "");
  index.text_config_ref = manifest.get_or("", "text_config", "");

  const std::string order = manifest.get_or("", "order", "");
  if (core::trim(order).empty()) return index;
  for (const auto& name : core::split(order, ',')) {
    const std::string section = "task:" + name;
    if (!manifest.has_section(section))
      throw CorruptFile("repository manifest missing section for '" + name + "'");
    auto file_of = [&](const std::string& key) {
      auto v = manifest.get(section, key);
      if (!v) throw CorruptFile("repository manifest missing " + key + " for '" + name + "'");
      return *v;
    };
    auto check_sum = [&](const std::string& file, const std::string& key) {
      const std::string expected = file_of(key);
      const std::string actual = core::hash_hex(core::hash_file(dir + "/" + file));
      if (expected != actual)
        throw CorruptFile("checksum mismatch for " + file + " in repository " + dir);
    };

    const std::string policy_file = file_of("policy_file");
    const std::string frames_file = file_of("frames_file");
    const std::string reps_file = file_of("reps_file");
    check_sum(policy_file, "policy_checksum");
    check_sum(frames_file, "frames_checksum");
    check_sum(reps_file, "reps_checksum");

    SourceTaskRecord rec;
    rec.name = name;
    rec.description = manifest.get_or(section, "description", "");
    sac::PolicyCheckpoint ckpt = sac::load_policy(dir + "/" + policy_file);
    if (!ckpt.policy.frozen())
      throw UnfrozenPolicy("repository policy '" + name + "' is not frozen on disk");
    rec.policy = std::move(ckpt.policy);
    rec.policy_hyperparams = ckpt.hyperparams;
    rec.stacks = embed::load_frame_dataset(dir + "/" + frames_file);
    if (rec.stacks.empty()) throw CorruptFile("repository task '" + name + "' has no stacks");

    core::KvFile reps = core::KvFile::load(dir + "/" + reps_file);
    if (auto fe = reps.get("", "frame_embedding"))
      rec.cached_frame_embedding = split_doubles(*fe);
    if (auto f = reps.get("", "rep_F")) {
      embed::TaskRepresentation rep;
      rep.mode = embed::RepMode::F;
      rep.values = split_doubles(*f);
      rec.cached_reps[embed::RepMode::F] = std::move(rep);
    }
    if (auto ft = reps.get("", "rep_FT")) {
      embed::TaskRepresentation rep;
      rep.mode = embed::RepMode::FT;
      rep.values = split_doubles(*ft);
      rec.cached_reps[embed::RepMode::FT] = std::move(rep);
    }
    index.records_.push_back(std::move(rec));
  }
  return index;
}

uint64_t RepositoryIndex::content_checksum() const {
  uint64_t h = core::kFnvOffset;
  h = core::fnv1a64(ae_checkpoint_ref, h);
  h = core::fnv1a64(text_config_ref, h);
  for (const auto& r : records_) {
    h = core::fnv1a64(r.name, h);
    h = core::fnv1a64(r.description, h);
    h = core::fnv1a64(r.policy.actor().net().params(), h);
    for (const auto& s : r.stacks)
      h = core::fnv1a64_bytes(s.data.data(), s.data.size() * sizeof(float), h);
  }
  return h;
}

std::vector<EpisodeSample> generate_source_dataset(const sim::DriverFn& policy,
                                                   sim::Env& env, int n_episodes,
                                                   int keep_top, core::Rng& rng,
                                                   std::vector<std::string>* warnings) {
  if (n_episodes < keep_top || keep_top < 1)
    throw ConfigError("need n_episodes >= keep_top >= 1");

  std::vector<EpisodeSample> samples;
  for (int ep = 0; ep < n_episodes; ++ep) {
    sim::Observation obs = env.reset();
    std::vector<sim::Frame> frames;
    frames.push_back(env.render_frame());
    double total = 0.0;
    while (!env.episode_done()) {
      sim::StepResult sr = env.step(policy(env, obs, rng));
      total += sr.reward;
      frames.push_back(env.render_frame());
      obs = std::move(sr.obs);
    }
    if (frames.size() < embed::FrameStack::kFrames) {
      if (warnings)
        warnings->push_back("episode " + std::to_string(ep) + " too short (" +
                            std::to_string(frames.size()) + " frames), skipped");
      continue;
    }
    EpisodeSample s;
    s.stack = embed::make_stack(frames, frames.size() - embed::FrameStack::kFrames);
    s.episode_reward = total;
    samples.push_back(std::move(s));
  }

  std::stable_sort(samples.begin(), samples.end(),
                   [](const EpisodeSample& a, const EpisodeSample& b) {
                     return a.episode_reward > b.episode_reward;
                   });
  if (static_cast<int>(samples.size()) > keep_top) samples.resize(keep_top);
  return samples;
}

sim::DriverFn driver_from_policy(const sac::PolicyHandle& policy, bool deterministic) {
  return [&policy, deterministic](const sim::Env&, const sim::Observation& obs,
                                  core::Rng& rng) {
    return sac::select_action(policy, obs, deterministic, rng);
  };
}

}  // namespace fastrl::repo
