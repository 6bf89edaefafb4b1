#include <doctest.h>

#include <filesystem>

#include "fastrl/core/textio.hpp"
#include "fastrl/errors.hpp"
#include "fastrl/repo/repository.hpp"
#include "fastrl/sim/builtin_tracks.hpp"
#include "fastrl/sim/scripted.hpp"

using namespace fastrl;
using namespace fastrl::repo;
namespace fs = std::filesystem;

namespace {

sac::PolicyHandle make_policy(const std::string& id, int obs_dim, uint64_t seed,
                              bool frozen = true) {
  core::Rng rng(seed);
  sac::ActorNet actor(obs_dim, 2, 8, rng);
  return sac::PolicyHandle(id, actor, frozen);
}

embed::FrameStack make_stack(int resolution, uint64_t seed) {
  core::Rng rng(seed);
  embed::FrameStack s;
  s.resolution = resolution;
  s.data.resize(std::size_t(embed::FrameStack::kFrames) * resolution * resolution);
  for (auto& v : s.data) v = static_cast<float>(rng.uniform());
  return s;
}

embed::AutoencoderConfig small_ae_config() {
  embed::AutoencoderConfig cfg;
  cfg.resolution = 16;
  cfg.stages = {{4, 3, 2, 1}, {8, 3, 2, 1}};
  cfg.latent_dim = 6;
  return cfg;
}

std::string fresh_dir(const std::string& name) {
  const std::string dir = (fs::temp_directory_path() / name).string();
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("repo") {

TEST_CASE("source dataset generation ranks episodes by reward") {
  sim::Track track(sim::built_in_track_spec("ring_like"));
  sim::EnvConfig cfg;
  cfg.episode.n_vehicles_min = cfg.episode.n_vehicles_max = 1;
  cfg.episode.max_duration = 6.0;
  cfg.render.resolution = 16;
  sim::Env env(track, cfg, 41);
  core::Rng rng(42);

  sim::PurePursuitParams pp;
  pp.steering_noise = 0.3;
  auto samples = generate_source_dataset(sim::pure_pursuit_driver(pp), env, 6, 3, rng);
  REQUIRE(samples.size() <= 3);
  REQUIRE(!samples.empty());
  for (std::size_t i = 1; i < samples.size(); ++i)
    CHECK(samples[i - 1].episode_reward >= samples[i].episode_reward);
  for (const auto& s : samples) CHECK(s.stack.resolution == 16);

  SUBCASE("single episode keeps exactly its own stack") {
    sim::Env env2(track, cfg, 43);
    auto one = generate_source_dataset(sim::pure_pursuit_driver(pp), env2, 1, 1, rng);
    CHECK(one.size() == 1);
  }

  CHECK_THROWS_AS(generate_source_dataset(sim::pure_pursuit_driver(pp), env, 1, 2, rng),
                  ConfigError);
}

TEST_CASE("add_source_task guards") {
  RepositoryIndex index;
  sac::SacHyperparams hp;
  index.add_source_task("oval_a", "drive the oval", make_policy("oval_a", 45, 1), hp,
                        {make_stack(16, 1)});
  CHECK(index.size() == 1);

  CHECK_THROWS_AS(index.add_source_task("oval_a", "again", make_policy("oval_a", 45, 2), hp,
                                        {make_stack(16, 2)}),
                  DuplicateName);
  CHECK_THROWS_AS(index.add_source_task("fresh", "unfrozen",
                                        make_policy("fresh", 45, 3, false), hp,
                                        {make_stack(16, 3)}),
                  UnfrozenPolicy);
  CHECK_THROWS_AS(
      index.add_source_task("nostacks", "empty", make_policy("nostacks", 45, 4), hp, {}),
      EmptyDataset);
  CHECK_THROWS_AS(index.add_source_task("bad name!", "punct",
                                        make_policy("bad", 45, 5), hp,
                                        {make_stack(16, 5)}),
                  ConfigError);
}

TEST_CASE("representation precomputation is deterministic and mode-aware") {
  RepositoryIndex index;
  sac::SacHyperparams hp;
  index.add_source_task("a", "first task on a ring road", make_policy("a", 45, 6), hp,
                        {make_stack(16, 6)});
  index.add_source_task("b", "second task on a long straight", make_policy("b", 45, 7), hp,
                        {make_stack(16, 7)});

  embed::Autoencoder ae(small_ae_config());
  ae.init_weights(8);
  embed::TextEncoderConfig text_cfg;
  text_cfg.d_text = 10;

  CHECK_FALSE(index.representations_ready(embed::RepMode::F));
  index.precompute_representations(ae, text_cfg, nullptr, embed::RepMode::F);
  index.precompute_representations(ae, text_cfg, nullptr, embed::RepMode::FT);
  CHECK(index.representations_ready(embed::RepMode::F));
  CHECK(index.representations_ready(embed::RepMode::FT));

  const auto& rec = index.records()[0];
  CHECK(rec.cached_reps.at(embed::RepMode::F).values.size() == 6);
  CHECK(rec.cached_reps.at(embed::RepMode::FT).values.size() == 16);

  RepositoryIndex again;
  again.add_source_task("a", "first task on a ring road", make_policy("a", 45, 6), hp,
                        {make_stack(16, 6)});
  again.add_source_task("b", "second task on a long straight", make_policy("b", 45, 7), hp,
                        {make_stack(16, 7)});
  again.precompute_representations(ae, text_cfg, nullptr, embed::RepMode::F);
  CHECK(again.records()[0].cached_reps.at(embed::RepMode::F).values ==
        rec.cached_reps.at(embed::RepMode::F).values);

  // caches always equal a fresh recomputation from the raw fields
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto& r = index.records()[i];
    const auto fresh_emb = ae.encode(r.stacks.front());
    CHECK(*r.cached_frame_embedding == fresh_emb);
    CHECK(r.cached_reps.at(embed::RepMode::F) ==
          embed::build_representation(fresh_emb, nullptr, embed::RepMode::F));
    const auto text_emb = embed::embed_text(text_cfg, r.description);
    CHECK(r.cached_reps.at(embed::RepMode::FT) ==
          embed::build_representation(fresh_emb, &text_emb, embed::RepMode::FT));
  }
}

TEST_CASE("repository save/load round-trips exactly") {
  core::Rng rng(100);
  for (int trial = 0; trial < 3; ++trial) {
    RepositoryIndex index;
    sac::SacHyperparams hp;
    const int n_tasks = 1 + static_cast<int>(rng.uniform_int(0, 2));
    for (int t = 0; t < n_tasks; ++t) {
      const std::string name = "task_" + std::to_string(trial) + "_" + std::to_string(t);
      std::vector<embed::FrameStack> stacks;
      const int n_stacks = 1 + static_cast<int>(rng.uniform_int(0, 2));
      for (int s = 0; s < n_stacks; ++s) stacks.push_back(make_stack(16, rng.next_u64()));
      index.add_source_task(name, "description " + std::to_string(t),
                            make_policy(name, 45, rng.next_u64()), hp, std::move(stacks));
    }
    embed::Autoencoder ae(small_ae_config());
    ae.init_weights(rng.next_u64());
    embed::TextEncoderConfig text_cfg;
    index.precompute_representations(ae, text_cfg, nullptr, embed::RepMode::F);
    index.ae_checkpoint_ref = "ae.ckpt";
    index.text_config_ref = "hashed d_text=128";

    const std::string dir = fresh_dir("fastrl_repo_rt");
    index.save(dir);
    RepositoryIndex loaded = RepositoryIndex::load(dir);

    REQUIRE(loaded.size() == index.size());
    CHECK(loaded.ae_checkpoint_ref == index.ae_checkpoint_ref);
    CHECK(loaded.text_config_ref == index.text_config_ref);
    for (std::size_t i = 0; i < index.size(); ++i) {
      const auto& a = index.records()[i];
      const auto& b = loaded.records()[i];
      CHECK(a.name == b.name);
      CHECK(a.description == b.description);
      CHECK(b.policy.frozen());
      CHECK(a.policy.param_hash() == b.policy.param_hash());
      REQUIRE(a.stacks.size() == b.stacks.size());
      for (std::size_t s = 0; s < a.stacks.size(); ++s) CHECK(a.stacks[s] == b.stacks[s]);
      CHECK(a.cached_frame_embedding == b.cached_frame_embedding);
      CHECK(a.cached_reps.at(embed::RepMode::F).values ==
            b.cached_reps.at(embed::RepMode::F).values);
    }
    CHECK(loaded.content_checksum() == index.content_checksum());
  }
}

TEST_CASE("repository corruption and version errors") {
  RepositoryIndex index;
  sac::SacHyperparams hp;
  index.add_source_task("solo", "one task", make_policy("solo", 45, 11), hp,
                        {make_stack(16, 11)});
  const std::string dir = fresh_dir("fastrl_repo_err");
  index.save(dir);

  SUBCASE("clean load works and keeps policies frozen") {
    RepositoryIndex loaded = RepositoryIndex::load(dir);
    auto rec = loaded.records()[0];
    CHECK_THROWS_AS(rec.policy.mutable_actor(), FrozenPolicy);
  }

  SUBCASE("truncated policy file fails the checksum") {
    const std::string f = dir + "/solo.policy";
    std::string data = core::read_file(f);
    core::write_file(f, data.substr(0, data.size() - 5));
    CHECK_THROWS_AS(RepositoryIndex::load(dir), CorruptFile);
  }

  SUBCASE("future manifest version is refused") {
    const std::string f = dir + "/repository.manifest";
    core::KvFile kv = core::KvFile::load(f);
    kv.set("", "format_version", "9");
    kv.save(f);
    CHECK_THROWS_AS(RepositoryIndex::load(dir), VersionMismatch);
  }
}

}  // TEST_SUITE
