#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "fastrl/core/hash.hpp"
#include "fastrl/core/textio.hpp"
#include "fastrl/embed/autoencoder.hpp"
#include "fastrl/embed/frame_stack.hpp"
#include "fastrl/embed/representation.hpp"
#include "fastrl/embed/text_encoder.hpp"
#include "fastrl/errors.hpp"
#include "support/finite_diff.hpp"

using namespace fastrl;
using namespace fastrl::embed;

namespace {

AutoencoderConfig toy_ae_config() {
  AutoencoderConfig cfg;
  cfg.resolution = 8;
  cfg.in_channels = 4;
  cfg.stages = {{6, 3, 2, 1}, {8, 3, 2, 1}};
  cfg.latent_dim = 5;
  return cfg;
}

FrameStack random_stack(int resolution, core::Rng& rng) {
  FrameStack s;
  s.resolution = resolution;
  s.data.resize(std::size_t(FrameStack::kFrames) * resolution * resolution);
  for (auto& v : s.data) v = static_cast<float>(rng.uniform());
  return s;
}

FrameStack constant_stack(int resolution, float value) {
  FrameStack s;
  s.resolution = resolution;
  s.data.assign(std::size_t(FrameStack::kFrames) * resolution * resolution, value);
  return s;
}

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE("embed") {

TEST_CASE("min-max scaling") {
  CHECK(min_max_scale({2, 4, 6}) == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(min_max_scale({3, 3, 3}) == std::vector<double>{0.5, 0.5, 0.5});

  core::Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(16);
    for (auto& x : v) x = rng.uniform(-100, 100);
    auto scaled = min_max_scale(v);
    for (double x : scaled) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
    // idempotent when the vector already spans [0, 1]
    auto again = min_max_scale(scaled);
    for (std::size_t i = 0; i < scaled.size(); ++i)
      CHECK(again[i] == doctest::Approx(scaled[i]).epsilon(1e-12));
  }
}

TEST_CASE("cosine similarity") {
  std::vector<double> u{1, 2, 3}, v{4, 5, 6};
  CHECK(cosine_similarity(u, u) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine_similarity({1, 0}, {0, 1}) == doctest::Approx(0.0));
  CHECK(cosine_similarity(u, v) == doctest::Approx(0.974631).epsilon(1e-5));
  CHECK_THROWS_AS(cosine_similarity({0, 0}, {1, 1}), ZeroVector);
  CHECK_THROWS_AS(cosine_similarity({1, 2}, {1, 2, 3}), ShapeMismatch);

  core::Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 2 + static_cast<std::size_t>(rng.uniform_int(0, 30));
    std::vector<double> a(dim), b(dim);
    for (auto& x : a) x = rng.uniform(-1, 1);
    for (auto& x : b) x = rng.uniform(-1, 1);
    const double ab = cosine_similarity(a, b);
    CHECK(std::abs(ab) <= 1.0 + 1e-12);
    CHECK(ab == doctest::Approx(cosine_similarity(b, a)).epsilon(1e-12));
    const double c = rng.uniform(0.1, 10.0);
    std::vector<double> ca = a;
    for (auto& x : ca) x *= c;
    CHECK(cosine_similarity(ca, b) == doctest::Approx(ab).epsilon(1e-9));
  }
}

TEST_CASE("representation construction") {
  std::vector<double> frame_emb{1.0, 3.0};
  std::vector<double> text_emb{0.0, 2.0};
  TaskRepresentation f = build_representation(frame_emb, nullptr, RepMode::F);
  CHECK(f.values == std::vector<double>{0.0, 1.0});

  TaskRepresentation ft = build_representation(frame_emb, &text_emb, RepMode::FT);
  REQUIRE(ft.values.size() == 4);
  // scaled over the concatenation [1,3,0,2]
  CHECK(ft.values == std::vector<double>{1.0 / 3.0, 1.0, 0.0, 2.0 / 3.0});

  CHECK_THROWS_AS(build_representation(frame_emb, nullptr, RepMode::FT), ModeMismatch);
  CHECK_THROWS_AS(cosine_similarity(f, ft), ModeMismatch);
}

TEST_CASE("text encoder") {
  TextEncoderConfig cfg;
  const std::string highway =
      "The ego-vehicle is driving on a multilane highway populated with other vehicles.";
  const std::string lane =
      "The ego-veichle is driving on a single lane road which is not straight.";

  CHECK(embed_text(cfg, highway) == embed_text(cfg, highway));
  CHECK(cosine_similarity(embed_text(cfg, highway), embed_text(cfg, lane)) < 1.0);

  // same description, same vector, cosine exactly 1
  const std::string racetrack = "The agent follows the track while avoiding collisions.";
  CHECK(cosine_similarity(embed_text(cfg, racetrack), embed_text(cfg, racetrack)) ==
        doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(embed_text(cfg, ""), EmptyDescription);
  CHECK_THROWS_AS(embed_text(cfg, "!!! ***"), EmptyDescription);

  // normalization invariance: case and whitespace do not matter
  core::Rng rng(3);
  const char* words[] = {"drive", "fast", "lane", "turn", "avoid", "car"};
  for (int trial = 0; trial < 50; ++trial) {
    std::string plain, noisy;
    const int n = 1 + static_cast<int>(rng.uniform_int(0, 5));
    for (int i = 0; i < n; ++i) {
      std::string w = words[rng.uniform_int(0, 5)];
      plain += w + " ";
      for (auto& ch : w)
        if (rng.uniform() < 0.5) ch = static_cast<char>(std::toupper(ch));
      noisy += "  " + w + (rng.uniform() < 0.5 ? "\t" : "  ");
    }
    CHECK(embed_text(cfg, plain) == embed_text(cfg, noisy));
  }

  // single-token descriptions still embed (boundary bigrams)
  auto v = embed_text(cfg, "roundabout");
  double norm = 0;
  for (double x : v) norm += x * x;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("text embedding override table round-trip") {
  TextEmbeddingTable table;
  table.set("oval", {0.25, -1.5, 3.0});
  table.set("mixed", {1.0, 0.0, 0.125});
  const std::string path = tmp_path("fastrl_text_table.kv");
  table.save(path);
  TextEmbeddingTable loaded = TextEmbeddingTable::load(path);
  CHECK(*loaded.lookup("oval") == std::vector<double>{0.25, -1.5, 3.0});
  CHECK(*loaded.lookup("mixed") == std::vector<double>{1.0, 0.0, 0.125});
  CHECK_FALSE(loaded.lookup("missing").has_value());
}

TEST_CASE("frame stack sampling") {
  core::Rng rng(4);
  std::vector<sim::Frame> frames;
  for (int i = 0; i < 10; ++i) {
    sim::Frame f;
    f.resolution = 4;
    f.pixels.assign(16, static_cast<float>(i));
    frames.push_back(f);
  }

  std::vector<sim::Frame> four(frames.begin(), frames.begin() + 4);
  FrameStack only = sample_frame_stack(four, rng);
  CHECK(only.data.front() == 0.0f);
  CHECK(only.data.back() == 3.0f);

  core::Rng r1(7), r2(7);
  CHECK(sample_frame_stack(frames, r1) == sample_frame_stack(frames, r2));

  std::vector<sim::Frame> three(frames.begin(), frames.begin() + 3);
  CHECK_THROWS_AS(sample_frame_stack(three, rng), TooFewFrames);
}

TEST_CASE("frame dataset io") {
  core::Rng rng(5);
  std::vector<FrameStack> stacks;
  for (int i = 0; i < 6; ++i) stacks.push_back(random_stack(8, rng));
  const std::string path = tmp_path("fastrl_frames.bin");
  save_frame_dataset(stacks, path);
  auto loaded = load_frame_dataset(path);
  REQUIRE(loaded.size() == stacks.size());
  for (std::size_t i = 0; i < stacks.size(); ++i) CHECK(loaded[i] == stacks[i]);

  // truncation is detected
  std::string data = core::read_file(path);
  core::write_file(path, data.substr(0, data.size() / 2));
  CHECK_THROWS_AS(load_frame_dataset(path), CorruptFile);
}

TEST_CASE("autoencoder forward contracts") {
  Autoencoder ae(toy_ae_config());

  SUBCASE("zero weights give a zero latent and constant reconstruction") {
    core::Rng rng(6);
    FrameStack stack = random_stack(8, rng);
    auto latent = ae.encode(stack);
    REQUIRE(latent.size() == 5);
    for (double v : latent) CHECK(v == 0.0);

    auto recon = ae.decode(std::vector<double>(5, 0.0));
    REQUIRE(recon.size() == stack.data.size());
    for (double v : recon) CHECK(v == 0.0);
  }

  SUBCASE("deterministic and shape-checked") {
    ae.init_weights(99);
    core::Rng rng(7);
    FrameStack stack = random_stack(8, rng);
    auto a = ae.encode(stack);
    auto b = ae.encode(stack);
    CHECK(a == b);

    FrameStack wrong = random_stack(16, rng);
    CHECK_THROWS_AS(ae.encode(wrong), ShapeMismatch);
    CHECK_THROWS_AS(ae.decode({1.0, 2.0}), ShapeMismatch);
  }

  SUBCASE("default architecture emits a 128-long embedding") {
    AutoencoderConfig dflt;
    CHECK(dflt.latent_dim == 128);
    CHECK(dflt.stages.size() == 3);
    CHECK(dflt.stages[0].channels == 64);
    CHECK(dflt.stages[1].channels == 128);
    CHECK(dflt.stages[2].channels == 128);
    CHECK(dflt.stages[0].kernel == 5);
    CHECK(dflt.stages[0].stride == 3);
    CHECK(dflt.stages[0].pad == 1);
    Autoencoder full(dflt);
    full.init_weights(1);
    core::Rng rng(8);
    FrameStack stack = random_stack(64, rng);
    CHECK(full.encode(stack).size() == 128);
    CHECK(full.decode(std::vector<double>(128, 0.1)).size() == stack.data.size());
  }
}

TEST_CASE("autoencoder gradient check on toy instance") {
  Autoencoder ae(toy_ae_config());
  ae.init_weights(42);
  core::Rng rng(9);
  const int n = 3;
  std::vector<double> x(std::size_t(n) * ae.input_pixels());
  for (auto& v : x) v = rng.uniform(0.0, 1.0);

  auto loss = [&] {
    Autoencoder::Cache cache;
    ae.forward(x.data(), n, cache);
    return core::mse_loss(cache.recon.data(), x.data(), x.size());
  };

  Autoencoder::Cache cache;
  ae.forward(x.data(), n, cache);
  std::vector<double> drecon(x.size());
  core::mse_grad(cache.recon.data(), x.data(), drecon.data(), x.size());
  std::vector<double> grads;
  ae.backward(x.data(), n, cache, drecon.data(), grads);

  // every parameter group, several entries each
  for (const auto& group : ae.param_groups()) {
    for (int k = 0; k < 6; ++k) {
      const std::size_t i =
          group.offset + static_cast<std::size_t>(rng.uniform_int(
                             0, static_cast<int64_t>(group.count) - 1));
      const double fd = testing::central_diff(ae.params(), i, loss);
      CAPTURE(group.name);
      CHECK(testing::rel_err(grads[i], fd) < 1e-3);
    }
  }
}

TEST_CASE("autoencoder training on a trivial dataset") {
  Autoencoder ae(toy_ae_config());
  ae.init_weights(7);
  std::vector<FrameStack> dataset;
  for (int i = 0; i < 12; ++i) dataset.push_back(constant_stack(8, 0.3f));

  AeTrainConfig cfg;
  cfg.learning_rate = 3e-3;
  cfg.batch_size = 4;
  cfg.max_epochs = 120;
  cfg.patience = 15;
  cfg.divergence_threshold = 1e-9;
  AeTrainResult res = train_autoencoder(ae, dataset, cfg, 11);
  CHECK(res.best_val_mse < 1e-3);
  // converged reconstruction of a training example is no worse than validation
  CHECK(ae.reconstruction_mse(dataset.front()) <= res.best_val_mse * 1.5 + 1e-9);

  // best-so-far validation error never increases
  double best = std::numeric_limits<double>::infinity();
  for (const auto& epoch : res.curves) {
    const double next = std::min(best, epoch.val_mse);
    CHECK(next <= best);
    best = next;
  }

  CHECK_THROWS_AS(
      train_autoencoder(ae, std::vector<FrameStack>(4, constant_stack(8, 0.1f)), cfg, 1),
      EmptyDataset);

  // a poisoned parameter surfaces as DivergedTraining
  Autoencoder sick(toy_ae_config());
  sick.init_weights(8);
  sick.params()[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(train_autoencoder(sick, dataset, cfg, 2), DivergedTraining);
}

TEST_CASE("autoencoder checkpoint io") {
  Autoencoder ae(toy_ae_config());
  ae.init_weights(55);
  const std::string path = tmp_path("fastrl_ae.ckpt");
  ae.save(path);

  Autoencoder loaded = Autoencoder::load(path);
  CHECK(loaded.config() == ae.config());
  CHECK(loaded.params() == ae.params());

  // corrupting any byte breaks the checksum
  std::string data = core::read_file(path);
  data[data.size() / 2] = static_cast<char>(data[data.size() / 2] ^ 0x40);
  core::write_file(path, data);
  CHECK_THROWS_AS(Autoencoder::load(path), CorruptFile);

  // future versions are refused
  std::string fresh;
  ae.save(path);
  fresh = core::read_file(path);
  uint32_t v99 = 99;
  std::memcpy(fresh.data() + 8, &v99, 4);
  const uint64_t sum = core::fnv1a64_bytes(fresh.data(), fresh.size() - 8);
  std::memcpy(fresh.data() + fresh.size() - 8, &sum, 8);
  core::write_file(path, fresh);
  CHECK_THROWS_AS(Autoencoder::load(path), VersionMismatch);
}

}  // TEST_SUITE
