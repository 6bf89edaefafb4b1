#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "fastrl/core/textio.hpp"
#include "fastrl/errors.hpp"
#include "fastrl/eval/evaluate.hpp"
#include "fastrl/eval/export.hpp"
#include "fastrl/sim/builtin_tracks.hpp"
#include "fastrl/sim/scripted.hpp"

using namespace fastrl;
using namespace fastrl::eval;

namespace {

sim::TrackSpec circle_spec() {
  sim::TrackSpec t;
  t.name = "circle50";
  t.lane_width = 10.0;
  t.segments = {sim::Segment::arc(50.0, 2.0 * M_PI, +1)};
  return t;
}

sim::EnvConfig circle_env(double max_duration) {
  sim::EnvConfig cfg;
  cfg.observation_rows = 1;
  cfg.episode.n_vehicles_min = cfg.episode.n_vehicles_max = 1;
  cfg.episode.max_duration = max_duration;
  cfg.vehicle.spawn_speed_frac = 10.0 / 30.0;  // start exactly at 10 m/s
  cfg.render.resolution = 16;
  return cfg;
}

std::string tmp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("constant-speed circle follower matches closed-form metrics") {
  sim::Track track{circle_spec()};
  sim::EnvConfig cfg = circle_env(30.0);
  sim::PurePursuitParams pp;
  pp.target_speed = 10.0;

  EvalReport report = evaluate_actor(sim::pure_pursuit_driver(pp), track, cfg, 4, {11, 12});
  const double expect_distance = 10.0 * 30.0;
  CHECK(report.distance.mean ==
        doctest::Approx(expect_distance).epsilon(0.02));
  CHECK(report.laps.mean ==
        doctest::Approx(expect_distance / track.total_length()).epsilon(0.02));
  CHECK(report.mean_speed.mean == doctest::Approx(10.0).epsilon(0.02));
  for (const auto& ep : report.episodes) CHECK(ep.duration == doctest::Approx(30.0));
}

TEST_CASE("stationary policy produces zero metrics") {
  sim::Track track{circle_spec()};
  sim::EnvConfig cfg = circle_env(5.0);
  cfg.vehicle.spawn_speed_frac = 0.0;
  sim::DriverFn idle = [](const sim::Env&, const sim::Observation&, core::Rng&) {
    return sim::Action{0.0, -1.0};
  };
  EvalReport report = evaluate_actor(idle, track, cfg, 2, {3});
  CHECK(report.distance.mean == 0.0);
  CHECK(report.laps.mean == 0.0);
  CHECK(report.mean_speed.mean == 0.0);
}

TEST_CASE("single episode has zero standard deviation") {
  sim::Track track{circle_spec()};
  EvalReport report = evaluate_actor(sim::random_driver(), track, circle_env(3.0), 1, {5});
  CHECK(report.distance.stddev == 0.0);
  CHECK(report.reward.stddev == 0.0);
  CHECK(report.laps.stddev == 0.0);
  CHECK(report.mean_speed.stddev == 0.0);
}

TEST_CASE("aggregation is exact and order-independent") {
  std::vector<double> values{1.0, 2.5, -3.0, 7.25, 0.125};
  Stat s = aggregate(values);
  double mean = 0;
  for (double v : values) mean += v;
  mean /= values.size();
  CHECK(s.mean == mean);
  double sq = 0;
  for (double v : values) sq += (v - mean) * (v - mean);
  CHECK(s.stddev == std::sqrt(sq / values.size()));  // population form

  core::Rng rng(6);
  std::vector<double> shuffled = values;
  for (int t = 0; t < 10; ++t) {
    for (std::size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled[i - 1], shuffled[rng.uniform_int(0, int64_t(i) - 1)]);
    Stat p = aggregate(shuffled);
    CHECK(p.mean == doctest::Approx(s.mean).epsilon(1e-12));
    CHECK(p.stddev == doctest::Approx(s.stddev).epsilon(1e-12));
  }
}

TEST_CASE("mean speed times duration matches gross distance for a follower") {
  sim::Track track{circle_spec()};
  sim::EnvConfig cfg = circle_env(20.0);
  sim::PurePursuitParams pp;
  pp.target_speed = 12.0;
  EvalReport report = evaluate_actor(sim::pure_pursuit_driver(pp), track, cfg, 2, {21});
  for (const auto& ep : report.episodes) {
    CHECK(ep.mean_speed * ep.duration == doctest::Approx(ep.distance).epsilon(0.02));
  }
}

TEST_CASE("one-shot evaluation covers sources and a random policy, untouched") {
  sim::Track track{circle_spec()};
  sim::EnvConfig cfg = circle_env(4.0);

  repo::RepositoryIndex index;
  sac::SacHyperparams hp;
  core::Rng rng(30);
  sac::ActorNet actor(9, 2, 8, rng);
  sac::PolicyHandle frozen("src0", actor, true);
  embed::FrameStack stack;
  stack.resolution = 16;
  stack.data.assign(4 * 16 * 16, 0.5f);
  index.add_source_task("src0", "a source", frozen, hp, {stack});
  const uint64_t hash_before = index.records()[0].policy.param_hash();

  auto reports = one_shot_eval(index, track, cfg, 3, {7});
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].first == "src0");
  CHECK(reports[1].first == "random");
  for (const auto& [name, rep] : reports) {
    CHECK(std::isfinite(rep.reward.mean));
    CHECK(std::isfinite(rep.distance.mean));
  }
  CHECK(index.records()[0].policy.param_hash() == hash_before);
}

TEST_CASE("curve export and parse round-trip") {
  sac::LearningCurve curve;
  core::Rng rng(9);
  for (int i = 0; i < 40; ++i)
    curve.push_back({(i + 1) * 37, rng.uniform(-5.0, 20.0)});

  const std::string path = tmp("fastrl_curve.csv");
  export_curves(curve, path, 10);
  auto rows = parse_curve_csv(path);
  auto expected = smooth_curve(curve, 10);
  REQUIRE(rows.size() == expected.size());
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i] == expected[i]);

  // re-export of the parse must be byte-identical
  sac::LearningCurve reparsed;
  for (const auto& r : rows) reparsed.push_back({r.timestep, r.episodic_reward});
  const std::string path2 = tmp("fastrl_curve2.csv");
  export_curves(reparsed, path2, 10);
  CHECK(core::read_file(path) == core::read_file(path2));

  SUBCASE("empty curve gives a header-only file") {
    const std::string p = tmp("fastrl_curve_empty.csv");
    export_curves({}, p, 10);
    CHECK(parse_curve_csv(p).empty());
  }

  SUBCASE("constant rewards smooth to the same constant") {
    sac::LearningCurve flat;
    for (int i = 0; i < 200; ++i) flat.push_back({i + 1, 3.25});
    auto sm = smooth_curve(flat, 100);
    for (const auto& r : sm) CHECK(r.smoothed_reward == 3.25);
  }
}

TEST_CASE("report export and parse round-trip") {
  std::vector<ReportRow> rows;
  ReportRow a;
  a.name = "baseline";
  a.distance = {581.0, 916.0};
  a.reward = {55.25, 89.59};
  a.laps = {1.89, 2.98};
  a.mean_speed = {36.46, 3.47};
  a.n_episodes = 50;
  rows.push_back(a);
  ReportRow b = a;
  b.name = "transfer";
  b.laps = {3.71, 6.54};
  rows.push_back(b);

  const std::string path = tmp("fastrl_report.csv");
  export_report_csv(rows, path);
  auto parsed = parse_report_csv(path);
  REQUIRE(parsed.size() == rows.size());
  CHECK(parsed[0] == rows[0]);
  CHECK(parsed[1] == rows[1]);

  // fractional lap counts survive the round trip
  CHECK(parsed[0].laps.mean == 1.89);
}

TEST_CASE("usage csv renders percentages") {
  transfer::UsageLog log;
  log.source_names = {"alpha", "beta"};
  for (int i = 0; i < 25; ++i) log.acting.push_back(0);
  for (int i = 0; i < 75; ++i) log.acting.push_back(transfer::kTargetPolicy);
  const std::string path = tmp("fastrl_usage.csv");
  export_usage_csv(log, path);
  const std::string text = core::read_file(path);
  CHECK(text.find("alpha,25") != std::string::npos);
  CHECK(text.find("beta") == std::string::npos);
}

TEST_CASE("learning-curve chart writes a valid pgm") {
  sac::LearningCurve curve;
  for (int i = 0; i < 50; ++i) curve.push_back({i * 10, std::sin(i * 0.3)});
  const std::string path = tmp("fastrl_curve.pgm");
  export_curve_pgm(curve, path, 120, 60);
  const std::string data = core::read_file(path);
  CHECK(data.rfind("P5\n120 60\n255\n", 0) == 0);
  CHECK(data.size() > 120u * 60u);
}

}  // TEST_SUITE
