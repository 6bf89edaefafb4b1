#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fastrl/core/rng.hpp"
#include "fastrl/sim/track.hpp"

namespace fastrl::sim {

struct EpisodeConfig {
  double max_duration = 150.0;  // seconds
  double dt = 0.1;
  int n_vehicles_min = 1;  // total vehicle count including the ego,
  int n_vehicles_max = 5;  // sampled per episode from [min, max]
  double reward_a = 1.0;
  double reward_b = 1.0;
  bool randomize_spawn = true;
};

struct VehicleParams {
  double v_min = 0.0;
  double v_max = 30.0;
  double accel_gain = 4.0;      // m/s^2 at full throttle
  double steering_gain = 0.08;  // path curvature (1/m) at full lock
  double collision_radius = 2.0;
  double spawn_speed_frac = 0.25;   // initial speed as fraction of the range
  double traffic_speed_lo = 0.25;   // traffic speed band, fraction of v_max
  double traffic_speed_hi = 0.55;
  double min_spawn_gap = 14.0;      // meters of arc between spawned vehicles
};

// Fixed standardization ranges; every observation feature is divided by one
// of these and clamped to [-1, 1].
struct ObservationRanges {
  double position = 300.0;  // ego x, y (expanded to cover the track at build)
  double rel_position = 100.0;
  double velocity = 30.0;
};

struct RenderConfig {
  int resolution = 64;
  double camera_extent = 120.0;  // square view side, meters, centered on ego
  float background = 0.05f;
  float road = 0.45f;
  float edge = 0.70f;
  float traffic = 0.80f;
  float ego = 1.00f;
  double edge_line_width = 0.8;
  double marker_radius = 1.8;
};

struct EnvConfig {
  EpisodeConfig episode;
  VehicleParams vehicle;
  ObservationRanges ranges;
  RenderConfig render;
  int observation_rows = 5;  // 1 for the ego-only task
};

struct Action {
  double steering = 0.0;      // [-1, 1]
  double acceleration = 0.0;  // [-1, 1]
};

// Row-major rows x 9 feature matrix: presence, x, y, vx, vy, heading,
// long_off, lat_off, ang_off.
struct Observation {
  int rows = 0;
  static constexpr int kCols = 9;
  std::vector<double> data;

  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * kCols + c]; }
  std::size_t size() const { return data.size(); }
};

struct Frame {
  int resolution = 0;
  std::vector<float> pixels;  // row-major, values in [0, 1]
};

struct VehicleState {
  double x = 0.0, y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
  double arc_length_progress = 0.0;
  double lateral = 0.0;
  int lap_count = 0;
  bool alive = true;
};

struct StepInfo {
  double distance_delta = 0.0;
  bool lap_completed = false;
  bool crashed = false;
  bool off_track = false;
  bool progressing = false;
  bool route_end = false;  // open roads only: reached the end of the scene
  double elapsed = 0.0;
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// r = a * (v - v_min)/(v_max - v_min), negated when not progressing, plus
// b * collision with collision in {0, -1}. Keeping the sign flip off the
// collision term bounds the reward to [-(a+b), a] for every coefficient
// choice; a crash can never pay out.
double compute_reward(double v, double v_min, double v_max, int collision,
                      double a, double b, bool progressing);

struct ProgressUpdate {
  double distance_delta = 0.0;
  bool lap_completed = false;
  bool progressing = false;
};

// Signed wrap-aware arc-length change between two centerline projections.
ProgressUpdate progress_update(double prev_s, double new_s, const Track& track);

// Standalone top-down rasterizer; Env::render_frame delegates here.
Frame render_view(const Track& track, const std::vector<VehicleState>& traffic,
                  const VehicleState* ego, double center_x, double center_y,
                  const RenderConfig& cfg);

// Single-episode-at-a-time simulator. One instance per thread; independent
// instances may run in parallel, each owning its RNG stream.
class Env {
 public:
  Env(Track track, EnvConfig config, uint64_t seed);

  // Starts a new episode using the internal seed stream.
  Observation reset();
  // Starts a new episode from an explicit seed (evaluation).
  Observation reset_seeded(uint64_t seed);

  StepResult step(const Action& action);
  Observation observe() const;
  Frame render_frame() const;

  bool episode_done() const { return done_; }
  int64_t elapsed_steps() const { return elapsed_steps_; }
  double elapsed_seconds() const { return static_cast<double>(elapsed_steps_) * cfg_.episode.dt; }
  const Track& track() const { return track_; }
  const EnvConfig& config() const { return cfg_; }
  const VehicleState& ego() const { return ego_; }
  const std::vector<VehicleState>& traffic() const { return traffic_; }
  int observation_dim() const { return cfg_.observation_rows * Observation::kCols; }
  int64_t max_steps() const { return max_steps_; }

 private:
  void place_vehicles(core::Rng& rng);

  Track track_;
  EnvConfig cfg_;
  core::Rng reset_rng_;
  VehicleState ego_;
  std::vector<VehicleState> traffic_;
  std::vector<double> traffic_speed_;
  bool done_ = true;
  int64_t elapsed_steps_ = 0;
  int64_t max_steps_ = 0;
  int lap_wraps_ = 0;
};

}  // namespace fastrl::sim
