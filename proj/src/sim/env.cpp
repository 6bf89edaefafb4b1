#include "fastrl/sim/env.hpp"

#include <algorithm>
#include <cmath>

#include "fastrl/errors.hpp"

namespace fastrl::sim {

namespace {

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace

double compute_reward(double v, double v_min, double v_max, int collision,
                      double a, double b, bool progressing) {
  if (v_max == v_min) throw DegenerateSpeedRange("v_max equals v_min");
  double speed_term = a * (v - v_min) / (v_max - v_min);
  if (!progressing) speed_term = -speed_term;
  return speed_term + b * static_cast<double>(collision);
}

ProgressUpdate progress_update(double prev_s, double new_s, const Track& track) {
  ProgressUpdate out;
  const double raw = new_s - prev_s;
  out.distance_delta = track.wrap_delta(new_s, prev_s);
  out.lap_completed = !track.open() && raw < -0.5 * track.total_length();
  out.progressing = out.distance_delta > 0.0;
  return out;
}

Frame render_view(const Track& track, const std::vector<VehicleState>& traffic,
                  const VehicleState* ego, double center_x, double center_y,
                  const RenderConfig& cfg) {
  Frame frame;
  frame.resolution = cfg.resolution;
  frame.pixels.assign(static_cast<std::size_t>(cfg.resolution) * cfg.resolution,
                      cfg.background);
  const double scale = cfg.camera_extent / cfg.resolution;
  const double halfw = track.half_width();
  const double marker2 = cfg.marker_radius * cfg.marker_radius;
  for (int row = 0; row < cfg.resolution; ++row) {
    const double y = center_y + (cfg.resolution * 0.5 - row - 0.5) * scale;
    for (int col = 0; col < cfg.resolution; ++col) {
      const double x = center_x + (col + 0.5 - cfg.resolution * 0.5) * scale;
      float v = cfg.background;
      const double d = track.distance_to(x, y);
      if (d <= halfw) {
        v = (d >= halfw - cfg.edge_line_width) ? cfg.edge : cfg.road;
      }
      for (const auto& t : traffic) {
        const double dx = x - t.x, dy = y - t.y;
        if (dx * dx + dy * dy <= marker2) v = cfg.traffic;
      }
      if (ego) {
        const double dx = x - ego->x, dy = y - ego->y;
        if (dx * dx + dy * dy <= marker2) v = cfg.ego;
      }
      frame.pixels[static_cast<std::size_t>(row) * cfg.resolution + col] = v;
    }
  }
  return frame;
}

Env::Env(Track track, EnvConfig config, uint64_t seed)
    : track_(std::move(track)), cfg_(config), reset_rng_(seed) {
  if (cfg_.episode.n_vehicles_min < 1 || cfg_.episode.n_vehicles_max > 5 ||
      cfg_.episode.n_vehicles_min > cfg_.episode.n_vehicles_max)
    throw ConfigError("n_vehicles must satisfy 1 <= min <= max <= 5");
  if (cfg_.episode.max_duration <= 0 || cfg_.episode.dt <= 0)
    throw ConfigError("max_duration and dt must be positive");
  if (cfg_.vehicle.v_max <= cfg_.vehicle.v_min)
    throw ConfigError("v_max must exceed v_min");
  if (cfg_.observation_rows != 1 && cfg_.observation_rows != 5)
    throw ConfigError("observation_rows must be 1 or 5");
  // widen the ego position range to cover the whole layout
  const auto& b = track_.bounds();
  const double extent = std::max({std::abs(b.min_x), std::abs(b.max_x),
                                  std::abs(b.min_y), std::abs(b.max_y)}) +
                        track_.lane_width();
  cfg_.ranges.position = std::max(cfg_.ranges.position, extent);
  max_steps_ = std::llround(cfg_.episode.max_duration / cfg_.episode.dt);
}

Observation Env::reset() { return reset_seeded(reset_rng_.next_u64()); }

Observation Env::reset_seeded(uint64_t seed) {
  core::Rng rng(seed);
  place_vehicles(rng);
  done_ = false;
  elapsed_steps_ = 0;
  lap_wraps_ = 0;
  return observe();
}

void Env::place_vehicles(core::Rng& rng) {
  const double L = track_.total_length();
  const int n_total = static_cast<int>(
      rng.uniform_int(cfg_.episode.n_vehicles_min, cfg_.episode.n_vehicles_max));

  auto spawn_at = [&](double s) {
    VehicleState v;
    Pose p = track_.pose_at(s);
    v.x = p.x;
    v.y = p.y;
    v.heading = p.heading;
    v.arc_length_progress = track_.wrap_s(s);
    v.lateral = 0.0;
    return v;
  };

  std::vector<double> taken_s;
  auto far_enough = [&](double s) {
    for (double other : taken_s)
      if (std::abs(track_.wrap_delta(s, other)) < cfg_.vehicle.min_spawn_gap) return false;
    return true;
  };

  const double ego_s = cfg_.episode.randomize_spawn
                           ? rng.uniform(0.0, track_.open() ? L * 0.5 : L)
                           : L * 0.05;
  ego_ = spawn_at(ego_s);
  ego_.speed = cfg_.vehicle.v_min +
               cfg_.vehicle.spawn_speed_frac * (cfg_.vehicle.v_max - cfg_.vehicle.v_min);
  taken_s.push_back(ego_.arc_length_progress);

  traffic_.clear();
  traffic_speed_.clear();
  for (int i = 1; i < n_total; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      const double s = rng.uniform(0.0, L);
      if (!far_enough(s)) continue;
      VehicleState v = spawn_at(s);
      v.speed = cfg_.vehicle.v_max *
                rng.uniform(cfg_.vehicle.traffic_speed_lo, cfg_.vehicle.traffic_speed_hi);
      traffic_.push_back(v);
      traffic_speed_.push_back(v.speed);
      taken_s.push_back(v.arc_length_progress);
      placed = true;
      break;
    }
    if (!placed)
      throw PlacementFailure("no collision-free slot for vehicle " + std::to_string(i));
  }
}

StepResult Env::step(const Action& action) {
  if (done_) throw SteppedDoneEpisode("step() after episode end");

  const double steer = clamp_unit(action.steering);
  const double accel = clamp_unit(action.acceleration);
  const auto& vp = cfg_.vehicle;
  const double dt = cfg_.episode.dt;

  // semi-implicit kinematic unicycle: speed, then heading, then position
  ego_.speed = std::clamp(ego_.speed + vp.accel_gain * accel * dt, vp.v_min, vp.v_max);
  ego_.heading = wrap_to_pi(ego_.heading + ego_.speed * vp.steering_gain * steer * dt);
  ego_.x += ego_.speed * std::cos(ego_.heading) * dt;
  ego_.y += ego_.speed * std::sin(ego_.heading) * dt;

  for (std::size_t i = 0; i < traffic_.size(); ++i) {
    auto& t = traffic_[i];
    double s = t.arc_length_progress + traffic_speed_[i] * dt;
    if (track_.open()) s = std::min(s, track_.total_length());
    s = track_.wrap_s(s);
    Pose p = track_.pose_at(s);
    t.arc_length_progress = s;
    t.x = p.x;
    t.y = p.y;
    t.heading = p.heading;
    t.speed = traffic_speed_[i];
  }

  const double prev_s = ego_.arc_length_progress;
  const double window = std::max(30.0, ego_.speed * dt * 4.0);
  Projection proj = track_.project(ego_.x, ego_.y, prev_s, window);
  ego_.arc_length_progress = proj.s;
  ego_.lateral = proj.lateral;

  StepResult out;
  ProgressUpdate prog = progress_update(prev_s, proj.s, track_);
  out.info.distance_delta = prog.distance_delta;
  out.info.lap_completed = prog.lap_completed;
  out.info.progressing = prog.progressing;
  if (prog.lap_completed) ++lap_wraps_;
  if (!track_.open() && (proj.s - prev_s) > 0.5 * track_.total_length()) --lap_wraps_;
  ego_.lap_count = lap_wraps_;

  for (const auto& t : traffic_) {
    const double dx = ego_.x - t.x, dy = ego_.y - t.y;
    const double r2 = 2.0 * vp.collision_radius;
    if (dx * dx + dy * dy < r2 * r2) {
      out.info.crashed = true;
      break;
    }
  }
  out.info.off_track = std::abs(proj.lateral) > track_.half_width();
  out.info.route_end =
      track_.open() && proj.s >= track_.total_length() - std::max(1.0, ego_.speed * dt);

  ++elapsed_steps_;
  out.info.elapsed = elapsed_seconds();
  const bool time_up = elapsed_steps_ >= max_steps_;

  const int collision = (out.info.crashed || out.info.off_track) ? -1 : 0;
  out.reward = compute_reward(ego_.speed, vp.v_min, vp.v_max, collision,
                              cfg_.episode.reward_a, cfg_.episode.reward_b,
                              out.info.progressing);

  done_ = out.info.crashed || out.info.off_track || out.info.route_end || time_up;
  ego_.alive = !(out.info.crashed || out.info.off_track);
  out.done = done_;
  out.obs = observe();
  return out;
}

Observation Env::observe() const {
  Observation obs;
  obs.rows = cfg_.observation_rows;
  obs.data.assign(static_cast<std::size_t>(obs.rows) * Observation::kCols, 0.0);

  const auto& rg = cfg_.ranges;
  const double halfw = track_.half_width();

  auto fill_row = [&](int row, const VehicleState& v, bool ego_row) {
    double* d = obs.data.data() + static_cast<std::size_t>(row) * Observation::kCols;
    const double vx = v.speed * std::cos(v.heading);
    const double vy = v.speed * std::sin(v.heading);
    d[0] = 1.0;
    if (ego_row) {
      d[1] = clamp_unit(v.x / rg.position);
      d[2] = clamp_unit(v.y / rg.position);
      d[3] = clamp_unit(vx / rg.velocity);
      d[4] = clamp_unit(vy / rg.velocity);
    } else {
      const double evx = ego_.speed * std::cos(ego_.heading);
      const double evy = ego_.speed * std::sin(ego_.heading);
      d[1] = clamp_unit((v.x - ego_.x) / rg.rel_position);
      d[2] = clamp_unit((v.y - ego_.y) / rg.rel_position);
      d[3] = clamp_unit((vx - evx) / (2.0 * rg.velocity));
      d[4] = clamp_unit((vy - evy) / (2.0 * rg.velocity));
    }
    d[5] = clamp_unit(v.heading / M_PI);
    d[6] = clamp_unit(2.0 * track_.segment_fraction(v.arc_length_progress) - 1.0);
    d[7] = clamp_unit(v.lateral / halfw);
    const double tangent = track_.pose_at(v.arc_length_progress).heading;
    d[8] = clamp_unit(wrap_to_pi(v.heading - tangent) / M_PI);
  };

  fill_row(0, ego_, true);
  if (obs.rows > 1 && !traffic_.empty()) {
    // nearest vehicles first; ties resolved by id order
    std::vector<int> order(traffic_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      const auto& ta = traffic_[a];
      const auto& tb = traffic_[b];
      const double da = std::hypot(ta.x - ego_.x, ta.y - ego_.y);
      const double db = std::hypot(tb.x - ego_.x, tb.y - ego_.y);
      return da < db;
    });
    const int n = std::min<int>(obs.rows - 1, static_cast<int>(order.size()));
    for (int i = 0; i < n; ++i) fill_row(i + 1, traffic_[order[i]], false);
  }
  return obs;
}

Frame Env::render_frame() const {
  return render_view(track_, traffic_, &ego_, ego_.x, ego_.y, cfg_.render);
}

}  // namespace fastrl::sim
