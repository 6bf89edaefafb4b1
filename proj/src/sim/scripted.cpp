#include "fastrl/sim/scripted.hpp"

#include <algorithm>
#include <cmath>

namespace fastrl::sim {

Action pure_pursuit_action(const Env& env, const PurePursuitParams& params, core::Rng& rng) {
  const auto& ego = env.ego();
  const auto& track = env.track();
  const auto& vp = env.config().vehicle;

  const Pose target = track.pose_at(ego.arc_length_progress + params.lookahead);
  const double dx = target.x - ego.x;
  const double dy = target.y - ego.y;
  const double dist = std::max(1e-6, std::hypot(dx, dy));
  const double alpha = wrap_to_pi(std::atan2(dy, dx) - ego.heading);
  const double curvature = 2.0 * std::sin(alpha) / dist;

  Action a;
  a.steering = std::clamp(curvature / vp.steering_gain, -1.0, 1.0);
  if (params.steering_noise > 0.0)
    a.steering = std::clamp(
        a.steering + rng.uniform(-params.steering_noise, params.steering_noise), -1.0, 1.0);

  const double v_target = params.target_speed < 0.0 ? vp.v_max : params.target_speed;
  const double dt = env.config().episode.dt;
  a.acceleration = std::clamp((v_target - ego.speed) / (vp.accel_gain * dt), -1.0, 1.0);
  return a;
}

DriverFn pure_pursuit_driver(PurePursuitParams params) {
  return [params](const Env& env, const Observation&, core::Rng& rng) {
    return pure_pursuit_action(env, params, rng);
  };
}

DriverFn random_driver() {
  return [](const Env&, const Observation&, core::Rng& rng) {
    Action a;
    a.steering = rng.uniform(-1.0, 1.0);
    a.acceleration = rng.uniform(-1.0, 1.0);
    return a;
  };
}

}  // namespace fastrl::sim
