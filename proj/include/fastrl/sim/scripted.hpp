#pragma once

#include <functional>

#include "fastrl/core/rng.hpp"
#include "fastrl/sim/env.hpp"

namespace fastrl::sim {

// Generic driver: policies look only at the observation; scripted drivers may
// read the full environment state.
using DriverFn = std::function<Action(const Env&, const Observation&, core::Rng&)>;

struct PurePursuitParams {
  double lookahead = 8.0;       // meters ahead along the centerline
  double target_speed = -1.0;   // m/s; negative means v_max
  double steering_noise = 0.0;  // uniform [-x, x] added to the steering action
};

// Lookahead-point follower: steers at the pure-pursuit curvature toward a
// point `lookahead` meters further along the centerline and tracks the target
// speed with a proportional throttle.
Action pure_pursuit_action(const Env& env, const PurePursuitParams& params, core::Rng& rng);

DriverFn pure_pursuit_driver(PurePursuitParams params);
DriverFn random_driver();

}  // namespace fastrl::sim
