#pragma once

#include <string>
#include <vector>

#include "fastrl/sim/track.hpp"

namespace fastrl::sim {

// Named track layouts covering the source/target task family: closed circuits
// (oval, mixed, long_complex, cross_like, ring_like) and open road scenes
// (lane_centering, straight_traffic, merge_like).
std::vector<std::string> built_in_track_names();
bool is_built_in_track(const std::string& name);
TrackSpec built_in_track_spec(const std::string& name);

}  // namespace fastrl::sim
