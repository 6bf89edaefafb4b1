#include "fastrl/sim/builtin_tracks.hpp"

#include <cmath>

#include "fastrl/errors.hpp"

namespace fastrl::sim {

namespace {

using K = Segment;

TrackSpec oval_spec() {
  // two long straights joined by half-circle ends
  TrackSpec t;
  t.name = "oval";
  t.lane_width = 12.0;
  t.segments = {
      K::straight(120), K::arc(30, M_PI, +1),
      K::straight(120), K::arc(30, M_PI, +1),
  };
  return t;
}

TrackSpec mixed_spec() {
  // rounded square, each corner split into two 45-degree arcs around a short
  // straight; closes by 4-fold symmetry
  TrackSpec t;
  t.name = "mixed";
  t.lane_width = 11.0;
  for (int i = 0; i < 4; ++i) {
    t.segments.push_back(K::straight(70));
    t.segments.push_back(K::arc(22, M_PI / 4, +1));
    t.segments.push_back(K::straight(15));
    t.segments.push_back(K::arc(22, M_PI / 4, +1));
  }
  return t;
}

TrackSpec long_complex_spec() {
  // half-loop with consecutive corners netting a 180-degree turn, repeated
  // twice; closes by central symmetry
  TrackSpec t;
  t.name = "long_complex";
  t.lane_width = 10.0;
  for (int i = 0; i < 2; ++i) {
    t.segments.push_back(K::straight(110));
    t.segments.push_back(K::arc(25, M_PI / 2, +1));
    t.segments.push_back(K::straight(25));
    t.segments.push_back(K::arc(18, M_PI / 4, -1));
    t.segments.push_back(K::arc(18, M_PI / 4, +1));
    t.segments.push_back(K::straight(35));
    t.segments.push_back(K::arc(15, M_PI / 2, +1));
    t.segments.push_back(K::straight(30));
    t.segments.push_back(K::arc(15, M_PI / 4, -1));
    t.segments.push_back(K::straight(20));
    t.segments.push_back(K::arc(20, M_PI / 4, +1));
    t.segments.push_back(K::straight(60));
  }
  return t;
}

TrackSpec lane_centering_spec() {
  // open winding single-lane road, no traffic
  TrackSpec t;
  t.name = "lane_centering";
  t.lane_width = 8.0;
  t.open = true;
  t.segments.push_back(K::straight(40));
  const int pattern[12] = {+1, -1, -1, +1, +1, -1, -1, +1, +1, -1, -1, +1};
  for (int dir : pattern) t.segments.push_back(K::arc(60, M_PI / 4, dir));
  t.segments.push_back(K::straight(40));
  return t;
}

TrackSpec straight_traffic_spec() {
  TrackSpec t;
  t.name = "straight_traffic";
  t.lane_width = 12.0;
  t.open = true;
  t.segments = {K::straight(1500)};
  return t;
}

TrackSpec merge_like_spec() {
  // dogleg: main road with a lane-change kink where traffic funnels in
  TrackSpec t;
  t.name = "merge_like";
  t.lane_width = 12.0;
  t.open = true;
  t.segments = {
      K::straight(150), K::arc(80, M_PI / 9, -1),
      K::straight(80),  K::arc(80, M_PI / 9, +1),
      K::straight(400),
  };
  return t;
}

TrackSpec cross_like_spec() {
  // figure-eight: two 240-degree loops joined by internal tangents that
  // cross mid-way
  TrackSpec t;
  t.name = "cross_like";
  t.lane_width = 10.0;
  const double r = 30.0;
  const double tangent = 2.0 * std::sqrt(3.0) * r;
  t.segments = {
      K::straight(tangent), K::arc(r, 4.0 * M_PI / 3.0, -1),
      K::straight(tangent), K::arc(r, 4.0 * M_PI / 3.0, +1),
  };
  return t;
}

TrackSpec ring_like_spec() {
  TrackSpec t;
  t.name = "ring_like";
  t.lane_width = 10.0;
  t.segments = {K::arc(25, 2.0 * M_PI, +1)};
  return t;
}

}  // namespace

std::vector<std::string> built_in_track_names() {
  return {"oval",        "mixed",      "long_complex", "lane_centering",
          "straight_traffic", "merge_like", "cross_like",   "ring_like"};
}

bool is_built_in_track(const std::string& name) {
  for (const auto& n : built_in_track_names())
    if (n == name) return true;
  return false;
}

TrackSpec built_in_track_spec(const std::string& name) {
  if (name == "oval") return oval_spec();
  if (name == "mixed") return mixed_spec();
  if (name == "long_complex") return long_complex_spec();
  if (name == "lane_centering") return lane_centering_spec();
  if (name == "straight_traffic") return straight_traffic_spec();
  if (name == "merge_like") return merge_like_spec();
  if (name == "cross_like") return cross_like_spec();
  if (name == "ring_like") return ring_like_spec();
  throw ConfigError("unknown built-in track: " + name);
}

}  // namespace fastrl::sim
