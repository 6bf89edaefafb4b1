#pragma once

#include <string>
#include <vector>

namespace fastrl::sim {

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

struct Segment {
  enum class Kind { Straight, Arc };
  Kind kind = Kind::Straight;
  double length = 0.0;  // straight only
  double radius = 0.0;  // arc only
  double sweep = 0.0;   // arc only, radians in (0, 2*pi]
  int dir = +1;         // arc only, +1 left, -1 right

  static Segment straight(double length);
  static Segment arc(double radius, double sweep, int dir);
  double arc_length() const;
};

struct TrackSpec {
  int format_version = 1;
  std::string name;
  double lane_width = 10.0;
  bool open = false;
  std::vector<Segment> segments;
};

TrackSpec parse_track_spec(const std::string& text);
std::string format_track_spec(const TrackSpec& spec);

struct Projection {
  double s = 0.0;        // arc-length of closest centerline point
  double lateral = 0.0;  // signed offset, left of travel positive
  double distance = 0.0; // unsigned distance to centerline
  double heading = 0.0;  // centerline tangent at s
};

// Realized track: centerline with arc-length parameterization. Built tracks
// are immutable and safe to share between threads.
class Track {
 public:
  // Throws NonClosedTrack if a circuit spec fails the closure tolerance,
  // ConfigError on invalid segments.
  explicit Track(TrackSpec spec);

  const TrackSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  double total_length() const { return total_length_; }
  double lane_width() const { return spec_.lane_width; }
  double half_width() const { return spec_.lane_width * 0.5; }
  bool open() const { return spec_.open; }

  Pose pose_at(double s) const;
  double curvature_at(double s) const;

  // Fraction through the current segment at s, in [0, 1).
  double segment_fraction(double s) const;

  // Closest centerline point. window < 0 searches the whole track; otherwise
  // only candidates within `window` meters of arc-length `s_hint` count, so
  // self-crossing layouts resolve to the branch being driven.
  Projection project(double x, double y, double s_hint = -1.0,
                     double window = -1.0) const;

  // Unsigned distance to the centerline, cheapest full-track query (used by
  // the renderer).
  double distance_to(double x, double y) const;

  // Signed arc-length difference new - old; wrap-aware on circuits.
  double wrap_delta(double s_new, double s_old) const;

  double wrap_s(double s) const;

  struct Bounds {
    double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  };
  const Bounds& bounds() const { return bounds_; }

  int segment_count() const { return static_cast<int>(spec_.segments.size()); }

 private:
  struct BuiltSegment {
    Segment seg;
    Pose start;
    double s_begin = 0.0;
    double s_end = 0.0;
    // arc precomputation
    double cx = 0.0, cy = 0.0, angle0 = 0.0;
  };

  struct Candidate {
    double s, lateral, distance, heading;
  };

  Candidate project_segment(const BuiltSegment& bs, double x, double y) const;
  const BuiltSegment& segment_at(double s) const;

  TrackSpec spec_;
  std::vector<BuiltSegment> built_;
  double total_length_ = 0.0;
  Bounds bounds_;
};

double wrap_to_pi(double angle);

}  // namespace fastrl::sim
