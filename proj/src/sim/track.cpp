#include "fastrl/sim/track.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fastrl/core/textio.hpp"
#include "fastrl/errors.hpp"

namespace fastrl::sim {

namespace {
constexpr double kClosureTol = 1e-6;
constexpr double kTwoPi = 2.0 * M_PI;
}  // namespace

double wrap_to_pi(double angle) {
  double a = std::fmod(angle + M_PI, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a - M_PI;
}

Segment Segment::straight(double length) {
  Segment s;
  s.kind = Kind::Straight;
  s.length = length;
  return s;
}

Segment Segment::arc(double radius, double sweep, int dir) {
  Segment s;
  s.kind = Kind::Arc;
  s.radius = radius;
  s.sweep = sweep;
  s.dir = dir;
  return s;
}

double Segment::arc_length() const {
  return kind == Kind::Straight ? length : radius * sweep;
}

TrackSpec parse_track_spec(const std::string& text) {
  core::KvFile kv = core::KvFile::parse(text);
  TrackSpec spec;
  spec.format_version = static_cast<int>(core::parse_int(kv.get_or("", "format_version", "1")));
  if (spec.format_version != 1)
    throw VersionMismatch("unsupported track format_version " +
                          std::to_string(spec.format_version));
  spec.name = kv.get_or("", "name", "unnamed");
  spec.lane_width = core::parse_double(kv.get_or("", "lane_width", "10"));
  spec.open = core::parse_bool(kv.get_or("", "open", "false"));
  for (const auto& line : kv.get_all("", "segment")) {
    std::istringstream ss(line);
    std::string kind;
    ss >> kind;
    kind = core::to_lower(kind);
    if (kind == "straight") {
      double len;
      if (!(ss >> len)) throw ConfigError("segment: straight needs a length");
      spec.segments.push_back(Segment::straight(len));
    } else if (kind == "arc") {
      double radius, sweep;
      std::string dir;
      if (!(ss >> radius >> sweep >> dir))
        throw ConfigError("segment: arc needs radius, sweep, direction");
      dir = core::to_lower(dir);
      if (dir != "left" && dir != "right")
        throw ConfigError("segment: arc direction must be left or right");
      spec.segments.push_back(Segment::arc(radius, sweep, dir == "left" ? +1 : -1));
    } else {
      throw ConfigError("unknown segment kind: " + kind);
    }
  }
  return spec;
}

std::string format_track_spec(const TrackSpec& spec) {
  core::KvFile kv;
  kv.set("", "format_version", std::to_string(spec.format_version));
  kv.set("", "name", spec.name);
  kv.set("", "lane_width", core::format_double(spec.lane_width));
  kv.set("", "open", spec.open ? "true" : "false");
  for (const auto& seg : spec.segments) {
    if (seg.kind == Segment::Kind::Straight) {
      kv.append("", "segment", "straight " + core::format_double(seg.length));
    } else {
      kv.append("", "segment", "arc " + core::format_double(seg.radius) + " " +
                               core::format_double(seg.sweep) + " " +
                               (seg.dir > 0 ? "left" : "right"));
    }
  }
  return kv.serialize();
}

Track::Track(TrackSpec spec) : spec_(std::move(spec)) {
  if (spec_.segments.empty()) throw ConfigError("track '" + spec_.name + "' has no segments");
  if (spec_.lane_width <= 0) throw ConfigError("lane_width must be positive");

  Pose cursor;  // segments start at the origin heading +x
  double s = 0.0;
  for (const auto& seg : spec_.segments) {
    BuiltSegment bs;
    bs.seg = seg;
    bs.start = cursor;
    bs.s_begin = s;
    if (seg.kind == Segment::Kind::Straight) {
      if (seg.length <= 0) throw ConfigError("straight segment length must be positive");
      cursor.x += seg.length * std::cos(cursor.heading);
      cursor.y += seg.length * std::sin(cursor.heading);
      s += seg.length;
    } else {
      if (seg.radius <= 0) throw ConfigError("arc radius must be positive");
      if (seg.sweep <= 0 || seg.sweep > kTwoPi + 1e-12)
        throw ConfigError("arc sweep must be in (0, 2*pi]");
      const double nx = -std::sin(cursor.heading);
      const double ny = std::cos(cursor.heading);
      bs.cx = cursor.x + seg.dir * seg.radius * nx;
      bs.cy = cursor.y + seg.dir * seg.radius * ny;
      bs.angle0 = std::atan2(cursor.y - bs.cy, cursor.x - bs.cx);
      const double end_angle = bs.angle0 + seg.dir * seg.sweep;
      cursor.x = bs.cx + seg.radius * std::cos(end_angle);
      cursor.y = bs.cy + seg.radius * std::sin(end_angle);
      cursor.heading = wrap_to_pi(cursor.heading + seg.dir * seg.sweep);
      s += seg.radius * seg.sweep;
    }
    bs.s_end = s;
    built_.push_back(bs);
  }
  total_length_ = s;
  if (total_length_ <= 0) throw ConfigError("track length must be positive");

  if (!spec_.open) {
    const double dx = cursor.x, dy = cursor.y;
    const double dh = wrap_to_pi(cursor.heading);
    if (std::abs(dx) > kClosureTol || std::abs(dy) > kClosureTol ||
        std::abs(dh) > kClosureTol) {
      std::ostringstream msg;
      msg << "track '" << spec_.name << "' does not close: end offset (" << dx << ", "
          << dy << "), heading error " << dh;
      throw NonClosedTrack(msg.str());
    }
  }

  bounds_.min_x = bounds_.max_x = built_.front().start.x;
  bounds_.min_y = bounds_.max_y = built_.front().start.y;
  const double step = 1.0;
  for (double t = 0.0; t < total_length_; t += step) {
    Pose p = pose_at(t);
    bounds_.min_x = std::min(bounds_.min_x, p.x);
    bounds_.max_x = std::max(bounds_.max_x, p.x);
    bounds_.min_y = std::min(bounds_.min_y, p.y);
    bounds_.max_y = std::max(bounds_.max_y, p.y);
  }
}

double Track::wrap_s(double s) const {
  if (spec_.open) return std::clamp(s, 0.0, total_length_);
  double w = std::fmod(s, total_length_);
  if (w < 0) w += total_length_;
  return w;
}

const Track::BuiltSegment& Track::segment_at(double s) const {
  // binary search over segment ends
  int lo = 0, hi = static_cast<int>(built_.size()) - 1;
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (built_[mid].s_end <= s)
      lo = mid + 1;
    else
      hi = mid;
  }
  return built_[lo];
}

Pose Track::pose_at(double s) const {
  s = wrap_s(s);
  if (s >= total_length_) s = std::nextafter(total_length_, 0.0);
  const BuiltSegment& bs = segment_at(s);
  const double t = s - bs.s_begin;
  Pose p;
  if (bs.seg.kind == Segment::Kind::Straight) {
    p.heading = bs.start.heading;
    p.x = bs.start.x + t * std::cos(p.heading);
    p.y = bs.start.y + t * std::sin(p.heading);
  } else {
    const double phi = bs.seg.dir * (t / bs.seg.radius);
    const double ang = bs.angle0 + phi;
    p.x = bs.cx + bs.seg.radius * std::cos(ang);
    p.y = bs.cy + bs.seg.radius * std::sin(ang);
    p.heading = wrap_to_pi(bs.start.heading + phi);
  }
  return p;
}

double Track::curvature_at(double s) const {
  s = wrap_s(s);
  if (s >= total_length_) s = std::nextafter(total_length_, 0.0);
  const BuiltSegment& bs = segment_at(s);
  if (bs.seg.kind == Segment::Kind::Straight) return 0.0;
  return bs.seg.dir / bs.seg.radius;
}

double Track::segment_fraction(double s) const {
  s = wrap_s(s);
  if (s >= total_length_) s = std::nextafter(total_length_, 0.0);
  const BuiltSegment& bs = segment_at(s);
  const double len = bs.s_end - bs.s_begin;
  return len > 0 ? (s - bs.s_begin) / len : 0.0;
}

Track::Candidate Track::project_segment(const BuiltSegment& bs, double x, double y) const {
  Candidate c;
  if (bs.seg.kind == Segment::Kind::Straight) {
    const double dx = std::cos(bs.start.heading), dy = std::sin(bs.start.heading);
    const double px = x - bs.start.x, py = y - bs.start.y;
    double t = px * dx + py * dy;
    t = std::clamp(t, 0.0, bs.seg.length);
    const double cx = bs.start.x + t * dx, cy = bs.start.y + t * dy;
    c.s = bs.s_begin + t;
    c.lateral = -(x - cx) * dy + (y - cy) * dx;
    c.distance = std::hypot(x - cx, y - cy);
    c.heading = bs.start.heading;
    return c;
  }
  const double r = bs.seg.radius;
  const double rx = x - bs.cx, ry = y - bs.cy;
  const double rad = std::hypot(rx, ry);
  double phi = bs.seg.dir * wrap_to_pi(std::atan2(ry, rx) - bs.angle0);
  // fold the angle into the swept range, snapping to the nearer endpoint
  if (phi < 0) phi += kTwoPi;
  if (phi > bs.seg.sweep) {
    const double over = phi - bs.seg.sweep;
    const double under = kTwoPi - phi;
    phi = (over < under) ? bs.seg.sweep : 0.0;
  }
  const double t = phi * r;
  const double ang = bs.angle0 + bs.seg.dir * phi;
  const double cx = bs.cx + r * std::cos(ang), cy = bs.cy + r * std::sin(ang);
  const double heading = wrap_to_pi(bs.start.heading + bs.seg.dir * phi);
  c.s = bs.s_begin + t;
  c.distance = std::hypot(x - cx, y - cy);
  // left of travel is toward the center for left arcs
  c.lateral = bs.seg.dir * (r - rad);
  if (phi <= 0.0 || phi >= bs.seg.sweep) {
    // endpoint snap: recompute lateral against the tangent frame there
    const double dx = std::cos(heading), dy = std::sin(heading);
    c.lateral = -(x - cx) * dy + (y - cy) * dx;
  }
  c.heading = heading;
  return c;
}

Projection Track::project(double x, double y, double s_hint, double window) const {
  Projection best;
  double best_dist = std::numeric_limits<double>::infinity();
  bool windowed = s_hint >= 0.0 && window > 0.0;
  for (const auto& bs : built_) {
    Candidate c = project_segment(bs, x, y);
    if (windowed && std::abs(wrap_delta(c.s, s_hint)) > window) continue;
    if (c.distance < best_dist) {
      best_dist = c.distance;
      best.s = c.s;
      best.lateral = c.lateral;
      best.distance = c.distance;
      best.heading = c.heading;
    }
  }
  if (!std::isfinite(best_dist)) {
    // nothing inside the window; fall back to a global search
    return project(x, y);
  }
  return best;
}

double Track::distance_to(double x, double y) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& bs : built_) {
    Candidate c = project_segment(bs, x, y);
    best = std::min(best, c.distance);
  }
  return best;
}

double Track::wrap_delta(double s_new, double s_old) const {
  double d = s_new - s_old;
  if (spec_.open) return d;
  const double half = total_length_ * 0.5;
  while (d > half) d -= total_length_;
  while (d < -half) d += total_length_;
  return d;
}

}  // namespace fastrl::sim
