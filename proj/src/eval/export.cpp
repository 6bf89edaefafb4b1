#include "fastrl/eval/export.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fastrl/core/textio.hpp"
#include "fastrl/errors.hpp"

namespace fastrl::eval {

namespace {
constexpr const char* kCurveHeader = "# fastrl-curve v1";
constexpr const char* kReportHeader = "# fastrl-report v1 std=population";
constexpr const char* kUsageHeader = "# fastrl-usage v1";

std::vector<std::string> read_lines(const std::string& path) {
  std::string text = core::read_file(path);
  std::vector<std::string> lines;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}
}  // namespace

std::vector<CurveRow> smooth_curve(const sac::LearningCurve& curve, int window) {
  std::vector<CurveRow> rows;
  rows.reserve(curve.size());
  double running = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    running += curve[i].episodic_reward;
    if (i >= static_cast<std::size_t>(window))
      running -= curve[i - window].episodic_reward;
    const std::size_t n = std::min<std::size_t>(i + 1, window);
    CurveRow row;
    row.timestep = curve[i].timestep;
    row.episodic_reward = curve[i].episodic_reward;
    row.smoothed_reward = running / static_cast<double>(n);
    rows.push_back(row);
  }
  return rows;
}

void export_curves(const sac::LearningCurve& curve, const std::string& path, int window) {
  if (window < 1) throw ConfigError("smoothing window must be positive");
  std::ostringstream out;
  out << kCurveHeader << "\n";
  out << "timestep,episodic_reward,smoothed_reward\n";
  for (const auto& row : smooth_curve(curve, window)) {
    out << row.timestep << "," << core::format_double(row.episodic_reward) << ","
        << core::format_double(row.smoothed_reward) << "\n";
  }
  core::write_file(path, out.str());
}

std::vector<CurveRow> parse_curve_csv(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.size() < 2 || lines[0] != kCurveHeader)
    throw CorruptFile("not a curve csv: " + path);
  std::vector<CurveRow> rows;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (core::trim(lines[i]).empty()) continue;
    auto parts = core::split(lines[i], ',');
    if (parts.size() != 3) throw CorruptFile("malformed curve row: " + lines[i]);
    CurveRow row;
    row.timestep = core::parse_int(parts[0]);
    row.episodic_reward = core::parse_double(parts[1]);
    row.smoothed_reward = core::parse_double(parts[2]);
    rows.push_back(row);
  }
  return rows;
}

bool ReportRow::operator==(const ReportRow& o) const {
  auto eq = [](const Stat& a, const Stat& b) {
    return a.mean == b.mean && a.stddev == b.stddev;
  };
  return name == o.name && eq(distance, o.distance) && eq(reward, o.reward) &&
         eq(laps, o.laps) && eq(mean_speed, o.mean_speed) && n_episodes == o.n_episodes;
}

ReportRow report_row(const std::string& name, const EvalReport& report) {
  ReportRow row;
  row.name = name;
  row.distance = report.distance;
  row.reward = report.reward;
  row.laps = report.laps;
  row.mean_speed = report.mean_speed;
  row.n_episodes = report.n_episodes;
  return row;
}

void export_report_csv(const std::vector<ReportRow>& rows, const std::string& path) {
  std::ostringstream out;
  out << kReportHeader << "\n";
  out << "name,ad_mean,ad_std,ar_mean,ar_std,al_mean,al_std,as_mean,as_std,n_episodes\n";
  for (const auto& r : rows) {
    out << r.name << "," << core::format_double(r.distance.mean) << ","
        << core::format_double(r.distance.stddev) << "," << core::format_double(r.reward.mean)
        << "," << core::format_double(r.reward.stddev) << ","
        << core::format_double(r.laps.mean) << "," << core::format_double(r.laps.stddev)
        << "," << core::format_double(r.mean_speed.mean) << ","
        << core::format_double(r.mean_speed.stddev) << "," << r.n_episodes << "\n";
  }
  core::write_file(path, out.str());
}

std::vector<ReportRow> parse_report_csv(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.size() < 2 || lines[0] != kReportHeader)
    throw CorruptFile("not a report csv: " + path);
  std::vector<ReportRow> rows;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (core::trim(lines[i]).empty()) continue;
    auto parts = core::split(lines[i], ',');
    if (parts.size() != 10) throw CorruptFile("malformed report row: " + lines[i]);
    ReportRow r;
    r.name = parts[0];
    r.distance = {core::parse_double(parts[1]), core::parse_double(parts[2])};
    r.reward = {core::parse_double(parts[3]), core::parse_double(parts[4])};
    r.laps = {core::parse_double(parts[5]), core::parse_double(parts[6])};
    r.mean_speed = {core::parse_double(parts[7]), core::parse_double(parts[8])};
    r.n_episodes = static_cast<int>(core::parse_int(parts[9]));
    rows.push_back(r);
  }
  return rows;
}

void export_usage_csv(const transfer::UsageLog& log, const std::string& path) {
  std::ostringstream out;
  out << kUsageHeader << "\n";
  out << "source,percent\n";
  for (const auto& [name, frac] : transfer::usage_percentages(log))
    out << name << "," << core::format_double(100.0 * frac) << "\n";
  core::write_file(path, out.str());
}

void export_curve_pgm(const sac::LearningCurve& curve, const std::string& path, int width,
                      int height) {
  std::vector<unsigned char> img(static_cast<std::size_t>(width) * height, 255);
  if (!curve.empty()) {
    double lo = curve[0].episodic_reward, hi = curve[0].episodic_reward;
    for (const auto& p : curve) {
      lo = std::min(lo, p.episodic_reward);
      hi = std::max(hi, p.episodic_reward);
    }
    if (hi == lo) hi = lo + 1.0;
    const int64_t t_max = std::max<int64_t>(1, curve.back().timestep);
    for (const auto& p : curve) {
      const int x = std::min<int>(width - 1,
                                  static_cast<int>(p.timestep * (width - 1) / t_max));
      const double f = (p.episodic_reward - lo) / (hi - lo);
      const int y = std::min<int>(height - 1, static_cast<int>((1.0 - f) * (height - 1)));
      img[static_cast<std::size_t>(y) * width + x] = 0;
    }
  }
  std::ostringstream out;
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
  core::write_file(path, out.str());
}

}  // namespace fastrl::eval
