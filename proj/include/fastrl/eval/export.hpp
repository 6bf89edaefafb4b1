#pragma once

#include <string>
#include <vector>

#include "fastrl/eval/evaluate.hpp"
#include "fastrl/sac/learner.hpp"
#include "fastrl/transfer/pipeline.hpp"

namespace fastrl::eval {

struct CurveRow {
  int64_t timestep = 0;
  double episodic_reward = 0.0;
  double smoothed_reward = 0.0;

  bool operator==(const CurveRow& o) const {
    return timestep == o.timestep && episodic_reward == o.episodic_reward &&
           smoothed_reward == o.smoothed_reward;
  }
};

// Trailing mean over the last `window` episodes.
std::vector<CurveRow> smooth_curve(const sac::LearningCurve& curve, int window);

// CSV with a versioned header line; values round-trip exactly.
void export_curves(const sac::LearningCurve& curve, const std::string& path,
                   int window = 100);
std::vector<CurveRow> parse_curve_csv(const std::string& path);

struct ReportRow {
  std::string name;
  Stat distance, reward, laps, mean_speed;
  int n_episodes = 0;

  bool operator==(const ReportRow& o) const;
};

void export_report_csv(const std::vector<ReportRow>& rows, const std::string& path);
std::vector<ReportRow> parse_report_csv(const std::string& path);

ReportRow report_row(const std::string& name, const EvalReport& report);

// Usage fractions rendered as percentage rows (source, percent).
void export_usage_csv(const transfer::UsageLog& log, const std::string& path);

// Minimal reward-vs-timestep chart as a portable graymap, for quick looks at
// learning curves without external tooling.
void export_curve_pgm(const sac::LearningCurve& curve, const std::string& path,
                      int width = 480, int height = 240);

}  // namespace fastrl::eval
