#include "fastrl/embed/representation.hpp"

#include <algorithm>
#include <cmath>

#include "fastrl/errors.hpp"

namespace fastrl::embed {

std::string to_string(RepMode mode) { return mode == RepMode::F ? "F" : "FT"; }

RepMode rep_mode_from_string(const std::string& s) {
  if (s == "F" || s == "f") return RepMode::F;
  if (s == "FT" || s == "ft") return RepMode::FT;
  throw ConfigError("unknown representation mode: " + s);
}

std::vector<double> min_max_scale(std::vector<double> v) {
  if (v.empty()) return v;
  auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it, hi = *hi_it;
  if (hi == lo) {
    std::fill(v.begin(), v.end(), 0.5);
    return v;
  }
  const double span = hi - lo;
  for (double& x : v) x = (x - lo) / span;
  return v;
}

TaskRepresentation build_representation(const std::vector<double>& frame_emb,
                                        const std::vector<double>* text_emb,
                                        RepMode mode) {
  TaskRepresentation rep;
  rep.mode = mode;
  std::vector<double> combined = frame_emb;
  if (mode == RepMode::FT) {
    if (!text_emb) throw ModeMismatch("FT representation requires a text embedding");
    combined.insert(combined.end(), text_emb->begin(), text_emb->end());
  }
  rep.values = min_max_scale(std::move(combined));
  return rep;
}

double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size())
    throw ShapeMismatch("cosine: length mismatch " + std::to_string(u.size()) + " vs " +
                        std::to_string(v.size()));
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw ZeroVector("cosine of a zero vector");
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

double cosine_similarity(const TaskRepresentation& u, const TaskRepresentation& v) {
  if (u.mode != v.mode) throw ModeMismatch("representations built in different modes");
  return cosine_similarity(u.values, v.values);
}

}  // namespace fastrl::embed
