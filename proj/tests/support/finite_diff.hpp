#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace fastrl::testing {

// Central finite difference of `loss` at params[i].
inline double central_diff(std::vector<double>& params, std::size_t i,
                           const std::function<double()>& loss, double h = 1e-4) {
  const double saved = params[i];
  params[i] = saved + h;
  const double up = loss();
  params[i] = saved - h;
  const double down = loss();
  params[i] = saved;
  return (up - down) / (2.0 * h);
}

// Symmetric relative error, robust around zero.
inline double rel_err(double a, double b) {
  const double denom = std::max({1e-6, std::abs(a), std::abs(b)});
  return std::abs(a - b) / denom;
}

}  // namespace fastrl::testing
