#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spherejack/errors.hpp"

namespace spherejack {

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;  // natural log of the prefactor
  double r_squared = 0.0;
};

/// Least-squares line through (log x, log y). Needs three or more points
/// with x > 0 and y > 0.
inline RateFit fit_rate(std::span<const std::pair<double, double>> points) {
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [x, y] = points[i];
    if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) bad.push_back(i);
  }
  if (!bad.empty()) {
    std::string rows;
    for (auto i : bad) rows += (rows.empty() ? "" : ", ") + std::to_string(i);
    throw fit_error("log-log fit needs positive finite data; offending rows: " + rows, bad);
  }
  if (points.size() < 3) throw fit_error("log-log fit needs at least 3 points", {});

  const double m = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : points) {
    sx += std::log(x);
    sy += std::log(y);
  }
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mx;
    const double dy = std::log(y) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw fit_error("log-log fit needs at least two distinct x values", {});
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0.0) {
    fit.r_squared = 1.0;
  } else {
    double sse = 0.0;
    for (const auto& [x, y] : points) {
      const double e = std::log(y) - (fit.intercept + fit.slope * std::log(x));
      sse += e * e;
    }
    fit.r_squared = std::clamp(1.0 - sse / syy, 0.0, 1.0);
  }
  return fit;
}

}  // namespace spherejack
