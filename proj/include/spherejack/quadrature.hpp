#pragma once

// Gauss-Legendre rules on subintervals of [0, pi] and a dyadically graded
// composite rule for integrands with power behaviour at theta = 0.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spherejack/errors.hpp"

namespace spherejack {

struct QuadratureRule {
  std::vector<double> nodes;    // strictly increasing, interior to (a, b)
  std::vector<double> weights;  // positive, summing to b - a
  double a = 0.0;
  double b = 0.0;

  std::size_t size() const noexcept { return nodes.size(); }
};

namespace detail {

/// Gauss-Legendre nodes (ascending) and weights on [-1, 1], by Newton
/// iteration on P_order to a 1e-15 step tolerance.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre_reference(int order) {
  const auto n = static_cast<std::size_t>(order);
  std::vector<double> x(n), w(n);
  const double nd = static_cast<double>(order);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    // i-th largest root.
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (int m = 2; m <= order; ++m) {
        const double p2 = ((2.0 * m - 1.0) * z * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) p0 = 1.0;
      // P_order = p1, P_{order-1} = p0
      dp = nd * (z * p1 - p0) / (z * z - 1.0);
      const double step = p1 / dp;
      z -= step;
      if (std::abs(step) < 1e-15) break;
    }
    {
      // Re-evaluate the derivative at the converged root for the weight.
      double p0 = 1.0;
      double p1 = z;
      for (int m = 2; m <= order; ++m) {
        const double p2 = ((2.0 * m - 1.0) * z * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) p0 = 1.0;
      dp = nd * (z * p1 - p0) / (z * z - 1.0);
    }
    const double weight = 2.0 / ((1.0 - z * z) * dp * dp);
    x[n - 1 - i] = z;
    x[i] = -z;
    w[n - 1 - i] = weight;
    w[i] = weight;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
  return {std::move(x), std::move(w)};
}

using ReferenceRule = std::pair<std::vector<double>, std::vector<double>>;

/// Process-wide memo of reference rules. Entries are immutable once
/// inserted, so readers share them without further locking.
inline std::shared_ptr<const ReferenceRule> cached_reference(int order) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const ReferenceRule>> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(order); it != cache.end()) return it->second;
  }
  auto rule = std::make_shared<const ReferenceRule>(gauss_legendre_reference(order));
  std::lock_guard lock(mutex);
  return cache.try_emplace(order, std::move(rule)).first->second;
}

inline void check_subinterval(double a, double b) {
  if (!(a < b)) {
    throw std::invalid_argument("invalid interval: a = " + std::to_string(a) +
                                " must be below b = " + std::to_string(b));
  }
  if (a < 0.0 || b > std::numbers::pi) {
    throw std::invalid_argument("invalid interval: (" + std::to_string(a) + ", " +
                                std::to_string(b) + ") is not inside [0, pi]");
  }
}

inline void append_mapped(QuadratureRule& rule, const std::vector<double>& x,
                          const std::vector<double>& w, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < x.size(); ++i) {
    rule.nodes.push_back(mid + half * x[i]);
    rule.weights.push_back(half * w[i]);
  }
}

}  // namespace detail

/// Gauss-Legendre rule with `order` nodes mapped affinely onto (a, b),
/// 0 <= a < b <= pi. Exact for polynomials of degree 2 order - 1.
inline QuadratureRule gauss_rule(int order, double a, double b) {
  if (order < 1) throw std::invalid_argument("quadrature order must be at least 1");
  detail::check_subinterval(a, b);
  const auto ref = detail::cached_reference(order);
  const auto& [x, w] = *ref;
  QuadratureRule rule;
  rule.a = a;
  rule.b = b;
  rule.nodes.reserve(x.size());
  rule.weights.reserve(x.size());
  detail::append_mapped(rule, x, w, a, b);
  return rule;
}

/// Composite rule over the dyadic panels [upper 2^{-m-1}, upper 2^{-m}],
/// m = 0 .. levels - 1, each carrying `order_per_panel` Gauss nodes. Covers
/// (upper 2^{-levels}, upper); the neglected sliver is below 1e-18 for
/// levels = 60.
inline QuadratureRule graded_rule(int order_per_panel, int levels,
                                  double upper = std::numbers::pi) {
  if (order_per_panel < 1) throw std::invalid_argument("quadrature order must be at least 1");
  if (levels < 1 || levels > 60) throw std::invalid_argument("graded rule needs 1 <= levels <= 60");
  detail::check_subinterval(0.0, upper);
  const auto ref = detail::cached_reference(order_per_panel);
  const auto& [x, w] = *ref;
  QuadratureRule rule;
  rule.b = upper;
  rule.a = std::ldexp(upper, -levels);
  rule.nodes.reserve(static_cast<std::size_t>(levels * order_per_panel));
  rule.weights.reserve(rule.nodes.capacity());
  for (int m = levels - 1; m >= 0; --m) {
    detail::append_mapped(rule, x, w, std::ldexp(upper, -m - 1), std::ldexp(upper, -m));
  }
  return rule;
}

/// Sum_i w_i f(theta_i). Throws numerical_domain_error on the first node
/// where f is not finite.
template <typename F>
double integrate(F&& f, const QuadratureRule& rule) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double value = f(rule.nodes[i]);
    if (!std::isfinite(value)) {
      throw numerical_domain_error(
          "integrand is not finite at theta = " + std::to_string(rule.nodes[i]), rule.nodes[i]);
    }
    sum += rule.weights[i] * value;
  }
  return sum;
}

}  // namespace spherejack
