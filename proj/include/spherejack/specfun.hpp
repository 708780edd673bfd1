#pragma once

// Gegenbauer (ultraspherical) polynomials and the normalized Legendre
// polynomials P_j^n(t) = G_j^lambda(t) / G_j^lambda(1), lambda = (n-2)/2.

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "spherejack/errors.hpp"

namespace spherejack {

/// Largest harmonic degree accepted anywhere in the library.
inline constexpr int kMaxDegree = 4096;

namespace detail {

inline void check_degree(int j) {
  if (j < 0) throw std::invalid_argument("harmonic degree must be nonnegative");
  if (j > kMaxDegree) {
    throw std::invalid_argument("harmonic degree " + std::to_string(j) + " exceeds the cap " +
                                std::to_string(kMaxDegree));
  }
}

inline void check_unit_interval(double t) {
  if (!(std::abs(t) <= 1.0)) {
    throw std::domain_error("argument t = " + std::to_string(t) + " lies outside [-1, 1]");
  }
}

}  // namespace detail

inline void check_sphere_dimension(int n) {
  if (n < 3) {
    throw unsupported_dimension("sphere dimension n = " + std::to_string(n) +
                                " is unsupported (need n >= 3)");
  }
}

/// lambda = (n - 2) / 2 for the sphere S^{n-1}.
inline double ultraspherical_index(int n) {
  check_sphere_dimension(n);
  return 0.5 * static_cast<double>(n - 2);
}

/// G_j^lambda(t) by the three-term recurrence
///   j G_j = 2 (j + lambda - 1) t G_{j-1} - (j + 2 lambda - 2) G_{j-2}.
inline double gegenbauer(int j, double lambda, double t) {
  detail::check_degree(j);
  detail::check_unit_interval(t);
  if (!(lambda > 0.0)) throw std::invalid_argument("Gegenbauer index lambda must be positive");
  if (j == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * lambda * t;
  for (int m = 2; m <= j; ++m) {
    const double next =
        (2.0 * (m + lambda - 1.0) * t * cur - (m + 2.0 * lambda - 2.0) * prev) / m;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// G_j^lambda(1) = Gamma(j + 2 lambda) / (Gamma(j + 1) Gamma(2 lambda)).
/// Product form for moderate j, log-gamma beyond the range of Gamma in double.
inline double gegenbauer_at_one(int j, double lambda) {
  detail::check_degree(j);
  if (!(lambda > 0.0)) throw std::invalid_argument("Gegenbauer index lambda must be positive");
  if (j + 2.0 * lambda <= 170.0) {
    double value = 1.0;
    for (int i = 1; i <= j; ++i) value *= (2.0 * lambda + i - 1.0) / i;
    return value;
  }
  return std::exp(std::lgamma(j + 2.0 * lambda) - std::lgamma(j + 1.0) - std::lgamma(2.0 * lambda));
}

/// P_j^n(t). Uses the recurrence for the normalized polynomials directly,
///   P_j = (2 (j + lambda - 1) t P_{j-1} - (j - 1) P_{j-2}) / (j + 2 lambda - 1),
/// which never forms the (possibly huge) factor G_j^lambda(1).
inline double legendre_pn(int j, int n, double t) {
  detail::check_degree(j);
  detail::check_unit_interval(t);
  const double lambda = ultraspherical_index(n);
  if (j == 0) return 1.0;
  double prev = 1.0;
  double cur = t;
  for (int m = 2; m <= j; ++m) {
    const double next =
        (2.0 * (m + lambda - 1.0) * t * cur - (m - 1.0) * prev) / (m + 2.0 * lambda - 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Fills out[j] = P_j^n(t) for j = 0 .. out.size() - 1. No argument checks;
/// callers validate once outside hot loops.
inline void legendre_pn_fill(double lambda, double t, std::span<double> out) {
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() == 1) return;
  out[1] = t;
  for (std::size_t m = 2; m < out.size(); ++m) {
    const double md = static_cast<double>(m);
    out[m] = (2.0 * (md + lambda - 1.0) * t * out[m - 1] - (md - 1.0) * out[m - 2]) /
             (md + 2.0 * lambda - 1.0);
  }
}

/// Sum_j coeffs[j] P_j^n(t), evaluated with the normalized recurrence.
inline double legendre_series(std::span<const double> coeffs, double lambda, double t) {
  if (coeffs.empty()) return 0.0;
  double sum = coeffs[0];
  if (coeffs.size() == 1) return sum;
  double prev = 1.0;
  double cur = t;
  sum += coeffs[1] * cur;
  for (std::size_t m = 2; m < coeffs.size(); ++m) {
    const double md = static_cast<double>(m);
    const double next =
        (2.0 * (md + lambda - 1.0) * t * cur - (md - 1.0) * prev) / (md + 2.0 * lambda - 1.0);
    prev = cur;
    cur = next;
    sum += coeffs[m] * cur;
  }
  return sum;
}

}  // namespace spherejack
