#pragma once

// Zonal band-limited functions f(x) = sum_j a_j P_j^n(x . e) on S^{n-1}.
// Every operator in the library is rotation invariant, so it acts on the
// coefficient vector through a multiplier sequence and the 1-D profile
// g(theta) = sum_j a_j P_j^n(cos theta) describes f completely.

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spherejack/kernel.hpp"
#include "spherejack/quadrature.hpp"
#include "spherejack/specfun.hpp"

namespace spherejack {

class ZonalFunction {
 public:
  ZonalFunction(int n, std::vector<double> coeffs) : n_(n), coeffs_(std::move(coeffs)) {
    check_sphere_dimension(n_);
    if (coeffs_.empty()) coeffs_.push_back(0.0);
    detail::check_degree(max_degree());
    for (std::size_t j = 0; j < coeffs_.size(); ++j) {
      if (!std::isfinite(coeffs_[j])) {
        throw std::invalid_argument("zonal coefficient a_" + std::to_string(j) + " is not finite");
      }
    }
  }

  int n() const noexcept { return n_; }
  double lambda() const noexcept { return 0.5 * (n_ - 2); }
  int max_degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  double coeff(int j) const { return coeffs_.at(static_cast<std::size_t>(j)); }

  bool is_constant() const noexcept {
    return std::all_of(coeffs_.begin() + 1, coeffs_.end(), [](double a) { return a == 0.0; });
  }

  friend bool operator==(const ZonalFunction&, const ZonalFunction&) = default;

 private:
  int n_;
  std::vector<double> coeffs_;
};

/// p in [1, inf) or infinity.
class NormOrder {
 public:
  explicit NormOrder(double p) : p_(p) {
    if (!(p >= 1.0)) throw std::invalid_argument("norm order p must be >= 1");
  }
  static NormOrder infinity() { return NormOrder(std::numeric_limits<double>::infinity()); }

  bool is_infinite() const noexcept { return std::isinf(p_); }
  double value() const noexcept { return p_; }
  std::string label() const {
    if (is_infinite()) return "inf";
    std::ostringstream out;
    out << p_;
    return out.str();
  }

 private:
  double p_;
};

/// |S^{m-1}| = 2 pi^{m/2} / Gamma(m/2), the area of the unit sphere in R^m.
inline double sphere_area(int m) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m);
}

/// Profile value g(theta); theta in [0, pi].
inline double evaluate(const ZonalFunction& f, double theta) {
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
    throw std::domain_error("colatitude theta = " + std::to_string(theta) + " lies outside [0, pi]");
  }
  return legendre_series(f.coeffs(), f.lambda(), std::cos(theta));
}

/// Profile value as a function of t = x . e.
inline double evaluate_at_cos(const ZonalFunction& f, double t) {
  return legendre_series(f.coeffs(), f.lambda(), std::clamp(t, -1.0, 1.0));
}

namespace detail {

inline constexpr int kSupGridIntervals = 4096;

inline double golden_max(const ZonalFunction& f, double lo, double hi) {
  constexpr double inv_phi = 0.6180339887498949;
  auto h = [&](double t) { return std::abs(legendre_series(f.coeffs(), f.lambda(), std::cos(t))); };
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = h(x1);
  double f2 = h(x2);
  for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = h(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = h(x1);
    }
  }
  return std::max(f1, f2);
}

/// Sup norm: uniform grid over [0, pi], then golden-section refinement
/// around the largest local maxima of |g|.
inline double sup_norm(const ZonalFunction& f) {
  if (f.max_degree() == 0) return std::abs(f.coeff(0));
  constexpr int m = kSupGridIntervals;
  std::vector<double> values(m + 1);
  for (int i = 0; i <= m; ++i) {
    const double t = std::numbers::pi * i / m;
    values[static_cast<std::size_t>(i)] =
        std::abs(legendre_series(f.coeffs(), f.lambda(), std::cos(t)));
  }
  double best = *std::max_element(values.begin(), values.end());
  std::vector<std::pair<double, int>> peaks;
  for (int i = 1; i < m; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (values[u] >= values[u - 1] && values[u] >= values[u + 1]) peaks.emplace_back(values[u], i);
  }
  std::sort(peaks.begin(), peaks.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  const std::size_t refine = std::min<std::size_t>(peaks.size(), 8);
  for (std::size_t q = 0; q < refine; ++q) {
    const int i = peaks[q].second;
    best = std::max(best, golden_max(f, std::numbers::pi * (i - 1) / m, std::numbers::pi * (i + 1) / m));
  }
  return best;
}

/// int_0^pi |g|^p sin^{n-2} theta d theta. Even integer p is smooth and uses
/// one Gauss rule; otherwise the interval is split at sign changes of g so
/// the integrand is smooth inside every panel.
inline double power_integral(const ZonalFunction& f, double p) {
  const int J = f.max_degree();
  const double lambda = f.lambda();
  const auto coeffs = f.coeffs();
  auto g = [&](double t) { return legendre_series(coeffs, lambda, std::cos(t)); };
  auto integrand = [&](double t) {
    return std::pow(std::abs(g(t)), p) * std::pow(std::sin(t), 2.0 * lambda);
  };
  const double pi = std::numbers::pi;
  const bool even_integer = p == std::floor(p) && static_cast<long long>(p) % 2 == 0;
  if (even_integer || J == 0) {
    const int order = static_cast<int>(p) * J + f.n() + 32;
    return integrate(integrand, gauss_rule(order, 0.0, pi));
  }

  const int scan = 8 * (J + 1) + 64;
  std::vector<double> cuts{0.0};
  double t_prev = 0.0;
  double g_prev = g(0.0);
  for (int i = 1; i <= scan; ++i) {
    const double t = pi * i / scan;
    const double gt = g(t);
    if (g_prev == 0.0 && i > 1) cuts.push_back(t_prev);
    if (g_prev * gt < 0.0) {
      double lo = t_prev;
      double hi = t;
      double glo = g_prev;
      for (int it = 0; it < 64 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm < 0.0) == (glo < 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      cuts.push_back(0.5 * (lo + hi));
    }
    t_prev = t;
    g_prev = gt;
  }
  cuts.push_back(pi);

  // |g|^p is smooth inside each panel. For non-integer p it behaves like
  // |theta - cut|^p at the cuts, so those panels are graded geometrically
  // toward both ends.
  const bool integer_p = p == std::floor(p);
  constexpr int grading_levels = 16;
  double total = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c];
    const double b = cuts[c + 1];
    if (!(b > a)) continue;
    const int order = static_cast<int>(std::ceil((J + f.n() + 16) * (b - a) / pi)) + 12;
    if (integer_p) {
      total += integrate(integrand, gauss_rule(order, a, b));
      continue;
    }
    const double mid = 0.5 * (a + b);
    const double half = mid - a;
    for (int level = 0; level < grading_levels; ++level) {
      const double outer = std::ldexp(half, -level);
      const double inner = level + 1 < grading_levels ? std::ldexp(half, -level - 1) : 0.0;
      total += integrate(integrand, gauss_rule(order, a + inner, a + outer));
      total += integrate(integrand, gauss_rule(order, b - outer, b - inner));
    }
  }
  return total;
}

}  // namespace detail

/// ||f||_p on S^{n-1}: (|S^{n-2}| int_0^pi |g|^p sin^{n-2} theta d theta)^{1/p},
/// or the maximum of |g| for p = infinity.
inline double lp_norm(const ZonalFunction& f, NormOrder p) {
  if (p.is_infinite()) return detail::sup_norm(f);
  const double integral = detail::power_integral(f, p.value());
  return std::pow(sphere_area(f.n() - 1) * integral, 1.0 / p.value());
}

/// a_j -> m_j a_j for j <= f.max_degree().
inline ZonalFunction apply_multiplier(const ZonalFunction& f, const MultiplierSequence& m) {
  if (m.n != 0 && m.n != f.n()) {
    throw dimension_mismatch("multiplier built for n = " + std::to_string(m.n) +
                             " applied to a function on n = " + std::to_string(f.n()));
  }
  if (m.max_degree() < f.max_degree()) {
    throw std::invalid_argument("multiplier sequence stops at degree " +
                                std::to_string(m.max_degree()) + " below the function degree " +
                                std::to_string(f.max_degree()));
  }
  std::vector<double> out(f.coeffs().begin(), f.coeffs().end());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] *= m.values[j];
  return ZonalFunction(f.n(), std::move(out));
}

inline MultiplierSequence identity_multipliers(int max_degree) {
  detail::check_degree(max_degree);
  MultiplierSequence seq;
  seq.values.assign(static_cast<std::size_t>(max_degree) + 1, 1.0);
  return seq;
}

/// P_j^n(cos theta), the eigenvalues of the translation operator S_theta.
inline MultiplierSequence translation_multipliers(int n, double theta, int max_degree) {
  detail::check_degree(max_degree);
  MultiplierSequence seq;
  seq.n = n;
  seq.tag = {MultiplierTag::Kind::translation, 0, theta};
  seq.values.resize(static_cast<std::size_t>(max_degree) + 1);
  legendre_pn_fill(ultraspherical_index(n), std::cos(theta), seq.values);
  return seq;
}

/// (P_j^n(cos theta) - 1)^r, the eigenvalues of (S_theta - I)^r.
inline MultiplierSequence difference_multipliers(int n, double theta, int r, int max_degree) {
  if (r < 1) throw std::invalid_argument("difference order r must be at least 1");
  auto seq = translation_multipliers(n, theta, max_degree);
  seq.tag = {MultiplierTag::Kind::difference, r, theta};
  for (auto& v : seq.values) v = std::pow(v - 1.0, r);
  return seq;
}

/// (-j (j + 2 lambda))^r, the eigenvalues of the r-th power of the
/// Laplace-Beltrami operator.
inline MultiplierSequence laplace_multipliers(int n, int r, int max_degree) {
  if (r < 1) throw std::invalid_argument("Laplace-Beltrami power r must be at least 1");
  detail::check_degree(max_degree);
  const double lambda = ultraspherical_index(n);
  MultiplierSequence seq;
  seq.n = n;
  seq.tag = {MultiplierTag::Kind::laplace_power, r, 0.0};
  seq.values.resize(static_cast<std::size_t>(max_degree) + 1);
  for (std::size_t j = 0; j < seq.values.size(); ++j) {
    const double jd = static_cast<double>(j);
    seq.values[j] = std::pow(-jd * (jd + 2.0 * lambda), r);
  }
  return seq;
}

/// S_theta f, theta in [0, pi].
inline ZonalFunction translate(const ZonalFunction& f, double theta) {
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
    throw std::domain_error("translation angle theta = " + std::to_string(theta) +
                            " lies outside [0, pi]");
  }
  return apply_multiplier(f, translation_multipliers(f.n(), theta, f.max_degree()));
}

/// Delta_theta^r f = (S_theta - I)^r f.
inline ZonalFunction spherical_difference(const ZonalFunction& f, double theta, int r) {
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
    throw std::domain_error("difference step theta = " + std::to_string(theta) +
                            " lies outside [0, pi]");
  }
  return apply_multiplier(f, difference_multipliers(f.n(), theta, r, f.max_degree()));
}

inline ZonalFunction laplace_beltrami_power(const ZonalFunction& f, int r) {
  return apply_multiplier(f, laplace_multipliers(f.n(), r, f.max_degree()));
}

namespace detail {

inline void check_same_dimension(const ZonalFunction& f, const KernelParams& params) {
  if (params.n != f.n()) {
    throw dimension_mismatch("kernel built for n = " + std::to_string(params.n) +
                             " applied to a function on n = " + std::to_string(f.n()));
  }
}

}  // namespace detail

/// J_{k,s} f: a_j -> eta_{k,s}(j) a_j.
inline ZonalFunction jackson_apply(const ZonalFunction& f, const KernelParams& params,
                                   EigenvalueCache* cache = nullptr) {
  detail::check_same_dimension(f, params);
  return apply_multiplier(f, multiplier_sequence(params, 1, f.max_degree(), cache));
}

/// The r-th Boolean sum (I - (I - J_{k,s})^r) f through its closed-form multiplier.
inline ZonalFunction boolean_apply(const ZonalFunction& f, const KernelParams& params, int r,
                                   EigenvalueCache* cache = nullptr) {
  detail::check_same_dimension(f, params);
  return apply_multiplier(f, multiplier_sequence(params, r, f.max_degree(), cache));
}

/// The same Boolean sum assembled as -sum_{i=1}^r (-1)^i C(r, i) J_{k,s}^i f,
/// composing the Jackson operator i times.
inline ZonalFunction boolean_apply_by_composition(const ZonalFunction& f,
                                                  const KernelParams& params, int r,
                                                  EigenvalueCache* cache = nullptr) {
  if (r < 1) throw std::invalid_argument("Boolean sum order r must be at least 1");
  detail::check_same_dimension(f, params);
  const auto jackson = multiplier_sequence(params, 1, f.max_degree(), cache);
  std::vector<double> sum(f.coeffs().size(), 0.0);
  ZonalFunction power = f;
  double binom = 1.0;
  for (int i = 1; i <= r; ++i) {
    power = apply_multiplier(power, jackson);
    binom = binom * (r - i + 1) / i;
    const double sign = (i % 2 == 0) ? -1.0 : 1.0;
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += sign * binom * power.coeffs()[j];
  }
  return ZonalFunction(f.n(), std::move(sum));
}

/// Coefficientwise f - g; both must live on the same sphere.
inline ZonalFunction subtract(const ZonalFunction& f, const ZonalFunction& g) {
  if (f.n() != g.n()) throw dimension_mismatch("cannot subtract functions on different spheres");
  std::vector<double> out(std::max(f.coeffs().size(), g.coeffs().size()), 0.0);
  for (std::size_t j = 0; j < f.coeffs().size(); ++j) out[j] += f.coeffs()[j];
  for (std::size_t j = 0; j < g.coeffs().size(); ++j) out[j] -= g.coeffs()[j];
  return ZonalFunction(f.n(), std::move(out));
}

/// ||(Boolean sum) f - f||_p, computed from the gaps as -(1 - eta)^r a_j.
inline double boolean_error(const ZonalFunction& f, const KernelParams& params, int r,
                            NormOrder p, EigenvalueCache* cache = nullptr) {
  detail::check_same_dimension(f, params);
  std::shared_ptr<const std::vector<double>> gaps =
      cache ? cache->gaps(params, f.max_degree())
            : std::make_shared<const std::vector<double>>(eigenvalue_gaps(params, f.max_degree()));
  std::vector<double> out(f.coeffs().size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = -std::pow((*gaps)[j], r) * f.coeffs()[j];
  return lp_norm(ZonalFunction(f.n(), std::move(out)), p);
}

/// Steps at which the modulus of smoothness samples ||Delta_theta^r f||_p:
/// the fixed lattice theta = 2^{-i/12} restricted to [floor, t], where the
/// floor 2^{-6} / (J + 1) depends on f only. Lattices for t1 <= t2 nest,
/// which makes the modulus nondecreasing in t, and every dyadic t is a
/// lattice point.
inline std::vector<double> modulus_steps(const ZonalFunction& f, double t) {
  if (!(t > 0.0 && t < std::numbers::pi)) {
    throw std::domain_error("modulus scale t = " + std::to_string(t) + " lies outside (0, pi)");
  }
  constexpr int per_octave = 12;
  const double floor_step = std::ldexp(1.0, -6) / (f.max_degree() + 1);
  std::vector<double> steps;
  // Largest lattice index whose point is <= t; guard against rounding at dyadic t.
  int i = static_cast<int>(std::ceil(-per_octave * std::log2(t) - 1e-9));
  for (;; ++i) {
    const double theta = std::exp2(-static_cast<double>(i) / per_octave);
    if (theta > t * (1.0 + 1e-12)) continue;
    if (theta < floor_step) break;
    steps.push_back(std::min(theta, t));
  }
  if (steps.empty()) steps.push_back(t);
  return steps;
}

/// omega^{2r}(f, t)_p = sup over the step lattice of ||Delta_theta^r f||_p.
inline double modulus_of_smoothness(const ZonalFunction& f, double t, int r, NormOrder p) {
  if (r < 1) throw std::invalid_argument("difference order r must be at least 1");
  double best = 0.0;
  if (f.is_constant()) return 0.0;
  for (const double theta : modulus_steps(f, t)) {
    best = std::max(best, lp_norm(spherical_difference(f, theta, r), p));
  }
  return best;
}

/// One candidate g for the K-functional: ||f - g||_p and ||Lap^r g||_p.
struct KCandidate {
  std::string label;
  double distance = 0.0;
  double smoothness = 0.0;
};

/// The candidate family used to bound K_{2r}(f, Lap, t^{2r})_p from above:
/// spectral truncations T_N f for N = 0..J and Boolean sums of Jackson
/// operators of degree m = 1, 2, 4, ... up to 8 (J + 1).
inline std::vector<KCandidate> k_functional_candidates(const ZonalFunction& f, int r, NormOrder p,
                                                       int s, EigenvalueCache* cache = nullptr) {
  if (r < 1) throw std::invalid_argument("K-functional order r must be at least 1");
  std::vector<KCandidate> out;
  const int J = f.max_degree();
  const auto lap = laplace_multipliers(f.n(), r, J);
  for (int N = 0; N <= J; ++N) {
    std::vector<double> tail(f.coeffs().begin(), f.coeffs().end());
    std::vector<double> head(tail.size(), 0.0);
    for (int j = 0; j <= N; ++j) {
      const auto u = static_cast<std::size_t>(j);
      head[u] = lap.values[u] * tail[u];
      tail[u] = 0.0;
    }
    out.push_back({"truncation N=" + std::to_string(N),
                   lp_norm(ZonalFunction(f.n(), std::move(tail)), p),
                   lp_norm(ZonalFunction(f.n(), std::move(head)), p)});
  }
  for (int m = 1; m <= 8 * (J + 1); m *= 2) {
    const auto params = make_params(m, s, f.n());
    const auto g = boolean_apply(f, params, r, cache);
    out.push_back({"boolean m=" + std::to_string(m), lp_norm(subtract(f, g), p),
                   lp_norm(laplace_beltrami_power(g, r), p)});
  }
  return out;
}

/// min over candidates of distance + t^{2r} smoothness.
inline double k_functional_from(const std::vector<KCandidate>& candidates, double t, int r) {
  double best = std::numeric_limits<double>::infinity();
  const double weight = std::pow(t, 2 * r);
  for (const auto& c : candidates) best = std::min(best, c.distance + weight * c.smoothness);
  return best;
}

/// An upper bound on K_{2r}(f, Lap, t^{2r})_p over the candidate family.
inline double k_functional_upper(const ZonalFunction& f, double t, int r, NormOrder p, int s = 2,
                                 EigenvalueCache* cache = nullptr) {
  if (!(t > 0.0 && t < std::numbers::pi)) {
    throw std::domain_error("K-functional scale t = " + std::to_string(t) + " lies outside (0, pi)");
  }
  return k_functional_from(k_functional_candidates(f, r, p, s, cache), t, r);
}

// Plain text format: "n J" on the first line, the J + 1 coefficients on the second.

inline void write_zonal(std::ostream& out, const ZonalFunction& f) {
  out << f.n() << ' ' << f.max_degree() << '\n';
  out.precision(17);
  for (std::size_t j = 0; j < f.coeffs().size(); ++j) {
    if (j) out << ' ';
    out << f.coeffs()[j];
  }
  out << '\n';
}

inline ZonalFunction read_zonal(std::istream& in) {
  int n = 0;
  int J = -1;
  if (!(in >> n >> J)) throw std::runtime_error("zonal file: expected header \"n J\"");
  if (J < 0) throw std::runtime_error("zonal file: negative degree J");
  if (J > kMaxDegree) throw std::runtime_error("zonal file: degree J exceeds the cap");
  std::vector<double> coeffs(static_cast<std::size_t>(J) + 1);
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    if (!(in >> coeffs[j])) {
      throw std::runtime_error("zonal file: expected " + std::to_string(J + 1) +
                               " coefficients, read " + std::to_string(j));
    }
  }
  double extra = 0.0;
  if (in >> extra) throw std::runtime_error("zonal file: trailing data after the coefficients");
  return ZonalFunction(n, std::move(coeffs));
}

// Named test families.

/// a_j = (1 + j)^{-alpha}, j = 0..J.
inline ZonalFunction power_family(double alpha, int J, int n = 3) {
  detail::check_degree(J);
  std::vector<double> a(static_cast<std::size_t>(J) + 1);
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = std::pow(1.0 + static_cast<double>(j), -alpha);
  return ZonalFunction(n, std::move(a));
}

inline ZonalFunction smooth_family(double alpha, int J = 64, int n = 3) {
  return power_family(alpha, J, n);
}

inline ZonalFunction rough_family(double alpha, int J = 64, int n = 3) {
  return power_family(alpha, J, n);
}

/// Single harmonic P_{j0}.
inline ZonalFunction single_family(int j0, int n = 3) {
  detail::check_degree(j0);
  std::vector<double> a(static_cast<std::size_t>(j0) + 1, 0.0);
  a.back() = 1.0;
  return ZonalFunction(n, std::move(a));
}

inline ZonalFunction constant_family(double c, int n = 3) { return ZonalFunction(n, {c}); }

}  // namespace spherejack
