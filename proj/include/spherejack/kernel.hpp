#pragma once

// The Jackson kernel D_{k,s}(theta) = A_{k,s}^{-1} (sin(k theta/2) / sin(theta/2))^{2s}
// on S^{n-1}, its moments, and the multipliers through which the Jackson
// operator J_{k,s} and its Boolean sums act on degree-j harmonics.

#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "spherejack/quadrature.hpp"
#include "spherejack/specfun.hpp"

namespace spherejack {

struct KernelParams {
  int k = 1;                   // kernel degree
  int s = 1;                   // kernel power
  int n = 3;                   // ambient dimension; the sphere is S^{n-1}
  double lambda = 0.5;         // (n - 2) / 2
  double norm_constant = 2.0;  // A_{k,s}
  bool direct_hypothesis = false;  // 2s >= n

  /// Polynomial degree s(k - 1) of the kernel in cos(theta); every
  /// multiplier vanishes above it.
  int degree() const noexcept { return s * (k - 1); }
};

/// (sin(k theta / 2) / sin(theta / 2))^{2s}, with the limit k^{2s} at theta = 0.
inline double jackson_power(double theta, int k, int s) {
  const double denom = std::sin(0.5 * theta);
  double ratio = static_cast<double>(k);
  if (denom != 0.0) ratio = std::sin(0.5 * k * theta) / denom;
  const double sq = ratio * ratio;
  double out = 1.0;
  for (int i = 0; i < s; ++i) out *= sq;
  return out;
}

namespace detail {

inline double sin_weight(double theta, double lambda) {
  return std::pow(std::sin(theta), 2.0 * lambda);
}

/// Gauss order that integrates the kernel times a degree-j harmonic to
/// spectral accuracy on (0, pi).
inline int kernel_rule_order(int k, int s, int j) { return s * k + j + 16; }

}  // namespace detail

/// Builds (k, s, n) and the normalization A_{k,s} = int_0^pi (sin(k t/2)/sin(t/2))^{2s} sin^{2 lambda} t dt.
inline KernelParams make_params(int k, int s, int n) {
  if (k < 1) throw std::invalid_argument("kernel degree k must be at least 1");
  if (s < 1) throw std::invalid_argument("kernel power s must be at least 1");
  check_sphere_dimension(n);
  KernelParams params;
  params.k = k;
  params.s = s;
  params.n = n;
  params.lambda = ultraspherical_index(n);
  params.direct_hypothesis = 2 * s >= n;
  const auto rule = gauss_rule(detail::kernel_rule_order(k, s, 16), 0.0, std::numbers::pi);
  const double lambda = params.lambda;
  params.norm_constant = integrate(
      [&](double t) { return jackson_power(t, k, s) * detail::sin_weight(t, lambda); }, rule);
  return params;
}

/// D_{k,s}(theta) for theta in [0, pi]; theta = 0 gives k^{2s} / A_{k,s}.
inline double kernel_eval(double theta, const KernelParams& params) {
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
    throw std::domain_error("kernel argument theta = " + std::to_string(theta) +
                            " lies outside [0, pi]");
  }
  return jackson_power(theta, params.k, params.s) / params.norm_constant;
}

struct MomentResult {
  double value = 0.0;
  // 2s >= beta + n - 2; the k^{-beta} rate is only claimed under it.
  bool hypothesis_satisfied = true;
  std::string warning;
};

/// int_0^gamma theta^beta D_{k,s}(theta) sin^{2 lambda}(theta) d theta.
/// Non-integer or negative beta uses a 48-level graded rule.
inline MomentResult moment(double beta, double gamma, const KernelParams& params) {
  if (!(beta >= -1.0)) throw std::invalid_argument("moment order beta must be >= -1");
  if (!(gamma > 0.0 && gamma <= std::numbers::pi)) {
    throw std::domain_error("moment upper limit gamma = " + std::to_string(gamma) +
                            " lies outside (0, pi]");
  }
  MomentResult result;
  result.hypothesis_satisfied = 2.0 * params.s >= beta + params.n - 2.0;
  if (!result.hypothesis_satisfied) {
    result.warning = "2s >= beta + n - 2 fails for s = " + std::to_string(params.s) +
                     ", n = " + std::to_string(params.n) + ", beta = " + std::to_string(beta);
  }
  const int k = params.k;
  const int s = params.s;
  const double lambda = params.lambda;
  auto integrand = [&](double t) {
    return std::pow(t, beta) * jackson_power(t, k, s) * detail::sin_weight(t, lambda);
  };
  const bool smooth = beta >= 0.0 && beta == std::floor(beta);
  const QuadratureRule rule =
      smooth ? gauss_rule(detail::kernel_rule_order(k, s, 16 + static_cast<int>(beta)), 0.0, gamma)
             : graded_rule(s * k / 2 + 32, 48, gamma);
  result.value = integrate(integrand, rule) / params.norm_constant;
  return result;
}

/// 1 - eta_{k,s}(j) = int_0^pi D_{k,s}(theta) (1 - P_j^n(cos theta)) sin^{2 lambda} theta d theta
/// for j = 0 .. max_degree, with Gauss order s k + max_degree + 16.
/// Integrating 1 - P_j directly keeps full relative accuracy when the
/// eigenvalue is close to 1.
inline std::vector<double> eigenvalue_gaps(const KernelParams& params, int max_degree) {
  detail::check_degree(max_degree);
  const auto rule =
      gauss_rule(detail::kernel_rule_order(params.k, params.s, max_degree), 0.0, std::numbers::pi);
  const auto size = static_cast<std::size_t>(max_degree) + 1;
  std::vector<double> gaps(size, 0.0);
  std::vector<double> pj(size);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double t = rule.nodes[i];
    const double w = rule.weights[i] * jackson_power(t, params.k, params.s) *
                     detail::sin_weight(t, params.lambda);
    legendre_pn_fill(params.lambda, std::cos(t), pj);
    for (std::size_t j = 1; j < size; ++j) gaps[j] += w * (1.0 - pj[j]);
  }
  for (auto& g : gaps) g /= params.norm_constant;
  return gaps;
}

/// eta_{k,s}(j), the eigenvalue of J_{k,s} on degree-j harmonics.
inline double eigenvalue(int j, const KernelParams& params) {
  return 1.0 - eigenvalue_gaps(params, j)[static_cast<std::size_t>(j)];
}

/// 1 - (1 - eta)^r from a precomputed gap 1 - eta.
inline double boolean_from_gap(double gap, int r) { return 1.0 - std::pow(gap, r); }

/// ^r xi_{k,s}(j) = 1 - (1 - eta_{k,s}(j))^r, the multiplier of the r-th Boolean sum.
inline double boolean_multiplier(int j, int r, const KernelParams& params) {
  if (r < 1) throw std::invalid_argument("Boolean sum order r must be at least 1");
  return boolean_from_gap(eigenvalue_gaps(params, j)[static_cast<std::size_t>(j)], r);
}

/// -sum_{i=1}^r (-1)^i C(r, i) eta^i, the expanded form of the Boolean multiplier.
inline double boolean_multiplier_expanded(double eta, int r) {
  double sum = 0.0;
  double binom = 1.0;
  double power = 1.0;
  for (int i = 1; i <= r; ++i) {
    binom = binom * (r - i + 1) / i;
    power *= eta;
    sum += ((i % 2 == 0) ? -1.0 : 1.0) * binom * power;
  }
  return sum;
}

struct MultiplierTag {
  enum class Kind { jackson, boolean_sum, translation, laplace_power, difference, custom };
  Kind kind = Kind::custom;
  int r = 0;
  double theta = 0.0;
};

/// Degree-indexed multipliers m(0..J) of a rotation-invariant operator.
struct MultiplierSequence {
  std::vector<double> values;
  int n = 0;  // dimension the values were built for; 0 means dimension-free
  MultiplierTag tag;

  int max_degree() const noexcept { return static_cast<int>(values.size()) - 1; }
};

/// Thread-safe memo of eigenvalue gaps keyed on (k, s, n) and the degree
/// rounded up to a multiple of 64. The bucketed key makes every lookup
/// independent of call order.
class EigenvalueCache {
 public:
  std::shared_ptr<const std::vector<double>> gaps(const KernelParams& params, int max_degree) {
    const int bucket = ((max_degree + 64) / 64) * 64;
    const Key key{params.k, params.s, params.n, bucket};
    {
      std::shared_lock lock(mutex_);
      if (auto it = table_.find(key); it != table_.end()) return it->second;
    }
    auto values = std::make_shared<const std::vector<double>>(eigenvalue_gaps(params, bucket));
    std::unique_lock lock(mutex_);
    return table_.try_emplace(key, std::move(values)).first->second;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return table_.size();
  }

 private:
  using Key = std::tuple<int, int, int, int>;
  mutable std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const std::vector<double>>> table_;
};

/// Multipliers ^r xi_{k,s}(j), j = 0 .. max_degree. r = 1 is tagged as the
/// plain Jackson operator.
inline MultiplierSequence multiplier_sequence(const KernelParams& params, int r, int max_degree,
                                              EigenvalueCache* cache = nullptr) {
  if (r < 1) throw std::invalid_argument("Boolean sum order r must be at least 1");
  detail::check_degree(max_degree);
  MultiplierSequence seq;
  seq.n = params.n;
  seq.tag.kind = r == 1 ? MultiplierTag::Kind::jackson : MultiplierTag::Kind::boolean_sum;
  seq.tag.r = r;
  seq.values.resize(static_cast<std::size_t>(max_degree) + 1);
  std::shared_ptr<const std::vector<double>> gaps =
      cache ? cache->gaps(params, max_degree)
            : std::make_shared<const std::vector<double>>(eigenvalue_gaps(params, max_degree));
  for (std::size_t j = 0; j < seq.values.size(); ++j) {
    seq.values[j] = boolean_from_gap((*gaps)[j], r);
  }
  return seq;
}

}  // namespace spherejack
