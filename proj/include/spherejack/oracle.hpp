#pragma once

// Definition-level computations on S^2 that bypass the multiplier path:
// surface convolution with the Jackson kernel, circle averages for the
// translation operator, and a finite-difference Laplace-Beltrami operator.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "spherejack/kernel.hpp"
#include "spherejack/quadrature.hpp"
#include "spherejack/zonal.hpp"

namespace spherejack::oracle {

/// Product grid on S^2: Gauss-Legendre in cos(theta), uniform in phi.
struct SphereGrid {
  std::vector<double> cos_theta;
  std::vector<double> theta_weights;  // sum to 2
  std::vector<double> phi;
  double phi_weight = 0.0;  // 2 pi / n_phi

  int n_theta() const noexcept { return static_cast<int>(cos_theta.size()); }
  int n_phi() const noexcept { return static_cast<int>(phi.size()); }

  double total_weight() const noexcept {
    double sum = 0.0;
    for (double w : theta_weights) sum += w;
    return sum * phi_weight * static_cast<double>(phi.size());
  }
};

inline SphereGrid make_sphere_grid(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1) throw std::invalid_argument("sphere grid needs positive counts");
  const auto ref = spherejack::detail::cached_reference(n_theta);
  SphereGrid grid;
  grid.cos_theta = ref->first;
  grid.theta_weights = ref->second;
  grid.phi.resize(static_cast<std::size_t>(n_phi));
  for (int m = 0; m < n_phi; ++m) {
    grid.phi[static_cast<std::size_t>(m)] = 2.0 * std::numbers::pi * m / n_phi;
  }
  grid.phi_weight = 2.0 * std::numbers::pi / n_phi;
  return grid;
}

namespace detail {

inline void require_two_sphere(int n) {
  if (n != 3) {
    throw unsupported_dimension("the direct oracle works on S^2 only (n = 3), got n = " +
                                std::to_string(n));
  }
}

}  // namespace detail

/// Grid size that integrates kernel times f exactly on S^2.
inline int required_resolution(const ZonalFunction& f, const KernelParams& params) {
  return 2 * (params.s * params.k + f.max_degree()) + 16;
}

/// J_{k,s} f at the point with colatitude x_colatitude (azimuth 0):
/// |S^1|^{-1} sum over the grid of f(y) D_{k,s}(arccos x . y).
inline double convolve_direct(const ZonalFunction& f, const KernelParams& params,
                              double x_colatitude, const SphereGrid& grid) {
  detail::require_two_sphere(f.n());
  detail::require_two_sphere(params.n);
  const int need = required_resolution(f, params);
  if (grid.n_theta() < need || grid.n_phi() < need) {
    throw resolution_error("sphere grid " + std::to_string(grid.n_theta()) + " x " +
                               std::to_string(grid.n_phi()) + " is too coarse; use at least " +
                               std::to_string(need) + " nodes per direction",
                           need);
  }
  const double sx = std::sin(x_colatitude);
  const double cx = std::cos(x_colatitude);
  double sum = 0.0;
  for (int i = 0; i < grid.n_theta(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const double ct = grid.cos_theta[u];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    const double fy = evaluate_at_cos(f, ct);
    double ring = 0.0;
    for (const double phi : grid.phi) {
      const double dot = std::clamp(sx * st * std::cos(phi) + cx * ct, -1.0, 1.0);
      ring += jackson_power(std::acos(dot), params.k, params.s);
    }
    sum += grid.theta_weights[u] * fy * ring;
  }
  return sum * grid.phi_weight / (params.norm_constant * 2.0 * std::numbers::pi);
}

/// S_theta f at colatitude x_colatitude as the mean of f over the circle of
/// angular radius theta around x. n_phi = 0 picks 2 J + 32 points, which is
/// exact for a degree-J profile.
inline double translate_direct(const ZonalFunction& f, double theta, double x_colatitude,
                               int n_phi = 0) {
  detail::require_two_sphere(f.n());
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
    throw std::domain_error("translation angle theta = " + std::to_string(theta) +
                            " lies outside [0, pi]");
  }
  if (n_phi <= 0) n_phi = 2 * f.max_degree() + 32;
  const double cb = std::cos(x_colatitude);
  const double sb = std::sin(x_colatitude);
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  double sum = 0.0;
  for (int m = 0; m < n_phi; ++m) {
    const double phi = 2.0 * std::numbers::pi * m / n_phi;
    // z-component of cos(theta) x + sin(theta) (cos(phi) u + sin(phi) v),
    // u = (cos b, 0, -sin b), v = (0, 1, 0).
    sum += evaluate_at_cos(f, ct * cb - st * std::cos(phi) * sb);
  }
  return sum / n_phi;
}

/// g''(theta) + (n - 2) cot(theta) g'(theta) by fourth-order central
/// differences on the stencil theta + {-2, -1, 0, 1, 2} h.
inline double laplacian_radial_fd(const ZonalFunction& f, double theta, double h = 1e-4) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  if (!(theta > 2.0 * h && theta < std::numbers::pi - 2.0 * h)) {
    throw std::domain_error("theta = " + std::to_string(theta) +
                            " is too close to a pole for the finite-difference stencil");
  }
  const double gm2 = evaluate(f, theta - 2.0 * h);
  const double gm1 = evaluate(f, theta - h);
  const double g0 = evaluate(f, theta);
  const double gp1 = evaluate(f, theta + h);
  const double gp2 = evaluate(f, theta + 2.0 * h);
  const double second = (-gp2 + 16.0 * gp1 - 30.0 * g0 + 16.0 * gm1 - gm2) / (12.0 * h * h);
  const double first = (-gp2 + 8.0 * gp1 - 8.0 * gm1 + gm2) / (12.0 * h);
  return second + (f.n() - 2) * first / std::tan(theta);
}

}  // namespace spherejack::oracle
