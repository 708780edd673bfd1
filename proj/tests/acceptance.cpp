// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// here and never adjusted to the measured values.
//
//   acceptance                 run every criterion
//   acceptance --criterion N   run criterion N only
//
// Exit status is 0 when every selected criterion passes, 1 otherwise.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "spherejack/spherejack.hpp"

using namespace spherejack;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << " [miss: " << what << "] ";
    }
  }
};

std::string num(double v) { return detail::fmt_num(v); }

std::string short_num(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

std::vector<int> dyadic(int from, int to) {
  std::vector<int> out;
  for (int k = from; k <= to; k *= 2) out.push_back(k);
  return out;
}

RateFit fit_over(const std::vector<int>& xs, const std::vector<double>& ys) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < xs.size(); ++i) pts.emplace_back(xs[i], ys[i]);
  return fit_rate(pts);
}

ZonalFunction random_function(std::mt19937& rng, int n, int J) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::vector<double> a(static_cast<std::size_t>(J) + 1);
  for (auto& x : a) x = coeff(rng);
  return ZonalFunction(n, std::move(a));
}

std::string norm_label(const NormOrder& p) { return "p=" + p.label(); }

const std::vector<NormOrder> kNorms{NormOrder(1.0), NormOrder(2.0), NormOrder::infinity()};

EigenvalueCache& shared_cache() {
  static EigenvalueCache cache;
  return cache;
}

// 1. Unit mass of the kernel.
void normalization(Outcome& out) {
  constexpr double tol = 1e-10;
  double worst = 0.0;
  for (int n : {3, 4, 5})
    for (int s = 1; s <= 4; ++s)
      for (int k : dyadic(1, 64)) {
        worst = std::max(worst, std::abs(moment(0.0, pi, make_params(k, s, n)).value - 1.0));
      }
  out.detail << "max |mass - 1| = " << num(worst) << " (tol " << tol << ")";
  out.require(worst <= tol, "mass");
}

// 2. eta_{2,1}(1) on S^2.
//   (sin(t) / sin(t/2))^2 = 4 cos^2(t/2) = 2 (1 + cos t)
//   A = int_0^pi 2 (1 + cos t) sin t dt = 4
//   eta(1) = A^{-1} int_0^pi 2 (1 + cos t) cos t sin t dt = (1/2) int_{-1}^{1} (1 + u) u du = 1/3
void closed_form_eigenvalue(Outcome& out) {
  constexpr double tol = 1e-10;
  const double eta = eigenvalue(1, make_params(2, 1, 3));
  const double dev = std::abs(eta - 1.0 / 3.0);
  out.detail << "eta = " << num(eta) << ", |eta - 1/3| = " << num(dev) << " (tol " << tol << ")";
  out.require(dev <= tol, "eta");
}

// 3. Multiplier path against definition-level computations on S^2.
void oracle_equivalence(Outcome& out) {
  constexpr double conv_tol = 1e-6;
  constexpr double trans_tol = 1e-6;
  constexpr double lap_tol = 1e-5;
  std::mt19937 rng(20240601);
  std::vector<ZonalFunction> family{smooth_family(3.0, 10), smooth_family(5.0, 10)};
  for (int j0 : {0, 1, 4, 10}) family.push_back(single_family(j0));
  for (int i = 0; i < 4; ++i) family.push_back(random_function(rng, 3, 10));
  const std::vector<double> points{0.0, 0.25, 0.8, 1.3, 1.9, 2.6, pi};

  double conv = 0.0, trans = 0.0, lap = 0.0;
  for (const auto& f : family) {
    for (int k = 1; k <= 8; ++k) {
      const auto params = make_params(k, 2, 3);
      const int need = oracle::required_resolution(f, params);
      const auto grid = oracle::make_sphere_grid(need, need);
      const auto fast = jackson_apply(f, params);
      for (double x : points) {
        conv = std::max(conv, std::abs(oracle::convolve_direct(f, params, x, grid) - evaluate(fast, x)));
      }
    }
    for (double theta : {0.05, 0.5, 1.5, 3.0}) {
      const auto moved = translate(f, theta);
      for (double x : points) {
        trans = std::max(trans, std::abs(oracle::translate_direct(f, theta, x) - evaluate(moved, x)));
      }
    }
    const auto exact = laplace_beltrami_power(f, 1);
    for (int i = 0; i < 20; ++i) {
      const double theta = 0.05 + (pi - 0.1) * (i + 0.5) / 20.0;
      lap = std::max(lap, std::abs(oracle::laplacian_radial_fd(f, theta) - evaluate(exact, theta)));
    }
  }
  out.detail << "convolution " << num(conv) << " (tol " << conv_tol << "), circle average " << num(trans)
             << " (tol " << trans_tol << "), Laplacian " << num(lap) << " (tol " << lap_tol << ")";
  out.require(conv <= conv_tol, "convolution");
  out.require(trans <= trans_tol, "circle average");
  out.require(lap <= lap_tol, "Laplacian");
}

// 4. Moment rates k^{-beta}.
void moment_rates(Outcome& out) {
  constexpr double slope_tol = 0.1;
  constexpr double r2_min = 0.999;
  const auto ks = dyadic(8, 256);
  for (double beta : {1.0, 2.0, 3.0}) {
    std::vector<double> ys;
    for (int k : ks) ys.push_back(moment(beta, pi, make_params(k, 2, 3)).value);
    const auto fit = fit_over(ks, ys);
    out.detail << "beta=" << beta << ": slope " << short_num(fit.slope) << ", R^2 " << short_num(fit.r_squared)
               << "; ";
    out.require(std::abs(fit.slope + beta) <= slope_tol, "slope beta=" + short_num(beta));
    out.require(fit.r_squared >= r2_min, "R^2 beta=" + short_num(beta));
  }
  out.detail << "(target -beta +/- " << slope_tol << ", R^2 >= " << r2_min << ")";
}

// 5. 1 - eta_{k,s}(1) decays like k^{-2} whenever 2s >= n.
void first_eigenvalue_rate(Outcome& out) {
  constexpr double slope_tol = 0.05;
  const auto ks = dyadic(8, 256);
  for (int n : {3, 4, 5}) {
    for (int s = 2; s <= 4; ++s) {
      if (2 * s < n) continue;
      std::vector<double> ys;
      for (int k : ks) ys.push_back(eigenvalue_gaps(make_params(k, s, n), 1)[1]);
      const auto fit = fit_over(ks, ys);
      out.detail << "(s=" << s << ",n=" << n << ") " << short_num(fit.slope) << "; ";
      out.require(std::abs(fit.slope + 2.0) <= slope_tol, "s=" + std::to_string(s) + " n=" + std::to_string(n));
    }
  }
  out.detail << "(target -2 +/- " << slope_tol << ")";
}

// 6. (1 - eta_k(j)) / (1 - eta_k(1)) against j (j + 2 lambda) / (2 lambda + 1).
void ratio_limit(Outcome& out) {
  constexpr double tol = 0.02;
  const auto params = make_params(512, 2, 3);
  const auto gaps = eigenvalue_gaps(params, 8);
  double worst = 0.0;
  for (int j = 2; j <= 8; ++j) {
    const double target = j * (j + 2.0 * params.lambda) / (2.0 * params.lambda + 1.0);
    const double dev = std::abs(gaps[static_cast<std::size_t>(j)] / gaps[1] / target - 1.0);
    out.detail << "j=" << j << ": " << short_num(100 * dev) << "%; ";
    worst = std::max(worst, dev);
  }
  out.detail << "max " << short_num(100 * worst) << "% (tol " << 100 * tol << "%)";
  out.require(worst <= tol, "deviation");
}

// 7. Saturation order k^{-2r}; constants reproduced exactly.
void saturation(Outcome& out) {
  constexpr double slope_tol = 0.1;
  constexpr double const_tol = 1e-14;
  const auto ks = dyadic(8, 256);
  const auto f = smooth_family(5.0, 64);
  const NormOrder p2(2.0);
  for (int r = 1; r <= 3; ++r) {
    std::vector<double> ys;
    for (int k : ks) ys.push_back(boolean_error(f, make_params(k, 2, 3), r, p2, &shared_cache()));
    const auto fit = fit_over(ks, ys);
    out.detail << "r=" << r << ": slope " << short_num(fit.slope) << "; ";
    out.require(std::abs(fit.slope + 2.0 * r) <= slope_tol, "slope r=" + std::to_string(r));
  }
  double worst = 0.0;
  for (double c : {1.0, -2.5, 1e3})
    for (int r = 1; r <= 3; ++r)
      for (int k : ks) worst = std::max(worst, boolean_error(constant_family(c), make_params(k, 2, 3), r, p2));
  out.detail << "constant f: max error " << num(worst) << " (target -2r +/- " << slope_tol << ", constants <= "
             << const_tol << ")";
  out.require(worst <= const_tol, "constants");
}

struct TheoremCase {
  std::string name;
  ZonalFunction f;
};

std::vector<TheoremCase> theorem_family() {
  return {{"SMOOTH(3,64)", smooth_family(3.0, 64)}, {"ROUGH(1.6,128)", rough_family(1.6, 128)}};
}

// 8. Direct estimate: error / omega^{2r}(f, 1/k) bounded with flat trend.
void direct_theorem(Outcome& out) {
  constexpr double slope_tol = 0.1;
  const auto ks = dyadic(4, 256);
  double cmax = 0.0;
  for (const auto& [name, f] : theorem_family()) {
    for (const auto& p : kNorms) {
      for (int r : {1, 2}) {
        std::vector<double> ratios;
        bool finite = true;
        for (int k : ks) {
          const double err = boolean_error(f, make_params(k, 2, 3), r, p, &shared_cache());
          const double om = modulus_of_smoothness(f, 1.0 / k, r, p);
          const double ratio = err / om;
          finite = finite && std::isfinite(ratio) && ratio > 0.0;
          ratios.push_back(ratio);
          cmax = std::max(cmax, ratio);
        }
        const std::string tag = name + " " + norm_label(p) + " r=" + std::to_string(r);
        out.require(finite, tag + " finite");
        if (!finite) continue;
        const auto fit = fit_over(ks, ratios);
        out.detail << tag << ": slope " << short_num(fit.slope) << "; ";
        out.require(std::abs(fit.slope) <= slope_tol, tag);
      }
    }
  }
  out.detail << "empirical C = " << short_num(cmax) << " (target slope 0 +/- " << slope_tol << ")";
}

// 9. Inverse estimate: omega^{2r}(f, 1/k) / max_{k <= v <= 4k} error_v, flat trend.
void inverse_theorem(Outcome& out) {
  constexpr double slope_tol = 0.15;
  const auto ks = dyadic(4, 256);
  double cmax = 0.0;
  for (const auto& [name, f] : theorem_family()) {
    for (const auto& p : kNorms) {
      for (int r : {1, 2}) {
        std::map<int, double> err_at;
        auto error = [&](int v) {
          auto it = err_at.find(v);
          if (it == err_at.end()) {
            it = err_at.emplace(v, boolean_error(f, make_params(v, 2, 3), r, p, &shared_cache())).first;
          }
          return it->second;
        };
        std::vector<double> ratios;
        bool finite = true;
        for (int k : ks) {
          double worst = 0.0;
          for (int v = k; v <= 4 * k; ++v) worst = std::max(worst, error(v));
          const double ratio = modulus_of_smoothness(f, 1.0 / k, r, p) / worst;
          finite = finite && std::isfinite(ratio) && ratio > 0.0;
          ratios.push_back(ratio);
          cmax = std::max(cmax, ratio);
        }
        const std::string tag = name + " " + norm_label(p) + " r=" + std::to_string(r);
        out.require(finite, tag + " finite");
        if (!finite) continue;
        const auto fit = fit_over(ks, ratios);
        out.detail << tag << ": slope " << short_num(fit.slope) << "; ";
        out.require(std::abs(fit.slope) <= slope_tol, tag);
      }
    }
  }
  out.detail << "empirical C = " << short_num(cmax) << " (target slope 0 +/- " << slope_tol << ")";
}

// 10. ||Boolean sum f|| <= 2^u ||f||, and a Bernstein constant that is stable in k.
void operator_bounds(Outcome& out) {
  constexpr double slack = 1e-9;
  constexpr double stability = 4.0;
  std::mt19937 rng(424242);
  std::uniform_int_distribution<int> kdist(2, 40);
  std::uniform_int_distribution<int> ndist(3, 5);
  double worst_contraction = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = ndist(rng);
    const auto f = random_function(rng, n, 24);
    const auto params = make_params(kdist(rng), 2, n);
    for (int u = 1; u <= 3; ++u)
      for (const auto& p : kNorms) {
        const double ratio = lp_norm(boolean_apply(f, params, u), p) / (std::pow(2.0, u) * lp_norm(f, p));
        worst_contraction = std::max(worst_contraction, ratio);
      }
  }
  out.detail << "max ||B f|| / (2^u ||f||) = " << short_num(worst_contraction) << " (<= 1 + " << slack << "); ";
  out.require(worst_contraction <= 1.0 + slack, "contraction");

  // Bernstein: ||Lap^r B_u f|| <= C (s(k-1))^{2r} ||f||. The constant for a
  // given k is estimated as the worst ratio over zonal harmonics P_j, j <= s(k-1).
  double widest = 0.0;
  for (int u = 1; u <= 3; ++u)
    for (int r = 1; r <= 2; ++r)
      for (const auto& p : kNorms) {
        std::vector<double> constants;
        for (int k : dyadic(4, 64)) {
          const auto params = make_params(k, 2, 3);
          const int deg = params.degree();
          double worst = 0.0;
          for (int j = 1; j <= deg; j += std::max(1, deg / 16)) {
            const auto f = single_family(j);
            const double lhs = lp_norm(laplace_beltrami_power(boolean_apply(f, params, u), r), p);
            worst = std::max(worst, lhs / (std::pow(deg, 2.0 * r) * lp_norm(f, p)));
          }
          constants.push_back(worst);
        }
        const auto [lo, hi] = std::minmax_element(constants.begin(), constants.end());
        widest = std::max(widest, *hi / *lo);
        out.require(*lo > 0.0 && *hi / *lo <= stability,
                    "Bernstein u=" + std::to_string(u) + " r=" + std::to_string(r) + " " + norm_label(p));
      }
  out.detail << "widest Bernstein constant spread over k = 4..64: " << short_num(widest) << " (<= " << stability
             << ")";
}

// 11. Algebraic identities, coefficient by coefficient.
void algebraic_identities(Outcome& out) {
  constexpr double tol = 1e-12;
  std::mt19937 rng(777);
  double expansion = 0.0, commutation = 0.0, difference = 0.0;
  for (int n : {3, 4, 5}) {
    const auto f = random_function(rng, n, 32);
    for (int k : {2, 7, 16, 40}) {
      const auto params = make_params(k, 2, n);
      for (int r = 1; r <= 4; ++r) {
        const auto closed = boolean_apply(f, params, r);
        const auto composed = boolean_apply_by_composition(f, params, r);
        const auto a = laplace_beltrami_power(closed, r);
        const auto b = boolean_apply(laplace_beltrami_power(f, r), params, r);
        for (int j = 0; j <= f.max_degree(); ++j) {
          expansion = std::max(expansion, std::abs(closed.coeff(j) - composed.coeff(j)));
          // Relative to the coefficient size: (j (j + 2 lambda))^r reaches 1e12.
          commutation =
              std::max(commutation, std::abs(a.coeff(j) - b.coeff(j)) / std::max(1.0, std::abs(a.coeff(j))));
        }
      }
    }
    for (double theta : {0.1, 0.6, 1.7, 3.0}) {
      for (int r = 1; r <= 4; ++r) {
        // sum_{i=0}^r (-1)^{r+i} C(r, i) S_theta^i f
        std::vector<double> sum(f.coeffs().size(), 0.0);
        ZonalFunction power = f;
        double binom = 1.0;
        for (int i = 0; i <= r; ++i) {
          if (i > 0) {
            power = translate(power, theta);
            binom = binom * (r - i + 1) / i;
          }
          const double sign = ((r + i) % 2 == 0) ? 1.0 : -1.0;
          for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += sign * binom * power.coeffs()[j];
        }
        const auto diff = spherical_difference(f, theta, r);
        for (int j = 0; j <= f.max_degree(); ++j) {
          difference = std::max(difference, std::abs(diff.coeff(j) - sum[static_cast<std::size_t>(j)]));
        }
      }
    }
  }
  out.detail << "closed form vs expansion " << num(expansion) << ", commutation " << num(commutation)
             << " (relative), difference vs expansion " << num(difference) << " (tol " << tol << ")";
  out.require(expansion <= tol, "Boolean expansion");
  out.require(commutation <= tol, "commutation");
  out.require(difference <= tol, "difference expansion");
}

// 12. K_upper / omega stays in one band [c, C] over t in {2^-8, ..., 1}.
void equivalence_band(Outcome& out) {
  constexpr double width_max = 50.0;
  const std::vector<ZonalFunction> family{smooth_family(3.0, 64), smooth_family(5.0, 64), rough_family(1.2, 64),
                                          rough_family(1.6, 64)};
  for (const auto& p : kNorms) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& f : family) {
      for (int r : {1, 2}) {
        const auto candidates = k_functional_candidates(f, r, p, 2, &shared_cache());
        for (int m = 0; m <= 8; ++m) {
          const double t = std::ldexp(1.0, -m);
          const double ratio = k_functional_from(candidates, t, r) / modulus_of_smoothness(f, t, r, p);
          lo = std::min(lo, ratio);
          hi = std::max(hi, ratio);
        }
      }
    }
    out.detail << norm_label(p) << ": band [" << short_num(lo) << ", " << short_num(hi) << "], C/c "
               << short_num(hi / lo) << "; ";
    out.require(lo > 0.0 && hi / lo <= width_max, norm_label(p));
  }
  out.detail << "(C/c <= " << width_max << ")";
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

// 13. Identical deterministic configurations give identical bytes.
void determinism(Outcome& out) {
  const fs::path dir = fs::temp_directory_path() / ("spherejack_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::vector<std::string> runs{
      "multipliers --k 4:32 --r 2",
      "moments --beta 2",
      "ratio-limit --k 64:512",
      "direct --k 4:64 --f 'rough(1.6,128)' --p inf --r 2",
      "inverse --k 4:64 --f 'smooth(3,64)' --p 1 --diagnostics",
      "saturation --r 3",
      "equivalence --f 'rough(1.2,64)' --r 2",
      "oracle-check --k 2:8 --f 'smooth(3,10)'",
  };
  int compared = 0;
  for (const auto& args : runs) {
    for (const std::string fmt : {"csv", "json"}) {
      std::string first;
      for (int rep = 0; rep < 2; ++rep) {
        const auto file = dir / ("run" + std::to_string(rep) + "." + fmt);
        const std::string cmd = std::string(SPHEREJACK_CLI) + " " + args + " --deterministic --format " + fmt +
                                " --out " + file.string() + " >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        const bool ok = WIFEXITED(status) && WEXITSTATUS(status) == 0;
        out.require(ok, "'" + args + "' ran");
        const auto bytes = slurp(file);
        out.require(!bytes.empty(), "'" + args + "' wrote output");
        if (rep == 0) {
          first = bytes;
        } else {
          out.require(bytes == first, "'" + args + "' " + fmt + " identical");
          ++compared;
        }
      }
    }
  }
  fs::remove_all(dir);
  out.detail << compared << " CLI output pairs compared byte for byte";
}

struct Criterion {
  int id;
  std::string name;
  std::function<void(Outcome&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "kernel normalization", normalization},
      {2, "closed-form eigenvalue", closed_form_eigenvalue},
      {3, "oracle equivalence", oracle_equivalence},
      {4, "moment rates", moment_rates},
      {5, "first-eigenvalue rate", first_eigenvalue_rate},
      {6, "eigenvalue-ratio limit", ratio_limit},
      {7, "saturation order", saturation},
      {8, "direct estimate", direct_theorem},
      {9, "inverse estimate", inverse_theorem},
      {10, "operator bounds", operator_bounds},
      {11, "algebraic identities", algebraic_identities},
      {12, "omega-K equivalence band", equivalence_band},
      {13, "determinism", determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--criterion N]\n";
      return 2;
    }
  }
  bool all_passed = true;
  bool ran = false;
  for (const auto& c : criteria()) {
    if (only != 0 && c.id != only) continue;
    ran = true;
    Outcome outcome;
    try {
      c.run(outcome);
    } catch (const std::exception& e) {
      outcome.passed = false;
      outcome.detail << " [exception: " << e.what() << "]";
    }
    std::cout << (outcome.passed ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": "
              << outcome.detail.str() << std::endl;
    all_passed = all_passed && outcome.passed;
  }
  if (!ran) {
    std::cerr << "no criterion " << only << '\n';
    return 2;
  }
  return all_passed ? 0 : 1;
}
