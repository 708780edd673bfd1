#pragma once

// Experiment runner: turns an ExperimentConfig into a RateReport, one table
// per subcommand, plus the pass/fail checks each experiment asserts.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "spherejack/kernel.hpp"
#include "spherejack/oracle.hpp"
#include "spherejack/rate.hpp"
#include "spherejack/zonal.hpp"

namespace spherejack {

/// Invalid experiment configuration; the CLI maps it to exit code 1.
class usage_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Subcommand {
  multipliers,
  moments,
  ratio_limit,
  direct,
  inverse,
  saturation,
  equivalence,
  oracle_check,
};

inline const std::vector<std::pair<std::string_view, Subcommand>>& subcommand_names() {
  static const std::vector<std::pair<std::string_view, Subcommand>> names{
      {"multipliers", Subcommand::multipliers}, {"moments", Subcommand::moments},
      {"ratio-limit", Subcommand::ratio_limit}, {"direct", Subcommand::direct},
      {"inverse", Subcommand::inverse},         {"saturation", Subcommand::saturation},
      {"equivalence", Subcommand::equivalence}, {"oracle-check", Subcommand::oracle_check},
  };
  return names;
}

inline std::string_view to_string(Subcommand c) {
  for (const auto& [name, value] : subcommand_names()) {
    if (value == c) return name;
  }
  return "?";
}

inline Subcommand parse_subcommand(std::string_view text) {
  for (const auto& [name, value] : subcommand_names()) {
    if (name == text) return value;
  }
  throw usage_error("unknown subcommand '" + std::string(text) + "'");
}

/// Geometric sweep start, start * factor, ... <= stop.
struct Sweep {
  double start = 1.0;
  double stop = 1.0;
  double factor = 2.0;

  std::vector<double> values() const {
    std::vector<double> out;
    if (!(start > 0.0) || !(stop >= start)) return out;
    if (!(factor > 1.0)) {
      out.push_back(start);
      return out;
    }
    for (int m = 0; m < 10000; ++m) {
      const double v = start * std::pow(factor, m);
      if (v > stop * (1.0 + 1e-12)) break;
      out.push_back(v);
    }
    return out;
  }

  std::vector<int> integer_values() const {
    std::vector<int> out;
    for (double v : values()) {
      const int k = static_cast<int>(std::lround(v));
      if (out.empty() || out.back() != k) out.push_back(k);
    }
    return out;
  }
};

/// Reals: "0.25", "1/256", "2^-8".
inline double parse_real(std::string_view text) {
  const std::string s(text);
  auto whole = [&](const std::string& part) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      throw usage_error("cannot parse number '" + s + "'");
    }
    if (used != part.size()) throw usage_error("cannot parse number '" + s + "'");
    return v;
  };
  if (auto caret = s.find('^'); caret != std::string::npos) {
    return std::pow(whole(s.substr(0, caret)), whole(s.substr(caret + 1)));
  }
  if (auto slash = s.find('/'); slash != std::string::npos) {
    const double den = whole(s.substr(slash + 1));
    if (den == 0.0) throw usage_error("division by zero in '" + s + "'");
    return whole(s.substr(0, slash)) / den;
  }
  return whole(s);
}

/// "START:STOP:xFACTOR", "START:STOP" (factor 2) or a single "VALUE".
inline Sweep parse_sweep(std::string_view text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  Sweep sweep;
  if (parts.size() == 1) {
    sweep.start = sweep.stop = parse_real(parts[0]);
  } else if (parts.size() == 2 || parts.size() == 3) {
    sweep.start = parse_real(parts[0]);
    sweep.stop = parse_real(parts[1]);
    if (parts.size() == 3) {
      std::string_view step = parts[2];
      if (!step.empty() && (step.front() == 'x' || step.front() == '*')) step.remove_prefix(1);
      sweep.factor = parse_real(step);
      if (!(sweep.factor > 1.0)) throw usage_error("sweep factor must exceed 1 in '" + std::string(text) + "'");
    }
  } else {
    throw usage_error("sweep '" + std::string(text) + "' is not START:STOP:xFACTOR");
  }
  if (!(sweep.start > 0.0) || sweep.stop < sweep.start) {
    throw usage_error("sweep '" + std::string(text) + "' is empty");
  }
  return sweep;
}

inline NormOrder parse_norm_order(std::string_view text) {
  if (text == "inf" || text == "infinity") return NormOrder::infinity();
  const double p = parse_real(text);
  if (!(p >= 1.0)) throw usage_error("norm order p must be >= 1 or inf");
  return NormOrder(p);
}

/// Test function: a named family with arguments, or a coefficient file.
struct FunctionSpec {
  std::string family = "smooth";
  std::vector<double> args{5.0, 64.0};
  std::string path;

  std::string text() const {
    if (!path.empty()) return "file:" + path;
    std::string out = family + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) out += ",";
      std::ostringstream num;
      num << args[i];
      out += num.str();
    }
    return out + ")";
  }
};

inline FunctionSpec parse_function_spec(std::string_view text) {
  FunctionSpec spec;
  if (text.starts_with("file:")) {
    spec.family.clear();
    spec.args.clear();
    spec.path = std::string(text.substr(5));
    if (spec.path.empty()) throw usage_error("file: needs a path");
    return spec;
  }
  const auto open = text.find('(');
  std::string name(text.substr(0, open));
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (name == "const") name = "constant";
  spec.family = name;
  spec.args.clear();
  if (open != std::string_view::npos) {
    if (text.back() != ')') throw usage_error("function spec '" + std::string(text) + "' lacks ')'");
    std::string inner(text.substr(open + 1, text.size() - open - 2));
    std::string cur;
    for (char c : inner + ",") {
      if (c == ',') {
        if (!cur.empty()) spec.args.push_back(parse_real(cur));
        cur.clear();
      } else if (c != ' ') {
        cur += c;
      }
    }
  }
  const std::set<std::string> known{"smooth", "rough", "single", "constant"};
  if (!known.count(spec.family)) throw usage_error("unknown function family '" + spec.family + "'");
  return spec;
}

inline ZonalFunction make_function(const FunctionSpec& spec, int n) {
  if (!spec.path.empty()) {
    std::ifstream in(spec.path);
    if (!in) throw usage_error("cannot open function file '" + spec.path + "'");
    ZonalFunction f = [&] {
      try {
        return read_zonal(in);
      } catch (const std::exception& e) {
        throw usage_error(std::string(e.what()) + " in '" + spec.path + "'");
      }
    }();
    if (f.n() != n) {
      throw usage_error("function file is on n = " + std::to_string(f.n()) +
                        " but the experiment uses n = " + std::to_string(n));
    }
    return f;
  }
  const auto& a = spec.args;
  auto degree = [&](std::size_t i, int fallback) {
    if (a.size() <= i) return fallback;
    const double v = a[i];
    if (v != std::floor(v) || v < 0.0 || v > kMaxDegree) {
      throw usage_error("degree argument must be an integer in [0, " + std::to_string(kMaxDegree) + "]");
    }
    return static_cast<int>(v);
  };
  if (spec.family == "smooth" || spec.family == "rough") {
    if (a.empty() || a.size() > 2) throw usage_error(spec.family + "(alpha[, J]) takes 1 or 2 arguments");
    return power_family(a[0], degree(1, 64), n);
  }
  if (spec.family == "single") {
    if (a.size() != 1) throw usage_error("single(j0) takes 1 argument");
    return single_family(degree(0, 0), n);
  }
  if (spec.family == "constant") {
    if (a.size() > 1) throw usage_error("constant(c) takes at most 1 argument");
    return constant_family(a.empty() ? 1.0 : a[0], n);
  }
  throw usage_error("unknown function family '" + spec.family + "'");
}

enum class OutputFormat { csv, json };

struct ExperimentConfig {
  Subcommand command = Subcommand::saturation;
  int n = 3;
  int s = 2;
  int r = 1;
  Sweep k{8.0, 256.0, 2.0};
  NormOrder p{2.0};
  FunctionSpec f;
  double beta = 2.0;
  double gamma = std::numbers::pi;
  Sweep t{1.0 / 256.0, 1.0, 2.0};
  int max_degree = -1;  // multipliers / ratio-limit table size; -1 picks a default
  OutputFormat format = OutputFormat::csv;
  std::string out;
  bool deterministic = false;
  bool diagnostics = false;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RateReport {
  std::string command;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::optional<RateFit> fit;
  std::string fit_of;  // which columns the fit is taken over
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  std::vector<std::string> warnings;
  std::vector<Check> checks;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }

  std::vector<double> column(std::string_view name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("no column " + std::string(name));
    const auto idx = static_cast<std::size_t>(it - columns.begin());
    std::vector<double> out;
    for (const auto& row : rows) out.push_back(row[idx]);
    return out;
  }
};

namespace detail {

/// Evaluates fn(0..count-1), in parallel unless threads <= 1. Results are
/// stored by index, so assembly does not depend on scheduling.
template <typename F>
auto parallel_map(std::size_t count, F&& fn, unsigned threads) {
  using Result = decltype(fn(std::size_t{}));
  std::vector<Result> out(count);
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    const auto nworkers = std::min<std::size_t>(threads, count);
    for (std::size_t w = 0; w < nworkers; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            out[i] = fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

inline std::string fmt_num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline Check check_within(std::string name, double value, double target, double tol) {
  const bool ok = std::abs(value - target) <= tol;
  return {std::move(name), ok,
          "value " + fmt_num(value) + ", target " + fmt_num(target) + " +/- " + fmt_num(tol)};
}

inline std::vector<std::pair<double, double>> zip(const std::vector<double>& x,
                                                  const std::vector<double>& y) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < x.size(); ++i) out.emplace_back(x[i], y[i]);
  return out;
}

inline std::optional<RateFit> try_fit(const std::vector<double>& x, const std::vector<double>& y,
                                      std::vector<std::string>& warnings, const std::string& what) {
  if (x.size() < 3) {
    warnings.push_back(what + ": fewer than 3 rows, no slope fitted");
    return std::nullopt;
  }
  try {
    const auto pts = zip(x, y);
    return fit_rate(pts);
  } catch (const fit_error& e) {
    warnings.push_back(what + ": " + e.what());
    return std::nullopt;
  }
}

inline nlohmann::ordered_json fit_json(const RateFit& fit) {
  return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared}};
}

inline std::vector<int> kernel_degrees(const ExperimentConfig& cfg) {
  auto ks = cfg.k.integer_values();
  if (ks.empty()) throw usage_error("k sweep is empty");
  if (ks.front() < 1) throw usage_error("kernel degree k must be at least 1");
  return ks;
}

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.n < 3) throw usage_error("n must be at least 3");
  if (cfg.s < 1) throw usage_error("s must be at least 1");
  if (cfg.r < 1) throw usage_error("r must be at least 1");
  kernel_degrees(cfg);
  if (cfg.max_degree > kMaxDegree) throw usage_error("J exceeds the degree cap");
}

inline void hypothesis_warnings(const ExperimentConfig& cfg, RateReport& report) {
  if (2 * cfg.s < cfg.n) {
    report.warnings.push_back("2s >= n fails (s = " + std::to_string(cfg.s) + ", n = " +
                              std::to_string(cfg.n) + "); the direct estimate is not claimed");
  }
}

inline RateReport run_multipliers(const ExperimentConfig& cfg, EigenvalueCache& cache, unsigned threads) {
  RateReport report;
  report.columns = {"k", "j", "eta", "xi"};
  const auto ks = kernel_degrees(cfg);
  struct Cell {
    std::vector<std::vector<double>> rows;
    double worst_expansion = 0.0;
    double worst_truncation = 0.0;
    bool bounds = true;
    double eta0 = 1.0;
  };
  auto cells = parallel_map(
      ks.size(),
      [&](std::size_t i) {
        const int k = ks[i];
        const auto params = make_params(k, cfg.s, cfg.n);
        const int J = cfg.max_degree >= 0 ? cfg.max_degree : params.degree() + 1;
        const auto gaps = cache.gaps(params, J);
        Cell cell;
        cell.eta0 = 1.0 - (*gaps)[0];
        const double lo = 1.0 - std::pow(2.0, cfg.r);
        for (int j = 0; j <= J; ++j) {
          const double gap = (*gaps)[static_cast<std::size_t>(j)];
          const double eta = 1.0 - gap;
          const double xi = boolean_from_gap(gap, cfg.r);
          cell.rows.push_back({static_cast<double>(k), static_cast<double>(j), eta, xi});
          cell.worst_expansion =
              std::max(cell.worst_expansion, std::abs(xi - boolean_multiplier_expanded(eta, cfg.r)));
          if (j > params.degree()) cell.worst_truncation = std::max(cell.worst_truncation, std::abs(xi));
          if (xi > 1.0 + 1e-12 || xi < lo - 1e-12) cell.bounds = false;
        }
        return cell;
      },
      threads);
  double worst_expansion = 0.0, worst_truncation = 0.0, worst_eta0 = 0.0;
  bool bounds = true;
  for (auto& cell : cells) {
    for (auto& row : cell.rows) report.rows.push_back(std::move(row));
    worst_expansion = std::max(worst_expansion, cell.worst_expansion);
    worst_truncation = std::max(worst_truncation, cell.worst_truncation);
    worst_eta0 = std::max(worst_eta0, std::abs(cell.eta0 - 1.0));
    bounds = bounds && cell.bounds;
  }
  report.checks.push_back(check_within("eta(0) = 1", worst_eta0, 0.0, 1e-12));
  report.checks.push_back(check_within("multipliers vanish above s(k-1)", worst_truncation, 0.0, 1e-10));
  report.checks.push_back(check_within("closed form equals binomial expansion", worst_expansion, 0.0, 1e-12));
  report.checks.push_back({"xi within [1 - 2^r, 1]", bounds, bounds ? "all entries" : "violated"});
  return report;
}

inline RateReport run_moments(const ExperimentConfig& cfg, unsigned threads) {
  RateReport report;
  report.columns = {"k", "moment"};
  const auto ks = kernel_degrees(cfg);
  auto results = parallel_map(
      ks.size(), [&](std::size_t i) { return moment(cfg.beta, cfg.gamma, make_params(ks[i], cfg.s, cfg.n)); },
      threads);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    report.rows.push_back({static_cast<double>(ks[i]), results[i].value});
    x.push_back(ks[i]);
    y.push_back(results[i].value);
  }
  if (!results.empty() && !results.front().hypothesis_satisfied) report.warnings.push_back(results.front().warning);
  report.fit = try_fit(x, y, report.warnings, "moment vs k");
  report.fit_of = "moment vs k";
  if (cfg.beta == 0.0) {
    double worst = 0.0;
    for (double v : y) worst = std::max(worst, std::abs(v - 1.0));
    report.checks.push_back(check_within("normalization: every moment equals 1", worst, 0.0, 1e-10));
  }
  if (report.fit) {
    const double tol = cfg.beta == 0.0 ? 1e-6 : 0.1;
    report.checks.push_back(check_within("slope equals -beta", report.fit->slope, -cfg.beta, tol));
    if (cfg.beta != 0.0) {
      report.checks.push_back({"R^2 >= 0.999", report.fit->r_squared >= 0.999,
                               "R^2 = " + fmt_num(report.fit->r_squared)});
    }
  }
  return report;
}

inline RateReport run_ratio_limit(const ExperimentConfig& cfg, EigenvalueCache& cache, unsigned threads) {
  RateReport report;
  report.columns = {"k", "j", "ratio", "target", "rel_dev"};
  const auto ks = kernel_degrees(cfg);
  const int J = cfg.max_degree >= 0 ? cfg.max_degree : 8;
  if (J < 2) throw usage_error("ratio-limit needs J >= 2");
  const double lambda = ultraspherical_index(cfg.n);
  auto tables = parallel_map(
      ks.size(), [&](std::size_t i) { return cache.gaps(make_params(ks[i], cfg.s, cfg.n), J); }, threads);
  double last_worst = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const auto& gaps = *tables[i];
    double worst = 0.0;
    for (int j = 2; j <= J; ++j) {
      const double ratio = gaps[static_cast<std::size_t>(j)] / gaps[1];
      const double target = j * (j + 2.0 * lambda) / (2.0 * lambda + 1.0);
      const double dev = ratio / target - 1.0;
      worst = std::max(worst, std::abs(dev));
      report.rows.push_back({static_cast<double>(ks[i]), static_cast<double>(j), ratio, target, dev});
    }
    last_worst = worst;
  }
  report.meta["max_rel_dev_at_largest_k"] = last_worst;
  report.checks.push_back(check_within("relative deviation at the largest k <= 2%", last_worst, 0.0, 0.02));
  return report;
}

inline RateReport run_direct(const ExperimentConfig& cfg, const ZonalFunction& f, EigenvalueCache& cache,
                             unsigned threads) {
  RateReport report;
  report.columns = {"k", "error", "omega", "ratio"};
  hypothesis_warnings(cfg, report);
  const auto ks = kernel_degrees(cfg);
  auto cells = parallel_map(
      ks.size(),
      [&](std::size_t i) {
        const int k = ks[i];
        const double err = boolean_error(f, make_params(k, cfg.s, cfg.n), cfg.r, cfg.p, &cache);
        const double om = modulus_of_smoothness(f, 1.0 / k, cfg.r, cfg.p);
        return std::vector<double>{static_cast<double>(k), err, om, om > 0.0 ? err / om : 0.0};
      },
      threads);
  report.rows = std::move(cells);
  const auto kx = report.column("k");
  const auto ratio = report.column("ratio");
  double cmax = 0.0;
  bool finite = true;
  for (double v : ratio) {
    cmax = std::max(cmax, v);
    finite = finite && std::isfinite(v) && v > 0.0;
  }
  report.meta["empirical_constant"] = cmax;
  report.fit = try_fit(kx, ratio, report.warnings, "ratio vs k");
  report.fit_of = "ratio vs k";
  report.checks.push_back({"ratio finite and positive", finite, "max ratio " + fmt_num(cmax)});
  if (report.fit) report.checks.push_back(check_within("ratio trend slope is 0", report.fit->slope, 0.0, 0.1));
  const auto err_fit = try_fit(kx, report.column("error"), report.warnings, "error vs k");
  const auto om_fit = try_fit(kx, report.column("omega"), report.warnings, "omega vs k");
  if (err_fit) report.meta["error_fit"] = fit_json(*err_fit);
  if (om_fit) report.meta["omega_fit"] = fit_json(*om_fit);
  if (err_fit && om_fit) {
    report.checks.push_back(check_within("error slope matches modulus slope", err_fit->slope, om_fit->slope, 0.15));
  }
  return report;
}

inline RateReport run_inverse(const ExperimentConfig& cfg, const ZonalFunction& f, EigenvalueCache& cache,
                              unsigned threads) {
  RateReport report;
  report.columns = {"k", "omega", "max_error", "ratio", "argmax_v"};
  if (cfg.diagnostics) report.columns.push_back("weighted_max");
  const auto ks = kernel_degrees(cfg);
  std::set<int> needed;
  for (int k : ks) {
    for (int v = k; v <= 4 * k; ++v) needed.insert(v);
    if (cfg.diagnostics) {
      for (int v = 1; v <= k; ++v) needed.insert(v);
    }
  }
  const std::vector<int> vs(needed.begin(), needed.end());
  const auto errs = parallel_map(
      vs.size(), [&](std::size_t i) { return boolean_error(f, make_params(vs[i], cfg.s, cfg.n), cfg.r, cfg.p, &cache); },
      threads);
  std::map<int, double> err_at;
  for (std::size_t i = 0; i < vs.size(); ++i) err_at[vs[i]] = errs[i];
  const auto omegas = parallel_map(
      ks.size(), [&](std::size_t i) { return modulus_of_smoothness(f, 1.0 / ks[i], cfg.r, cfg.p); }, threads);
  const double weight_exp = 2.0 * cfg.r + 0.25;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const int k = ks[i];
    double best = -1.0;
    int arg = k;
    for (int v = k; v <= 4 * k; ++v) {
      if (err_at[v] > best) {
        best = err_at[v];
        arg = v;
      }
    }
    std::vector<double> row{static_cast<double>(k), omegas[i], best, best > 0.0 ? omegas[i] / best : 0.0,
                            static_cast<double>(arg)};
    if (cfg.diagnostics) {
      double wmax = 0.0;
      for (int v = 1; v <= k; ++v) wmax = std::max(wmax, std::pow(v, weight_exp) * err_at[v]);
      row.push_back(wmax / std::pow(k, weight_exp));
    }
    report.rows.push_back(std::move(row));
  }
  report.meta["max_window"] = "v in [k, 4k]";
  const auto kx = report.column("k");
  const auto ratio = report.column("ratio");
  double cmax = 0.0;
  bool finite = true;
  for (double v : ratio) {
    cmax = std::max(cmax, v);
    finite = finite && std::isfinite(v) && v > 0.0;
  }
  report.meta["empirical_constant"] = cmax;
  report.fit = try_fit(kx, ratio, report.warnings, "ratio vs k");
  report.fit_of = "ratio vs k";
  report.checks.push_back({"ratio finite and positive", finite, "max ratio " + fmt_num(cmax)});
  if (report.fit) report.checks.push_back(check_within("ratio trend slope is 0", report.fit->slope, 0.0, 0.15));
  return report;
}

inline RateReport run_saturation(const ExperimentConfig& cfg, const ZonalFunction& f, EigenvalueCache& cache,
                                 unsigned threads) {
  RateReport report;
  report.columns = {"k", "error"};
  hypothesis_warnings(cfg, report);
  const auto ks = kernel_degrees(cfg);
  const auto errs = parallel_map(
      ks.size(), [&](std::size_t i) { return boolean_error(f, make_params(ks[i], cfg.s, cfg.n), cfg.r, cfg.p, &cache); },
      threads);
  for (std::size_t i = 0; i < ks.size(); ++i) report.rows.push_back({static_cast<double>(ks[i]), errs[i]});
  if (f.is_constant()) {
    double worst = 0.0;
    for (double e : errs) worst = std::max(worst, e);
    report.meta["invariant_class"] = "constants";
    report.checks.push_back(check_within("constants are reproduced exactly", worst, 0.0, 1e-14));
    return report;
  }
  std::vector<double> x(ks.begin(), ks.end());
  report.fit = try_fit(x, errs, report.warnings, "error vs k");
  report.fit_of = "error vs k";
  if (report.fit) {
    report.checks.push_back(check_within("error slope is -2r", report.fit->slope, -2.0 * cfg.r, 0.1));
  }
  return report;
}

inline RateReport run_equivalence(const ExperimentConfig& cfg, const ZonalFunction& f, EigenvalueCache& cache,
                                  unsigned threads) {
  RateReport report;
  report.columns = {"t", "omega", "k_upper", "ratio"};
  const auto ts = cfg.t.values();
  if (ts.empty()) throw usage_error("t grid is empty");
  for (double t : ts) {
    if (!(t > 0.0 && t < std::numbers::pi)) throw usage_error("t grid values must lie in (0, pi)");
  }
  const auto candidates = k_functional_candidates(f, cfg.r, cfg.p, cfg.s, &cache);
  const auto omegas = parallel_map(
      ts.size(), [&](std::size_t i) { return modulus_of_smoothness(f, ts[i], cfg.r, cfg.p); }, threads);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double kf = k_functional_from(candidates, ts[i], cfg.r);
    const double ratio = omegas[i] > 0.0 ? kf / omegas[i] : 0.0;
    report.rows.push_back({ts[i], omegas[i], kf, ratio});
    if (omegas[i] > 0.0) {
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  if (hi > 0.0) {
    report.meta["band_low"] = lo;
    report.meta["band_high"] = hi;
    report.meta["band_width"] = hi / lo;
    report.checks.push_back({"band width C/c <= 50", hi / lo <= 50.0,
                             "band [" + fmt_num(lo) + ", " + fmt_num(hi) + "], C/c = " + fmt_num(hi / lo)});
  } else {
    report.meta["invariant_class"] = "constants";
  }
  return report;
}

inline RateReport run_oracle_check(const ExperimentConfig& cfg, const ZonalFunction& f, EigenvalueCache& cache,
                                   unsigned threads) {
  if (cfg.n != 3) throw usage_error("oracle-check runs on S^2 only (n = 3)");
  RateReport report;
  report.columns = {"k", "convolution_dev", "translation_dev", "laplacian_dev"};
  const auto ks = kernel_degrees(cfg);
  const std::vector<double> points{0.0, 0.3, 0.7, 1.1, 1.6, 2.2, 2.9, std::numbers::pi};

  // Translation and Laplacian deviations do not depend on k.
  double translation_dev = 0.0;
  for (const double theta : {0.1, 0.5, 1.5, 3.0}) {
    const auto moved = translate(f, theta);
    for (const double x : points) {
      translation_dev = std::max(translation_dev, std::abs(oracle::translate_direct(f, theta, x) - evaluate(moved, x)));
    }
  }
  double laplacian_dev = 0.0;
  const auto lap = laplace_beltrami_power(f, 1);
  for (int i = 0; i < 20; ++i) {
    const double theta = 0.05 + (std::numbers::pi - 0.1) * (i + 0.5) / 20.0;
    laplacian_dev = std::max(laplacian_dev, std::abs(oracle::laplacian_radial_fd(f, theta) - evaluate(lap, theta)));
  }

  report.rows = parallel_map(
      ks.size(),
      [&](std::size_t i) {
        const auto params = make_params(ks[i], cfg.s, cfg.n);
        const int need = oracle::required_resolution(f, params);
        const auto grid = oracle::make_sphere_grid(need, need);
        const auto fast = jackson_apply(f, params, &cache);
        double dev = 0.0;
        for (const double x : points) {
          dev = std::max(dev, std::abs(oracle::convolve_direct(f, params, x, grid) - evaluate(fast, x)));
        }
        return std::vector<double>{static_cast<double>(ks[i]), dev, translation_dev, laplacian_dev};
      },
      threads);
  double conv = 0.0;
  for (const auto& row : report.rows) conv = std::max(conv, row[1]);
  report.checks.push_back(check_within("direct convolution agrees", conv, 0.0, 1e-6));
  report.checks.push_back(check_within("direct circle average agrees", translation_dev, 0.0, 1e-8));
  report.checks.push_back(check_within("finite-difference Laplacian agrees", laplacian_dev, 0.0, 1e-5));
  return report;
}

inline nlohmann::ordered_json config_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["subcommand"] = std::string(to_string(cfg.command));
  j["n"] = cfg.n;
  j["s"] = cfg.s;
  j["r"] = cfg.r;
  j["k"] = {{"start", cfg.k.start}, {"stop", cfg.k.stop}, {"factor", cfg.k.factor}};
  j["p"] = cfg.p.label();
  j["f"] = cfg.f.text();
  if (cfg.command == Subcommand::moments) {
    j["beta"] = cfg.beta;
    j["gamma"] = cfg.gamma;
  }
  if (cfg.command == Subcommand::equivalence) {
    j["t"] = {{"start", cfg.t.start}, {"stop", cfg.t.stop}, {"factor", cfg.t.factor}};
  }
  if (cfg.max_degree >= 0) j["J"] = cfg.max_degree;
  j["deterministic"] = cfg.deterministic;
  return j;
}

}  // namespace detail

/// Runs one experiment. Sweep cells may be evaluated concurrently unless the
/// deterministic flag is set; rows are keyed by sweep position either way.
inline RateReport run_experiment(const ExperimentConfig& cfg, EigenvalueCache* shared_cache = nullptr) {
  detail::validate(cfg);
  const auto started = std::chrono::steady_clock::now();
  unsigned threads = cfg.deterministic ? 1u : cfg.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  EigenvalueCache local_cache;
  EigenvalueCache& cache = shared_cache ? *shared_cache : local_cache;

  auto function = [&] { return make_function(cfg.f, cfg.n); };
  RateReport report;
  switch (cfg.command) {
    case Subcommand::multipliers: report = detail::run_multipliers(cfg, cache, threads); break;
    case Subcommand::moments: report = detail::run_moments(cfg, threads); break;
    case Subcommand::ratio_limit: report = detail::run_ratio_limit(cfg, cache, threads); break;
    case Subcommand::direct: report = detail::run_direct(cfg, function(), cache, threads); break;
    case Subcommand::inverse: report = detail::run_inverse(cfg, function(), cache, threads); break;
    case Subcommand::saturation: report = detail::run_saturation(cfg, function(), cache, threads); break;
    case Subcommand::equivalence: report = detail::run_equivalence(cfg, function(), cache, threads); break;
    case Subcommand::oracle_check: report = detail::run_oracle_check(cfg, function(), cache, threads); break;
  }
  report.command = std::string(to_string(cfg.command));
  nlohmann::ordered_json meta;
  meta["config"] = detail::config_json(cfg);
  for (auto& [key, value] : report.meta.items()) meta[key] = value;
  meta["warnings"] = report.warnings;
  if (!cfg.deterministic) {
    meta["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  report.meta = std::move(meta);
  return report;
}

inline void write_csv(std::ostream& out, const RateReport& report) {
  for (std::size_t c = 0; c < report.columns.size(); ++c) {
    if (c) out << ',';
    out << report.columns[c];
  }
  out << '\n';
  for (const auto& row : report.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << detail::fmt_num(row[c]);
    }
    out << '\n';
  }
}

inline nlohmann::ordered_json to_json(const RateReport& report) {
  nlohmann::ordered_json j;
  j["command"] = report.command;
  j["columns"] = report.columns;
  j["rows"] = report.rows;
  if (report.fit) {
    auto fit = detail::fit_json(*report.fit);
    fit["of"] = report.fit_of;
    j["fit"] = fit;
  } else {
    j["fit"] = nullptr;
  }
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : report.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["checks"] = checks;
  j["meta"] = report.meta;
  return j;
}

inline void write_json(std::ostream& out, const RateReport& report) { out << to_json(report).dump(2) << '\n'; }

}  // namespace spherejack
