// spherejack: rate tables and property checks for Boolean sums of Jackson
// operators on the sphere.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

#include "spherejack/spherejack.hpp"

namespace sj = spherejack;

namespace {

struct RawOptions {
  int n = 3;
  int s = 2;
  int r = 1;
  std::string k = "8:256:x2";
  std::string p = "2";
  std::string f = "smooth(5,64)";
  std::string beta = "2";
  std::string gamma = "pi";
  std::string t_grid = "2^-8:1:x2";
  int max_degree = -1;
  std::string out;
  std::string format = "csv";
  bool deterministic = false;
  bool assert_checks = false;
  bool diagnostics = false;
  unsigned threads = 0;
};

void add_options(CLI::App& sub, RawOptions& o) {
  sub.add_option("--n", o.n, "ambient dimension; the sphere is S^{n-1}");
  sub.add_option("--s", o.s, "kernel power");
  sub.add_option("--r", o.r, "Boolean sum order");
  sub.add_option("--k", o.k, "kernel degree sweep START:STOP:xFACTOR");
  sub.add_option("--p", o.p, "norm order: 1, 2, inf or a real >= 1");
  sub.add_option("--f", o.f, "test function: smooth(a,J), rough(a,J), single(j), constant(c), file:PATH");
  sub.add_option("--beta", o.beta, "moment order");
  sub.add_option("--gamma", o.gamma, "moment upper limit in (0, pi]");
  sub.add_option("--t-grid", o.t_grid, "t sweep for equivalence START:STOP:xFACTOR");
  sub.add_option("--J", o.max_degree, "table size for multipliers and ratio-limit");
  sub.add_option("--out", o.out, "output path; stdout when omitted");
  sub.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub.add_option("--threads", o.threads, "worker threads; 0 uses all cores");
  sub.add_flag("--deterministic", o.deterministic, "serial evaluation, no timing in metadata");
  sub.add_flag("--assert", o.assert_checks, "exit 2 when a check fails");
  sub.add_flag("--diagnostics", o.diagnostics, "extra diagnostic columns");
}

double parse_angle(const std::string& text) {
  if (text == "pi") return std::numbers::pi;
  if (text == "pi/2") return std::numbers::pi / 2.0;
  return sj::parse_real(text);
}

sj::ExperimentConfig to_config(sj::Subcommand command, const RawOptions& o) {
  sj::ExperimentConfig cfg;
  cfg.command = command;
  cfg.n = o.n;
  cfg.s = o.s;
  cfg.r = o.r;
  cfg.k = sj::parse_sweep(o.k);
  cfg.p = sj::parse_norm_order(o.p);
  cfg.f = sj::parse_function_spec(o.f);
  cfg.beta = sj::parse_real(o.beta);
  cfg.gamma = parse_angle(o.gamma);
  cfg.t = sj::parse_sweep(o.t_grid);
  cfg.max_degree = o.max_degree;
  cfg.format = o.format == "json" ? sj::OutputFormat::json : sj::OutputFormat::csv;
  cfg.out = o.out;
  cfg.deterministic = o.deterministic;
  cfg.diagnostics = o.diagnostics;
  cfg.threads = o.threads;
  return cfg;
}

void print_summary(std::ostream& os, const sj::RateReport& report) {
  os << report.command << ": " << report.rows.size() << " rows\n";
  if (report.fit) {
    os << "  fit " << report.fit_of << ": slope " << sj::detail::fmt_num(report.fit->slope)
       << ", R^2 " << sj::detail::fmt_num(report.fit->r_squared) << '\n';
  }
  for (const auto& w : report.warnings) os << "  warning: " << w << '\n';
  for (const auto& c : report.checks) {
    os << "  " << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) os << " (" << c.detail << ')';
    os << '\n';
  }
}

std::string describe(sj::Subcommand c) {
  switch (c) {
    case sj::Subcommand::multipliers: return "Boolean-sum multipliers for degrees 0..J";
    case sj::Subcommand::moments: return "kernel moments against theta^beta and their decay in k";
    case sj::Subcommand::ratio_limit: return "(1 - eta_j) / (1 - eta_1) against j (j + n - 2) / (n - 1)";
    case sj::Subcommand::direct: return "approximation error over the modulus of smoothness";
    case sj::Subcommand::inverse: return "modulus of smoothness over the windowed approximation error";
    case sj::Subcommand::saturation: return "decay of the approximation error for smooth f";
    case sj::Subcommand::equivalence: return "K-functional upper bound over the modulus across t";
    case sj::Subcommand::oracle_check: return "multiplier path against direct quadrature oracles";
  }
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boolean sums of Jackson operators on the sphere"};
  app.require_subcommand(1);
  RawOptions options;
  for (const auto& [name, command] : sj::subcommand_names()) {
    add_options(*app.add_subcommand(std::string(name), describe(command)), options);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "spherejack: " << e.what() << '\n';
    return 1;
  }

  const auto chosen = app.get_subcommands().front()->get_name();
  sj::RateReport report;
  try {
    const auto cfg = to_config(sj::parse_subcommand(chosen), options);
    report = sj::run_experiment(cfg);
  } catch (const sj::usage_error& e) {
    std::cerr << "spherejack: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "spherejack: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "spherejack: " << chosen << " failed: " << e.what() << '\n';
    return 1;
  }

  auto emit = [&](std::ostream& os) {
    if (options.format == "json") {
      sj::write_json(os, report);
    } else {
      sj::write_csv(os, report);
    }
  };
  if (options.out.empty()) {
    emit(std::cout);
    print_summary(std::cerr, report);
  } else {
    std::ofstream file(options.out, std::ios::binary);
    if (!file) {
      std::cerr << "spherejack: cannot open " << options.out << " for writing\n";
      return 1;
    }
    emit(file);
    if (!file.flush()) {
      std::cerr << "spherejack: write to " << options.out << " failed\n";
      return 1;
    }
    print_summary(std::cout, report);
  }
  if (options.assert_checks && !report.all_passed()) return 2;
  return 0;
}
