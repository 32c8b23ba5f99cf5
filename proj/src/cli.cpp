#include "r2margin/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "r2margin/errors.hpp"
#include "r2margin/inference.hpp"
#include "r2margin/io.hpp"
#include "r2margin/montecarlo.hpp"
#include "r2margin/regression.hpp"

namespace r2margin {

namespace {

constexpr double kPerfectFitR2 = 1.0 - 1e-12;

struct Options {
  int precision = 7;
  double r2 = 0.0;
  long n = 0;
  long k = 0;
  double alpha = 0.10;
  double test_alpha = 0.05;
  double delta = 0.0;
  double tol = kDefaultTolerance;
  bool one_sided = false;
  std::string data_path;
  std::string config_path;
  bool paper_grid = false;
  long long sims = static_cast<long long>(kDefaultSims);
  double sim_alpha = kDefaultAlpha;
  std::uint64_t seed = 1;
  std::string out_path;
  std::string results_path;
  bool restricted = false;
};

unsigned threads_from_env() {
  const char* raw = std::getenv("R2MARGIN_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  const long value = std::strtol(raw, &end, 10);
  if (*end != '\0' || value < 0) throw DomainError("R2MARGIN_THREADS must be a non-negative integer");
  return static_cast<unsigned>(value);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DomainError("cannot write '" + path + "'");
  file << text;
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

int cmd_ci(const Options& o, std::ostream& out) {
  const TestInput input(o.r2, o.n, o.k);
  const auto convention = o.one_sided ? QuantileConvention::kAlpha : QuantileConvention::kHalfAlpha;
  const ConfidenceBound b = upper_ci_p2(input, o.alpha, o.tol, convention);
  out << std::setprecision(o.precision);
  out << "upper: " << b.upper << '\n'
      << "level: " << b.level << '\n'
      << "alpha: " << b.alpha_param << '\n'
      << "quantile_probability: " << b.tail_probability << '\n'
      << "v: " << b.v_final << '\n'
      << "iterations: " << b.iterations << '\n'
      << "method: " << (b.method == SolveMethod::kIteration ? "iteration" : "bracketed") << '\n'
      << "clamped: " << yes_no(b.clamped) << '\n';
  if (b.clamped) out << "raw_upper: " << b.raw_upper << '\n';
  return kExitOk;
}

int cmd_test(const Options& o, std::ostream& out) {
  const TestInput input(o.r2, o.n, o.k);
  const NonInfResult r = noninferiority_pvalue(input, o.delta, o.tol);
  out << std::setprecision(o.precision);
  out << "p_value: " << r.p_value << '\n'
      << "f_stat: " << r.f_stat << '\n'
      << "v: " << r.v_final << '\n'
      << "delta: " << r.delta << '\n'
      << "iterations: " << r.iterations << '\n';
  if (r.short_circuited) out << "note: R^2 = 0, p-value is 0 without iteration\n";
  return kExitOk;
}

int cmd_fit(const Options& o, std::ostream& out) {
  if (!(o.delta > 0.0 && o.delta < 1.0)) throw DomainError("--delta must lie in (0, 1)");
  if (!(o.test_alpha > 0.0 && o.test_alpha < 1.0)) throw DomainError("--alpha must lie in (0, 1)");
  std::ifstream in(o.data_path, std::ios::binary);
  if (!in) throw DomainError("cannot open '" + o.data_path + "'");
  const LabeledDataset labeled = read_data_csv(in);
  const auto& data = labeled.data;

  OlsFit<double> fit;
  try {
    fit = fit_ols(data);
  } catch (const RankDeficiencyError& e) {
    const std::size_t csv_column = e.column() + 1;
    throw DomainError(std::string(e.what()) + " (CSV column " + std::to_string(csv_column) + ", '" +
                      labeled.header.at(csv_column - 1) + "')");
  }

  const bool perfect_fit = fit.r2 >= kPerfectFitR2;
  const TestInput input(perfect_fit ? kPerfectFitR2 : fit.r2, data.n(), data.k());
  const ConfidenceBound bound = upper_ci_p2(input, o.test_alpha, o.tol, QuantileConvention::kAlpha);
  const NonInfResult test = noninferiority_pvalue(input, o.delta, o.tol);

  out << std::setprecision(o.precision);
  out << "n: " << data.n() << '\n'
      << "k: " << data.k() << '\n'
      << "r2: " << fit.r2 << '\n'
      << "upper_ci: " << bound.upper << '\n'
      << "upper_ci_level: " << bound.level << '\n'
      << "p_value: " << test.p_value << '\n'
      << "delta: " << o.delta << '\n'
      << "alpha: " << o.test_alpha << '\n';
  if (fit.constant_outcome) out << "note: outcome is constant, R^2 set to 0\n";
  if (perfect_fit) out << "note: perfect fit, inference uses R^2 = 1 - 1e-12\n";
  out << "decision: " << (test.p_value < o.test_alpha ? "reject" : "do not reject") << " H0: P^2 >= " << o.delta
      << '\n';
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  if (o.sims < 1) throw DomainError("--sims must be >= 1");
  if (!(o.sim_alpha > 0.0 && o.sim_alpha < 1.0)) throw DomainError("--alpha must lie in (0, 1)");
  if (o.paper_grid == !o.config_path.empty()) {
    throw DomainError("simulate needs exactly one of --paper-grid or --config");
  }
  SimulationConfig config;
  if (o.paper_grid) {
    config.scenarios = paper_grid();
    config.deltas = default_deltas();
  } else {
    config = parse_simulation_config(read_file(o.config_path));
  }
  const unsigned threads = threads_from_env();
  const auto records = run_grid(config.scenarios, config.deltas, static_cast<std::uint64_t>(o.sims),
                                o.sim_alpha, o.seed, threads);

  std::ostringstream comment;
  comment << std::setprecision(10) << "r2margin simulate "
          << (o.paper_grid ? std::string("--paper-grid") : "--config " + o.config_path) << " --sims " << o.sims
          << " --alpha " << o.sim_alpha << " --seed " << o.seed;
  std::ostringstream csv;
  write_results_csv(csv, records, comment.str());
  write_output(o.out_path, csv.str(), out);
  return kExitOk;
}

int cmd_plot(const Options& o, std::ostream& out) {
  std::istringstream in(read_file(o.results_path));
  const auto records = read_results_csv(in);
  if (records.empty()) throw DomainError("results CSV has no data rows");
  write_output(o.out_path, render_svg(records, o.restricted), out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Non-inferiority test and confidence bound for P^2 with random regressors"};
  app.name("r2margin");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--precision", o.precision, "Significant digits in printed values")
      ->check(CLI::Range(1, 17))
      ->capture_default_str();

  auto* ci = app.add_subcommand("ci", "Upper one-sided confidence bound for P^2");
  ci->add_option("--r2", o.r2, "Observed R^2")->required();
  ci->add_option("--n", o.n, "Sample size")->required();
  ci->add_option("--k", o.k, "Number of covariates")->required();
  ci->add_option("--alpha", o.alpha, "alpha; the F quantile is taken at alpha/2 unless --one-sided")
      ->capture_default_str();
  ci->add_flag("--one-sided", o.one_sided, "Take the F quantile at alpha instead of alpha/2");
  ci->add_option("--tol", o.tol, "Fixed-point tolerance")->capture_default_str();

  auto* test = app.add_subcommand("test", "Non-inferiority p-value for H0: P^2 >= delta");
  test->add_option("--r2", o.r2, "Observed R^2")->required();
  test->add_option("--n", o.n, "Sample size")->required();
  test->add_option("--k", o.k, "Number of covariates")->required();
  test->add_option("--delta", o.delta, "Non-inferiority margin")->required();
  test->add_option("--tol", o.tol, "Fixed-point tolerance")->capture_default_str();

  auto* fit = app.add_subcommand("fit", "Fit OLS to a CSV file and test H0: P^2 >= delta");
  fit->add_option("--data,data", o.data_path, "CSV: outcome column then covariates, one header row")->required();
  fit->add_option("--delta", o.delta, "Non-inferiority margin")->required();
  fit->add_option("--alpha", o.test_alpha, "Test level")->capture_default_str();
  fit->add_option("--tol", o.tol, "Fixed-point tolerance")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Monte Carlo rejection rates over a scenario grid");
  auto* grid_flag = sim->add_flag("--paper-grid", o.paper_grid, "Use the built-in 30-scenario grid");
  auto* config_opt = sim->add_option("--config", o.config_path, "Scenario JSON file");
  grid_flag->excludes(config_opt);
  sim->add_option("--sims", o.sims, "Replicates per scenario")->capture_default_str();
  sim->add_option("--alpha", o.sim_alpha, "Test level")->capture_default_str();
  sim->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  sim->add_option("--out", o.out_path, "Output CSV (stdout if omitted)");

  auto* plot = app.add_subcommand("plot", "Render simulation results as a two-panel SVG");
  plot->add_option("--results,results", o.results_path, "CSV written by simulate")->required();
  plot->add_option("--out", o.out_path, "Output SVG (stdout if omitted)");
  plot->add_flag("--restricted", o.restricted, "Cap the vertical axis at 0.2");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (ci->parsed()) return cmd_ci(o, out);
    if (test->parsed()) return cmd_test(o, out);
    if (fit->parsed()) return cmd_fit(o, out);
    if (sim->parsed()) return cmd_simulate(o, out);
    if (plot->parsed()) return cmd_plot(o, out);
  } catch (const ConvergenceError& e) {
    err << "convergence failure: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const DegenerateInputError& e) {
    err << "degenerate input: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const ExcessiveSkipsError& e) {
    err << "too many skipped replicates: " << e.what() << '\n';
    return kExitExcessiveSkips;
  } catch (const std::exception& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace r2margin
