#include "pollreg/cli_commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "pollreg/csv.hpp"
#include "pollreg/errors.hpp"
#include "pollreg/multiplicative.hpp"
#include "pollreg/polling_sim.hpp"
#include "pollreg/sampler.hpp"

namespace pollreg {

namespace {

namespace fs = std::filesystem;

std::string describe(const ScenarioSource& source) {
  if (source.example_p.has_value()) {
    return "built-in example, p=" + csv_number(*source.example_p);
  }
  return source.path;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

fs::path output_file(const GlobalOptions& global, const char* name) {
  fs::create_directories(global.out_dir);
  return fs::path(global.out_dir) / name;
}

// Encodes a critical exponent as one CSV cell: its value when finite,
// inf when the root lies beyond the search cap, nan when no root exists.
double exponent_cell(const CriticalExponent& s_star) {
  switch (s_star.kind) {
    case CriticalExponent::Kind::Finite:
      return s_star.value;
    case CriticalExponent::Kind::RootBeyondCap:
      return std::numeric_limits<double>::infinity();
    case CriticalExponent::Kind::NoFiniteRoot:
      break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

const char* exponent_kind(const CriticalExponent& s_star) {
  switch (s_star.kind) {
    case CriticalExponent::Kind::Finite:
      return "finite";
    case CriticalExponent::Kind::RootBeyondCap:
      return "beyond-cap";
    case CriticalExponent::Kind::NoFiniteRoot:
      break;
  }
  return "no-finite-root";
}

FieldTilt resolve_tilt(const ScenarioSpec& spec, const std::string& name,
                       double s) {
  if (name == "natural") return FieldTilt{};
  if (name == "above") return find_s_neutral_tilt(spec, s, TiltMode::Above);
  if (name == "below") return find_s_neutral_tilt(spec, s, TiltMode::Below);
  throw std::invalid_argument("tilt must be natural, above, or below");
}

void print_violation(std::ostream& out, const ScenarioViolation& v) {
  out << "violation: ";
  if (v.from < 0) {
    out << v.clause << "\n";
  } else if (v.to < 0) {
    out << "station " << v.from + 1 << ": " << v.clause << "\n";
  } else if (v.atom < 0) {
    out << "pair (" << v.from + 1 << ", " << v.to + 1 << "): " << v.clause
        << "\n";
  } else {
    out << "pair (" << v.from + 1 << ", " << v.to + 1 << ") atom "
        << v.atom + 1 << ": " << v.clause << "\n";
  }
}

nlohmann::json report_to_json(const AnalysisReport& report) {
  nlohmann::json j;
  j["pi"] = report.pi;
  j["station_log_drift"] = report.station_log_drift;
  j["mean_log_drift"] = report.mean_log_drift;
  auto grid = nlohmann::json::array();
  for (const auto& [s, eta] : report.eta) {
    grid.push_back({s, eta});
  }
  j["eta"] = std::move(grid);
  j["s_star"]["kind"] = exponent_kind(report.s_star);
  if (report.s_star.kind == CriticalExponent::Kind::Finite) {
    j["s_star"]["value"] = report.s_star.value;
  } else {
    j["s_star"]["value"] = nullptr;
  }
  j["phase"] = to_string(report.phase);
  j["moment_note"] = report.moment_note;
  j["zero_switching_caveat"] = report.zero_switching_caveat;
  j["eta_prime_residual"] = report.eta_prime_residual;
  return j;
}

}  // namespace

ScenarioSpec resolve_scenario(const ScenarioSource& source) {
  if (source.example_p.has_value()) {
    if (!source.path.empty()) {
      throw std::invalid_argument(
          "give either a scenario file or --example-p, not both");
    }
    return example_scenario(*source.example_p);
  }
  if (source.path.empty()) {
    throw std::invalid_argument("no scenario: pass a file or --example-p");
  }
  return load_scenario_file(source.path);
}

int cmd_validate(const ScenarioSource& source, std::ostream& out) {
  out << "scenario: " << describe(source) << "\n";
  ScenarioSpec spec;
  try {
    spec = resolve_scenario(source);
  } catch (const ParseError& e) {
    out << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  }
  const auto result = validate_scenario(spec);
  for (const auto& v : result.violations) print_violation(out, v);
  if (!result.ok) {
    out << result.violations.size() << " violation(s)\n";
    return 2;
  }
  out << "valid\n";
  return 0;
}

AnalysisReport analyze_scenario(const ScenarioSpec& spec,
                                const AnalyzeOptions& options) {
  if (!(options.s_step > 0.0)) {
    throw std::invalid_argument("s_step must be positive");
  }
  if (options.s_min < 0.0 || options.s_max < options.s_min) {
    throw std::invalid_argument("need 0 <= s_min <= s_max");
  }
  AnalysisReport report;
  report.pi = stationary_distribution(spec.chain).pi;
  for (int i = 0; i < spec.chain.d; ++i) {
    report.station_log_drift.push_back(log_drift(spec, i));
  }
  const Classification label = classify(spec);
  report.mean_log_drift = label.mean_drift;
  report.s_star = label.s_star;
  report.phase = label.phase;
  report.moment_note = label.moment_note;
  report.zero_switching_caveat = label.zero_switching_caveat;
  report.eta_prime_residual =
      std::abs(eta_prime_at_zero(spec) - label.mean_drift);
  for (int k = 0;; ++k) {
    const double s = options.s_min + k * options.s_step;
    if (s > options.s_max + 1e-12) break;
    report.eta.emplace_back(s, eta_at(spec, s));
  }
  return report;
}

int cmd_analyze(const ScenarioSource& source, const AnalyzeOptions& options,
                const GlobalOptions& global, std::ostream& out) {
  try {
    const ScenarioSpec spec = resolve_scenario(source);
    const ScenarioSampler guard(spec);  // full validation with a named clause
    const AnalysisReport report = analyze_scenario(spec, options);

    CsvWriter csv(output_file(global, "analysis.csv").string());
    csv.row("s", "eta");
    for (const auto& [s, eta] : report.eta) csv.row(s, eta);
    csv.flush();

    out << report_to_json(report).dump(2) << "\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_simulate(const ScenarioSource& source, const SimulateOptions& options,
                 const GlobalOptions& global, std::ostream& out) {
  try {
    const ScenarioSpec spec = resolve_scenario(source);
    const ScenarioSampler sampler(spec);

    MonteCarloTauConfig config;
    config.runs = options.runs;
    config.horizon = options.horizon;
    config.x1 = options.x1;
    config.x2 = options.x2;
    config.s_grid = options.s_grid;
    config.horizon_grid = options.horizon_grid.empty()
                              ? std::vector<long long>{options.horizon}
                              : options.horizon_grid;
    config.threads = resolve_threads(global.threads);
    config.master_seed = global.seed;
    const MonteCarloTauResult result = monte_carlo_tau(sampler, config);

    CsvWriter runs_csv(output_file(global, "runs.csv").string());
    runs_csv.row("run_id", "tau_or_horizon", "censored", "epochs", "seed");
    for (std::size_t id = 0; id < result.runs.size(); ++id) {
      const RunResult& run = result.runs[id];
      runs_csv.row(static_cast<long long>(id),
                   run.tau.has_value() ? *run.tau : run.horizon,
                   !run.tau.has_value(), run.epochs_used, run.seed);
    }
    runs_csv.flush();

    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto& tail = result.summary.tail;
    CsvWriter summary_csv(output_file(global, "summary.csv").string());
    summary_csv.row("s", "truncated_moment", "horizon", "hill_index",
                    "hill_ci_low", "hill_ci_high", "censor_fraction");
    for (const auto& moment : result.summary.moments) {
      summary_csv.row(moment.s, moment.value, moment.cap,
                      tail ? tail->index : nan, tail ? tail->ci_low : nan,
                      tail ? tail->ci_high : nan,
                      result.summary.censor_fraction);
    }
    summary_csv.flush();

    out << "runs=" << result.summary.runs
        << " censored=" << result.summary.censored
        << " censor_fraction=" << csv_number(result.summary.censor_fraction)
        << "\n";
    if (tail.has_value()) {
      out << "tail_index=" << csv_number(tail->index) << " ci=["
          << csv_number(tail->ci_low) << ", " << csv_number(tail->ci_high)
          << "]\n";
    }
    return result.summary.censored > 0 ? 3 : 0;
  } catch (const std::invalid_argument& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  }
}

std::vector<SweepRow> sweep_phases(const ScenarioSpec& base,
                                   const SweepSpec& sweep) {
  std::vector<double> grid = sweep.grid;
  std::sort(grid.begin(), grid.end());
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (const double value : grid) {
    const ScenarioSpec spec = with_sweep_value(base, sweep, value);
    const Classification label = classify(spec);
    SweepRow row;
    row.value = value;
    row.mean_log_drift = label.mean_drift;
    row.s_star = label.s_star;
    row.phase = label.phase;
    rows.push_back(row);
  }
  return rows;
}

int cmd_sweep(const ScenarioSource& source, const SweepOptions& options,
              const GlobalOptions& global, std::ostream& out) {
  try {
    ScenarioSpec base;
    SweepSpec sweep;
    if (source.example_p.has_value() || source.path.empty()) {
      if (options.grid.empty()) {
        throw std::invalid_argument("sweep grid is empty");
      }
      base = resolve_scenario(source.example_p.has_value()
                                  ? source
                                  : ScenarioSource{"", 0.3});
      sweep = example_sweep(options.grid);
    } else {
      std::ifstream file(source.path);
      if (!file) {
        throw std::invalid_argument("cannot open " + source.path);
      }
      const auto j = nlohmann::json::parse(file, nullptr, true, true);
      base = parse_scenario(j);
      const auto embedded = sweep_of(j);
      if (!embedded.has_value()) {
        throw std::invalid_argument("scenario file has no sweep section");
      }
      sweep = *embedded;
      if (sweep.grid.empty()) {
        throw std::invalid_argument("sweep grid is empty");
      }
    }

    const std::vector<SweepRow> rows = sweep_phases(base, sweep);
    CsvWriter csv(output_file(global, "sweep.csv").string());
    csv.row("value", "mean_log_drift", "s_star", "phase");
    for (const auto& row : rows) {
      csv.row(row.value, row.mean_log_drift, exponent_cell(row.s_star),
              to_string(row.phase));
    }
    csv.flush();
    out << "sweep rows: " << rows.size() << "\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_fluid(const ScenarioSource& source, const FluidOptions& options,
              const GlobalOptions& global, std::ostream& out) {
  try {
    if (!(options.x0 > 0.0)) throw std::invalid_argument("x0 must be positive");
    if (!(options.eps > 0.0)) throw std::invalid_argument("eps must be positive");
    const ScenarioSpec spec = resolve_scenario(source);
    const ScenarioSampler sampler(spec);
    const FieldTilt tilt = resolve_tilt(spec, options.tilt, options.s);

    Rng rng(global.seed);
    const ParamPath path = sample_path_until_product(
        sampler, tilt, options.eps, options.cap, rng);
    FluidStopRule stop;
    stop.epochs = static_cast<long long>(path.size());
    stop.cap = std::max<long long>(options.cap, stop.epochs.value());
    const FluidTrajectory traj = replay_trajectory(tilt, options.x0, stop, path);
    const FluidTotalTime total =
        total_time_on_path(path, tilt, options.x0, options.eps, options.cap);

    CsvWriter csv(output_file(global, "fluid.csv").string());
    csv.comment("tilt=" + options.tilt +
                " theta_prime=" + csv_number(tilt.theta_prime) +
                " s=" + csv_number(options.s) +
                " x0=" + csv_number(options.x0));
    csv.row("epoch", "t_r", "v1", "a_r", "b_r", "c_r");
    for (std::size_t r = 0; r < path.size(); ++r) {
      csv.row(static_cast<long long>(r), traj.t[r], traj.v1[r], traj.a[r],
              traj.b[r], traj.c[r]);
    }
    csv.flush();

    out << "epochs=" << path.size()
        << " t_empty=" << csv_number(total.t_empty)
        << " product_series=" << csv_number(total.product_series)
        << " steps=" << total.steps
        << " coefficients_complete=" << traj.coefficients_complete
        << " truncated=" << total.truncated << "\n";
    return total.truncated || !traj.coefficients_complete ? 3 : 0;
  } catch (const std::invalid_argument& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_mult(const ScenarioSource& source, const MultOptions& options,
             const GlobalOptions& global, std::ostream& out) {
  try {
    if (options.runs < 0) throw std::invalid_argument("negative run count");
    const ScenarioSpec spec = resolve_scenario(source);
    const ScenarioSampler sampler(spec);
    const FieldTilt tilt = resolve_tilt(spec, options.tilt, options.s);

    CsvWriter csv(output_file(global, "mult.csv").string());
    csv.row("run_id", "total_time", "steps", "truncated");
    long long truncated = 0;
    for (long long id = 0; id < options.runs; ++id) {
      Rng rng(derive_seed(global.seed, static_cast<std::uint64_t>(id)));
      double total = 0.0;
      long long steps = 0;
      bool capped = false;
      if (tilt.mode == TiltMode::Natural) {
        const TotalTimeRecord record =
            run_total_time(sampler, options.x0, options.eps, options.cap, rng);
        total = record.total;
        steps = record.steps;
        capped = record.truncated;
      } else {
        const FluidTotalTime record = total_time(sampler, tilt, options.x0,
                                                 options.eps, options.cap, rng);
        total = options.x0 * (1.0 + record.product_series);
        steps = record.steps;
        capped = record.truncated;
      }
      if (capped) ++truncated;
      csv.row(id, total, steps, capped);
    }
    csv.flush();
    out << "runs=" << options.runs << " truncated=" << truncated << "\n";
    return truncated > 0 ? 3 : 0;
  } catch (const std::invalid_argument& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace pollreg
