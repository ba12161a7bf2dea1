#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pollreg/fluid.hpp"
#include "pollreg/parameters.hpp"
#include "pollreg/scenario_io.hpp"

// Command implementations behind the command line front end. Each command
// takes plain option structs and a stream for human-readable output, writes
// its CSV files under the output directory, and returns the process exit
// code: 0 on success, 2 on parse or validation failure, 3 when results
// carry truncation warnings (censored runs, capped series).

namespace pollreg {

struct GlobalOptions {
  std::uint64_t seed = 0;
  int threads = 0;  // 0 resolves to the available hardware parallelism
  std::string out_dir = "./out";
};

// Where the scenario comes from: a file path, or the built-in two-station
// example with mixture weight p.
struct ScenarioSource {
  std::string path;
  std::optional<double> example_p;
};

// Loads and returns the scenario; throws ParseError or std::invalid_argument
// when the source is unusable.
ScenarioSpec resolve_scenario(const ScenarioSource& source);

int cmd_validate(const ScenarioSource& source, std::ostream& out);

struct AnalyzeOptions {
  double s_min = 0.1;
  double s_max = 4.0;
  double s_step = 0.1;
};

struct AnalysisReport {
  std::vector<double> pi;
  std::vector<double> station_log_drift;
  double mean_log_drift = 0.0;
  std::vector<std::pair<double, double>> eta;  // (s, eta(s)) on the grid
  CriticalExponent s_star;
  Phase phase = Phase::Transient;
  std::string moment_note;
  bool zero_switching_caveat = false;
  // |finite-difference eta'(0) - sum_i pi_i L_i|, a self-consistency check.
  double eta_prime_residual = 0.0;
};

AnalysisReport analyze_scenario(const ScenarioSpec& spec,
                                const AnalyzeOptions& options);

// Prints the report as JSON and writes analysis.csv (columns s, eta).
int cmd_analyze(const ScenarioSource& source, const AnalyzeOptions& options,
                const GlobalOptions& global, std::ostream& out);

struct SimulateOptions {
  long long runs = 1000;
  long long horizon = 1000000;
  long long x1 = 1;
  long long x2 = 0;
  std::vector<double> s_grid = {0.25, 0.4, 0.5, 0.9};
  std::vector<long long> horizon_grid;  // empty: just the full horizon
};

// Writes runs.csv (run_id, tau_or_horizon, censored, epochs, seed) and
// summary.csv (s, truncated_moment, horizon, hill_index, hill_ci_low,
// hill_ci_high, censor_fraction). Exit 3 when any run was censored.
int cmd_simulate(const ScenarioSource& source, const SimulateOptions& options,
                 const GlobalOptions& global, std::ostream& out);

struct SweepRow {
  double value = 0.0;
  double mean_log_drift = 0.0;
  CriticalExponent s_star;
  Phase phase = Phase::Transient;
};

// Classification at every grid value of the swept atom weight, sorted by
// the swept value.
std::vector<SweepRow> sweep_phases(const ScenarioSpec& base,
                                   const SweepSpec& sweep);

struct SweepOptions {
  // Grid for the built-in example; scenario files carry their own sweep
  // section and ignore this.
  std::vector<double> grid;
};

// Writes sweep.csv (value, mean_log_drift, s_star, phase).
int cmd_sweep(const ScenarioSource& source, const SweepOptions& options,
              const GlobalOptions& global, std::ostream& out);

struct FluidOptions {
  double x0 = 1.0;
  std::string tilt = "natural";  // natural | above | below
  double s = 0.5;                // exponent for the tilt search
  double eps = 1e-12;
  long long cap = 1000000;
};

// Writes fluid.csv (epoch, t_r, v1, a_r, b_r, c_r) for one sampled
// trajectory; the header comment records the tilt angle used. Exit 3 when
// the epoch window or the drain series was truncated at the cap.
int cmd_fluid(const ScenarioSource& source, const FluidOptions& options,
              const GlobalOptions& global, std::ostream& out);

struct MultOptions {
  double x0 = 1.0;
  std::string tilt = "natural";
  double s = 0.5;
  double eps = 1e-12;
  long long cap = 100000;
  long long runs = 1000;
};

// Writes mult.csv (run_id, total_time, steps, truncated): replicated
// accumulated drain totals of the multiplicative chain, under the natural
// slopes or a tilted field. Exit 3 when any run hit the step cap.
int cmd_mult(const ScenarioSource& source, const MultOptions& options,
             const GlobalOptions& global, std::ostream& out);

}  // namespace pollreg
