// Command line front end. All the work lives in pollreg_core; this file
// only binds flags and dispatches.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "pollreg/cli_commands.hpp"

using namespace pollreg;

namespace {

void bind_source(CLI::App* cmd, ScenarioSource& source) {
  cmd->add_option("file", source.path, "scenario file (JSON, // comments ok)");
  cmd->add_option("--example-p", source.example_p,
                  "use the built-in two-station example with mixture weight p");
}

void bind_tilted(CLI::App* cmd, double& x0, std::string& tilt, double& s,
                 double& eps, long long& cap) {
  cmd->add_option("--x0", x0, "initial fluid mass, positive");
  cmd->add_option("--tilt", tilt, "field tilt: natural, above, or below")
      ->check(CLI::IsMember({"natural", "above", "below"}));
  cmd->add_option("--s", s, "moment order the tilt is searched at");
  cmd->add_option("--eps", eps, "relative stopping tolerance");
  cmd->add_option("--cap", cap, "step cap before truncation is flagged");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polling system stability: analyze, simulate, drain"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOptions global;
  app.add_option("--seed", global.seed, "64-bit master seed (default 0)");
  app.add_option("--threads", global.threads,
                 "worker threads for replications (default: all cores)");
  app.add_option("--out-dir", global.out_dir,
                 "directory for CSV output (default ./out)");

  ScenarioSource validate_source;
  auto* validate = app.add_subcommand(
      "validate", "check a scenario and list every violation");
  bind_source(validate, validate_source);

  ScenarioSource analyze_source;
  AnalyzeOptions analyze_options;
  auto* analyze = app.add_subcommand(
      "analyze", "stationary law, drifts, moment curve, phase");
  bind_source(analyze, analyze_source);
  analyze->add_option("--s-min", analyze_options.s_min, "grid start");
  analyze->add_option("--s-max", analyze_options.s_max, "grid end");
  analyze->add_option("--s-step", analyze_options.s_step, "grid step");

  ScenarioSource simulate_source;
  SimulateOptions simulate_options;
  auto* simulate = app.add_subcommand(
      "simulate", "replicate the embedded chain and summarize time to empty");
  bind_source(simulate, simulate_source);
  simulate->add_option("--runs", simulate_options.runs, "replication count");
  simulate->add_option("--horizon", simulate_options.horizon,
                       "event horizon per run");
  simulate->add_option("--x1", simulate_options.x1, "initial served queue");
  simulate->add_option("--x2", simulate_options.x2, "initial idle queue");
  simulate->add_option("--s-grid", simulate_options.s_grid,
                       "moment orders for the summary")
      ->delimiter(',');
  simulate->add_option("--horizon-grid", simulate_options.horizon_grid,
                       "truncation caps for the moments (default: horizon)")
      ->delimiter(',');

  ScenarioSource sweep_source;
  SweepOptions sweep_options;
  auto* sweep = app.add_subcommand(
      "sweep", "classify the phase along a parameter grid");
  bind_source(sweep, sweep_source);
  sweep->add_option("--grid", sweep_options.grid,
                    "swept weights (used when no file sweep is given)")
      ->delimiter(',');

  ScenarioSource fluid_source;
  FluidOptions fluid_options;
  auto* fluid = app.add_subcommand(
      "fluid", "piecewise-linear drain trajectory and its coefficients");
  bind_source(fluid, fluid_source);
  bind_tilted(fluid, fluid_options.x0, fluid_options.tilt, fluid_options.s,
              fluid_options.eps, fluid_options.cap);

  ScenarioSource mult_source;
  MultOptions mult_options;
  auto* mult = app.add_subcommand(
      "mult", "replicate the multiplicative total drain time");
  bind_source(mult, mult_source);
  bind_tilted(mult, mult_options.x0, mult_options.tilt, mult_options.s,
              mult_options.eps, mult_options.cap);
  mult->add_option("--runs", mult_options.runs, "replication count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*validate) return cmd_validate(validate_source, std::cout);
  if (*analyze)
    return cmd_analyze(analyze_source, analyze_options, global, std::cout);
  if (*simulate)
    return cmd_simulate(simulate_source, simulate_options, global, std::cout);
  if (*sweep) return cmd_sweep(sweep_source, sweep_options, global, std::cout);
  if (*fluid) return cmd_fluid(fluid_source, fluid_options, global, std::cout);
  if (*mult) return cmd_mult(mult_source, mult_options, global, std::cout);
  return 2;
}
