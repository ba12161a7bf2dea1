#pragma once

#include <optional>
#include <vector>

#include "pollreg/parameters.hpp"
#include "pollreg/rng.hpp"
#include "pollreg/sampler.hpp"

// Piecewise linear fluid caricature of the polling dynamics.
//
// Between switches the served queue drains at constant rate d1 while the
// other open queue fills at rate d2; at a switch the roles transpose and
// fresh rates are drawn. Every trajectory quantity here follows from the
// closed epoch-by-epoch form: nothing is time discretized. On top of the
// trajectories the module builds the per-path linear ladders (remaining
// drain time and conserved axis coordinate) whose one-step drifts certify
// recurrence or escape, and the angular field tilts that keep those
// ladders on the wanted side of criticality.

namespace pollreg {

// Drift of one epoch: the served queue drains at d1 > 0, the other fills
// at d2 > 0, and d2/d1 equals the epoch slope.
struct DriftVector {
  double d1 = 0.0;
  double d2 = 0.0;
};

// Fluid drift of an atom under the untilted dynamics: serving station
// loses 1 - lambda1/mu jobs per unit time, the other gains lambda2/mu.
DriftVector natural_drift(const AtomSample& atom);

// Time for the served queue to drain from v1 under the given field.
inline double epoch_duration(const DriftVector& field, double v1) {
  return v1 / field.d1;
}

enum class TiltMode { Natural, Above, Below };

struct FieldTilt {
  TiltMode mode = TiltMode::Natural;
  double theta_prime = 0.0;
};

// Rotate the drift by theta_prime, preserving its norm: Above steepens the
// angle (the idle queue fills relatively faster), Below flattens it.
// Throws TiltOutOfRangeError when the tilted angle leaves (0, pi/2).
// Natural mode returns the input unchanged.
DriftVector tilt_drift(const DriftVector& natural, const FieldTilt& tilt);

// Slope of one epoch under the tilt: the atom's own slope for Natural
// mode, tan of the tilted angle otherwise.
double tilted_slope(const AtomSample& atom, const FieldTilt& tilt);

// Spectral quantities with every atom's slope replaced by its tilted
// value. Natural mode reproduces eta_at and mean_log_drift.
double tilted_eta(const ScenarioSpec& spec, const FieldTilt& tilt, double s);
double tilted_mean_log_drift(const ScenarioSpec& spec, const FieldTilt& tilt);

constexpr double kTiltLadderStart = 0.1;
constexpr double kTiltLadderFloor = 1e-6;

// Largest tilt in the halving ladder from kTiltLadderStart that keeps
// eta(s) on the side of one it started on while every atom's tilted angle
// stays inside (0, pi/2). Above requires eta(s) < 1 and keeps it below;
// Below requires eta(s) > 1 and keeps it above (PreconditionError when
// the starting side is wrong). Throws NoAdmissibleTiltError when the
// ladder reaches the floor without an admissible rung.
FieldTilt find_s_neutral_tilt(const ScenarioSpec& spec, double s,
                              TiltMode mode);

// ---------------------------------------------------------------------------
// Parameter paths and trajectories

// One epoch of the parameter path: which pair serves and the atom drawn.
struct EpochParams {
  int server = 0;
  int other = 0;
  AtomSample atom;
};

using ParamPath = std::vector<EpochParams>;

ParamPath sample_path(const ScenarioSampler& sampler, long long epochs,
                      Rng& rng, int start_station = 0);

// Sample epochs until the running product of tilted slopes drops below
// product_floor (or the cap is hit); long enough paths make coefficient
// ladders complete.
ParamPath sample_path_until_product(const ScenarioSampler& sampler,
                                    const FieldTilt& tilt,
                                    double product_floor, long long cap,
                                    Rng& rng, int start_station = 0);

struct FluidStopRule {
  std::optional<long long> epochs;  // stop after this many epochs
  std::optional<double> ball;       // stop at the first boundary with v1 <= ball
  long long cap = 1000000;          // unconditional epoch cap, flagged truncated
};

// Coefficient ladders are cut off once the slope product falls below this;
// the discarded tail is of the same relative size.
constexpr double kCoefficientProductFloor = 1e-12;

// Boundary positions below this multiple of x0 stop the trajectory before
// the products degrade into denormals.
constexpr double kBoundaryFloorFactor = 1e-300;

// A trajectory with R epochs: boundary r sits at time t[r] with the served
// queue at v1[r] and the other queue empty; epoch r runs under path[r] and
// field[r]. The ladders satisfy, per epoch,
//   a[r] * d1(r) = 1 + b[r] * d2(r),   b[r] = a[r+1],
//   c[r+1] = c[r] / slope(r),          phi[r] = max(a[r], b[r]),
// with a seeded at zero past the last epoch, so a[r] is the drain time of
// a unit served queue over the recorded window and c is the conserved
// axis coordinate scale with c[0] = 1.
struct FluidTrajectory {
  std::vector<double> t;    // size R+1, t[0] = 0
  std::vector<double> v1;   // size R+1, v1[0] = x0
  ParamPath path;           // size R
  std::vector<DriftVector> field;  // size R, tilted drift in force
  std::vector<double> a;    // size R+1, a[R] = 0
  std::vector<double> b;    // size R, b[r] = a[r+1]
  std::vector<double> c;    // size R+1, c[0] = 1
  std::vector<double> phi;  // size R
  bool coefficients_complete = false;  // slope product reached the floor
  bool hit_ball = false;
  bool truncated = false;  // stopped by the cap, the boundary floor, or a
                           // replayed path running out
};

FluidTrajectory advance_trajectory(const ScenarioSampler& sampler,
                                   const FieldTilt& tilt, double x0,
                                   const FluidStopRule& stop, Rng& rng,
                                   int start_station = 0);

// Same advance along a fixed parameter path.
FluidTrajectory replay_trajectory(const FieldTilt& tilt, double x0,
                                  const FluidStopRule& stop,
                                  const ParamPath& path);

// ---------------------------------------------------------------------------
// Total drain time

struct FluidTotalTime {
  // Time for the trajectory to drain to nothing: x0 times the series of
  // slope products divided by the epoch fill rates.
  double t_empty = 0.0;
  // The bare series of slope products; with x0 = 1 its partial sums match
  // the multiplicative chain's total-time partials term by term.
  double product_series = 0.0;
  long long steps = 0;
  bool truncated = false;
};

// Accumulate until the slope product falls below eps (or cap, flagged).
// Requires x0 > 0 and eps > 0.
FluidTotalTime total_time(const ScenarioSampler& sampler,
                          const FieldTilt& tilt, double x0, double eps,
                          long long cap, Rng& rng, int start_station = 0);

FluidTotalTime total_time_on_path(const ParamPath& path, const FieldTilt& tilt,
                                  double x0, double eps, long long cap);

// Fixture hook: the same accumulation over an explicit field sequence.
FluidTotalTime total_time_on_fields(const std::vector<DriftVector>& fields,
                                    double x0, double eps, long long cap);

// ---------------------------------------------------------------------------
// Lyapunov evaluations at mid-epoch states

// State (x1, x2) sits inside epoch r of the path: x1 on the served queue,
// x2 on the filling one.

struct RemainingLife {
  double time = 0.0;
  long long epochs_used = 0;
  bool truncated = false;  // cap or path end before reaching the ball
};

// Time to reach the ball {x1 + x2 <= ball} from the state, integrating the
// tilted field forward in closed form; crossings inside an epoch are
// resolved exactly.
RemainingLife remaining_life(const FieldTilt& tilt, const ParamPath& path,
                             std::size_t epoch, double x1, double x2,
                             double ball, long long cap = 1000000);

// Conserved axis coordinate c[r] * x1 + c[r+1] * x2 of the state; constant
// along the fluid flow. Requires epoch + 1 <= path size.
double initial_value(const FieldTilt& tilt, const ParamPath& path,
                     std::size_t epoch, double x1, double x2);

// ---------------------------------------------------------------------------
// One-step drift diagnostics

// Exact one-event mean change of the two linear forms at boundary r,
// evaluated against the untilted dynamics, next to Monte Carlo estimates
// of the same quantities obtained by sampling one service completion the
// way the event simulation does (service duration, then Poisson arrivals
// on both queues).
struct DriftDiagnostic {
  double exact_df = 0.0;  // -a[r] d1 + b[r] d2, natural drift components
  double exact_dg = 0.0;  // -c[r] d1 + c[r+1] d2
  double phi = 0.0;       // max(a[r], b[r])
  double c = 0.0;         // c[r]
  double mc_df = 0.0;
  double mc_df_se = 0.0;
  double mc_dg = 0.0;
  double mc_dg_se = 0.0;
};

DriftDiagnostic drift_diagnostic(const FluidTrajectory& trajectory,
                                 std::size_t epoch,
                                 const ScenarioSampler& sampler,
                                 long long mc_rounds, Rng& rng);

}  // namespace pollreg
