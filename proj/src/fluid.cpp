#include "pollreg/fluid.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "pollreg/errors.hpp"
#include "pollreg/routing.hpp"

namespace pollreg {

namespace {

constexpr double kHalfPi = 1.5707963267948966;

AtomSample make_sample(const ParamAtom& atom) {
  AtomSample sample;
  sample.family = atom.service.family;
  sample.rate = atom.service.rate;
  sample.lambda1 = atom.lambda1;
  sample.lambda2 = atom.lambda2;
  sample.slope = slope(atom);
  sample.log_slope = std::log(sample.slope);
  return sample;
}

}  // namespace

DriftVector natural_drift(const AtomSample& atom) {
  return DriftVector{1.0 - atom.lambda1 / atom.rate, atom.lambda2 / atom.rate};
}

DriftVector tilt_drift(const DriftVector& natural, const FieldTilt& tilt) {
  if (tilt.mode == TiltMode::Natural) return natural;
  if (!(tilt.theta_prime >= 0.0)) {
    throw std::invalid_argument("tilt angle must be nonnegative");
  }
  const double theta0 = std::atan2(natural.d2, natural.d1);
  const double theta = tilt.mode == TiltMode::Above
                           ? theta0 + tilt.theta_prime
                           : theta0 - tilt.theta_prime;
  if (theta <= 0.0 || theta >= kHalfPi) {
    throw TiltOutOfRangeError("tilted drift angle left (0, pi/2)");
  }
  const double norm = std::hypot(natural.d1, natural.d2);
  return DriftVector{norm * std::cos(theta), norm * std::sin(theta)};
}

double tilted_slope(const AtomSample& atom, const FieldTilt& tilt) {
  if (tilt.mode == TiltMode::Natural) return atom.slope;
  const DriftVector field = tilt_drift(natural_drift(atom), tilt);
  return field.d2 / field.d1;
}

double tilted_eta(const ScenarioSpec& spec, const FieldTilt& tilt, double s) {
  const int d = spec.chain.d;
  Matrix m(d, d);
  for (const auto& [pair, measure] : spec.regeneration) {
    double mixed = 0.0;
    for (const auto& atom : measure.atoms) {
      mixed += atom.weight * std::pow(tilted_slope(make_sample(atom), tilt), s);
    }
    m.at(pair.first, pair.second) =
        spec.chain.p.at(pair.first, pair.second) * mixed;
  }
  return perron_eigenvalue(MomentMatrix{s, m}).eta;
}

double tilted_mean_log_drift(const ScenarioSpec& spec, const FieldTilt& tilt) {
  const auto pi = stationary_distribution(spec.chain).pi;
  double drift = 0.0;
  for (const auto& [pair, measure] : spec.regeneration) {
    double mean_log = 0.0;
    for (const auto& atom : measure.atoms) {
      mean_log +=
          atom.weight * std::log(tilted_slope(make_sample(atom), tilt));
    }
    drift += pi[static_cast<std::size_t>(pair.first)] *
             spec.chain.p.at(pair.first, pair.second) * mean_log;
  }
  return drift;
}

FieldTilt find_s_neutral_tilt(const ScenarioSpec& spec, double s,
                              TiltMode mode) {
  if (mode == TiltMode::Natural) {
    throw std::invalid_argument("tilt search needs Above or Below");
  }
  const double eta0 = eta_at(spec, s);
  if (mode == TiltMode::Above && !(eta0 < 1.0)) {
    throw PreconditionError("Above tilt needs eta(s) < 1 to start with");
  }
  if (mode == TiltMode::Below && !(eta0 > 1.0)) {
    throw PreconditionError("Below tilt needs eta(s) > 1 to start with");
  }
  for (double theta = kTiltLadderStart; theta >= kTiltLadderFloor;
       theta *= 0.5) {
    const FieldTilt candidate{mode, theta};
    bool admissible = true;
    double eta_tilted = 0.0;
    try {
      eta_tilted = tilted_eta(spec, candidate, s);
    } catch (const TiltOutOfRangeError&) {
      admissible = false;
    }
    if (admissible) {
      admissible = mode == TiltMode::Above ? eta_tilted < 1.0 : eta_tilted > 1.0;
    }
    if (admissible) return candidate;
  }
  throw NoAdmissibleTiltError(
      "no tilt above the ladder floor keeps eta on its side of one");
}

// ---------------------------------------------------------------------------
// Parameter paths

ParamPath sample_path(const ScenarioSampler& sampler, long long epochs,
                      Rng& rng, int start_station) {
  ParamPath path;
  path.reserve(static_cast<std::size_t>(epochs));
  int server = start_station;
  for (long long r = 0; r < epochs; ++r) {
    const int other = sampler.next_station(server, rng);
    path.push_back(EpochParams{server, other,
                               sampler.sample_atom(server, other, rng)});
    server = other;
  }
  return path;
}

ParamPath sample_path_until_product(const ScenarioSampler& sampler,
                                    const FieldTilt& tilt,
                                    double product_floor, long long cap,
                                    Rng& rng, int start_station) {
  ParamPath path;
  int server = start_station;
  double product = 1.0;
  while (static_cast<long long>(path.size()) < cap) {
    const int other = sampler.next_station(server, rng);
    path.push_back(EpochParams{server, other,
                               sampler.sample_atom(server, other, rng)});
    server = other;
    product *= tilted_slope(path.back().atom, tilt);
    if (product < product_floor) break;
  }
  return path;
}

// ---------------------------------------------------------------------------
// Trajectories

namespace {

using EpochProvider = std::function<const EpochParams*(long long)>;

FluidTrajectory advance_core(const FieldTilt& tilt, double x0,
                             const FluidStopRule& stop,
                             const EpochProvider& provider) {
  if (!(x0 > 0.0)) throw std::invalid_argument("x0 must be positive");
  FluidTrajectory traj;
  traj.t.push_back(0.0);
  traj.v1.push_back(x0);
  const double boundary_floor = kBoundaryFloorFactor * x0;
  double product = 1.0;
  long long r = 0;
  for (;;) {
    if (stop.ball && traj.v1.back() <= *stop.ball) {
      traj.hit_ball = true;
      break;
    }
    if (stop.epochs && r >= *stop.epochs) break;
    if (r >= stop.cap) {
      traj.truncated = true;
      break;
    }
    const EpochParams* epoch = provider(r);
    if (epoch == nullptr) {
      traj.truncated = true;
      break;
    }
    const DriftVector field = tilt_drift(natural_drift(epoch->atom), tilt);
    const double slope = tilt.mode == TiltMode::Natural
                             ? epoch->atom.slope
                             : field.d2 / field.d1;
    traj.path.push_back(*epoch);
    traj.field.push_back(field);
    traj.t.push_back(traj.t.back() + epoch_duration(field, traj.v1.back()));
    traj.v1.push_back(traj.v1.back() * slope);
    product *= slope;
    ++r;
    if (traj.v1.back() < boundary_floor) {
      traj.truncated = true;
      break;
    }
  }
  traj.coefficients_complete = product < kCoefficientProductFloor;

  const std::size_t epochs = traj.path.size();
  traj.a.assign(epochs + 1, 0.0);
  traj.b.assign(epochs, 0.0);
  traj.phi.assign(epochs, 0.0);
  for (std::size_t k = epochs; k-- > 0;) {
    traj.a[k] = (1.0 + traj.a[k + 1] * traj.field[k].d2) / traj.field[k].d1;
    traj.b[k] = traj.a[k + 1];
    traj.phi[k] = std::max(traj.a[k], traj.b[k]);
  }
  traj.c.assign(epochs + 1, 1.0);
  for (std::size_t k = 0; k < epochs; ++k) {
    const double slope = tilt.mode == TiltMode::Natural
                             ? traj.path[k].atom.slope
                             : traj.field[k].d2 / traj.field[k].d1;
    traj.c[k + 1] = traj.c[k] / slope;
  }
  return traj;
}

}  // namespace

FluidTrajectory advance_trajectory(const ScenarioSampler& sampler,
                                   const FieldTilt& tilt, double x0,
                                   const FluidStopRule& stop, Rng& rng,
                                   int start_station) {
  int server = start_station;
  EpochParams scratch;
  const EpochProvider provider = [&](long long) -> const EpochParams* {
    const int other = sampler.next_station(server, rng);
    scratch = EpochParams{server, other, sampler.sample_atom(server, other, rng)};
    server = other;
    return &scratch;
  };
  return advance_core(tilt, x0, stop, provider);
}

FluidTrajectory replay_trajectory(const FieldTilt& tilt, double x0,
                                  const FluidStopRule& stop,
                                  const ParamPath& path) {
  const EpochProvider provider = [&](long long r) -> const EpochParams* {
    if (r >= static_cast<long long>(path.size())) return nullptr;
    return &path[static_cast<std::size_t>(r)];
  };
  return advance_core(tilt, x0, stop, provider);
}

// ---------------------------------------------------------------------------
// Total drain time

namespace {

struct EpochRates {
  double d1 = 0.0;
  double d2 = 0.0;
  double slope = 0.0;
};

using RateProvider = std::function<bool(long long, EpochRates*)>;

FluidTotalTime total_time_core(const RateProvider& provider, double x0,
                               double eps, long long cap) {
  if (!(x0 > 0.0)) throw std::invalid_argument("x0 must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  FluidTotalTime result;
  double v1 = x0;
  double product = 1.0;
  result.truncated = true;
  while (result.steps < cap) {
    EpochRates rates;
    if (!provider(result.steps, &rates)) break;
    result.t_empty += v1 / rates.d1;
    v1 *= rates.slope;
    product *= rates.slope;
    result.product_series += product;
    ++result.steps;
    if (product < eps) {
      result.truncated = false;
      break;
    }
  }
  return result;
}

EpochRates rates_for(const AtomSample& atom, const FieldTilt& tilt) {
  const DriftVector field = tilt_drift(natural_drift(atom), tilt);
  const double slope = tilt.mode == TiltMode::Natural ? atom.slope
                                                      : field.d2 / field.d1;
  return EpochRates{field.d1, field.d2, slope};
}

}  // namespace

FluidTotalTime total_time(const ScenarioSampler& sampler,
                          const FieldTilt& tilt, double x0, double eps,
                          long long cap, Rng& rng, int start_station) {
  int server = start_station;
  const RateProvider provider = [&](long long, EpochRates* rates) {
    const int other = sampler.next_station(server, rng);
    *rates = rates_for(sampler.sample_atom(server, other, rng), tilt);
    server = other;
    return true;
  };
  return total_time_core(provider, x0, eps, cap);
}

FluidTotalTime total_time_on_path(const ParamPath& path, const FieldTilt& tilt,
                                  double x0, double eps, long long cap) {
  const RateProvider provider = [&](long long r, EpochRates* rates) {
    if (r >= static_cast<long long>(path.size())) return false;
    *rates = rates_for(path[static_cast<std::size_t>(r)].atom, tilt);
    return true;
  };
  return total_time_core(provider, x0, eps, cap);
}

FluidTotalTime total_time_on_fields(const std::vector<DriftVector>& fields,
                                    double x0, double eps, long long cap) {
  const RateProvider provider = [&](long long r, EpochRates* rates) {
    if (r >= static_cast<long long>(fields.size())) return false;
    const DriftVector& f = fields[static_cast<std::size_t>(r)];
    *rates = EpochRates{f.d1, f.d2, f.d2 / f.d1};
    return true;
  };
  return total_time_core(provider, x0, eps, cap);
}

// ---------------------------------------------------------------------------
// Lyapunov evaluations

RemainingLife remaining_life(const FieldTilt& tilt, const ParamPath& path,
                             std::size_t epoch, double x1, double x2,
                             double ball, long long cap) {
  if (!(ball >= 0.0)) throw std::invalid_argument("ball must be nonnegative");
  if (!(x1 >= 0.0) || !(x2 >= 0.0)) {
    throw std::invalid_argument("state components must be nonnegative");
  }
  RemainingLife life;
  double v1 = x1;
  double v2 = x2;
  std::size_t r = epoch;
  while (true) {
    if (v1 + v2 <= ball) return life;
    if (life.epochs_used >= cap || r >= path.size()) {
      life.truncated = true;
      return life;
    }
    const EpochRates rates = rates_for(path[r].atom, tilt);
    const double drain = v1 / rates.d1;  // time this epoch lasts
    const double net = rates.d1 - rates.d2;
    if (net > 0.0) {
      const double crossing = (v1 + v2 - ball) / net;
      if (crossing <= drain) {
        life.time += crossing;
        return life;
      }
    }
    life.time += drain;
    const double carried = v2 + v1 * rates.slope;
    v1 = carried;
    v2 = 0.0;
    ++r;
    ++life.epochs_used;
  }
}

double initial_value(const FieldTilt& tilt, const ParamPath& path,
                     std::size_t epoch, double x1, double x2) {
  if (epoch >= path.size()) {
    throw std::out_of_range("epoch index beyond the parameter path");
  }
  double c = 1.0;
  for (std::size_t k = 0; k < epoch; ++k) {
    c /= rates_for(path[k].atom, tilt).slope;
  }
  const double c_next = c / rates_for(path[epoch].atom, tilt).slope;
  return c * x1 + c_next * x2;
}

// ---------------------------------------------------------------------------
// Drift diagnostics

DriftDiagnostic drift_diagnostic(const FluidTrajectory& trajectory,
                                 std::size_t epoch,
                                 const ScenarioSampler& sampler,
                                 long long mc_rounds, Rng& rng) {
  if (epoch >= trajectory.path.size()) {
    throw std::out_of_range("epoch index beyond the trajectory");
  }
  if (mc_rounds < 2) throw std::invalid_argument("need at least two rounds");
  const AtomSample& atom = trajectory.path[epoch].atom;
  const DriftVector nat = natural_drift(atom);
  DriftDiagnostic diag;
  diag.phi = trajectory.phi[epoch];
  diag.c = trajectory.c[epoch];
  const double a = trajectory.a[epoch];
  const double b = trajectory.b[epoch];
  const double c_next = trajectory.c[epoch + 1];
  diag.exact_df = -a * nat.d1 + b * nat.d2;
  diag.exact_dg = -diag.c * nat.d1 + c_next * nat.d2;

  double mean_f = 0.0, m2_f = 0.0;
  double mean_g = 0.0, m2_g = 0.0;
  for (long long round = 0; round < mc_rounds; ++round) {
    const double service = sampler.sample_service(atom, rng);
    const double arrived1 =
        static_cast<double>(sample_poisson(rng, atom.lambda1 * service));
    const double arrived2 =
        static_cast<double>(sample_poisson(rng, atom.lambda2 * service));
    const double df = a * (arrived1 - 1.0) + b * arrived2;
    const double dg = diag.c * (arrived1 - 1.0) + c_next * arrived2;
    const double delta_f = df - mean_f;
    mean_f += delta_f / static_cast<double>(round + 1);
    m2_f += delta_f * (df - mean_f);
    const double delta_g = dg - mean_g;
    mean_g += delta_g / static_cast<double>(round + 1);
    m2_g += delta_g * (dg - mean_g);
  }
  const double denom =
      static_cast<double>(mc_rounds) * static_cast<double>(mc_rounds - 1);
  diag.mc_df = mean_f;
  diag.mc_df_se = std::sqrt(m2_f / denom);
  diag.mc_dg = mean_g;
  diag.mc_dg_se = std::sqrt(m2_g / denom);
  return diag;
}

}  // namespace pollreg
