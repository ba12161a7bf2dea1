#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pollreg/matrix.hpp"
#include "pollreg/routing.hpp"

// Scenario description and the exact stability analysis built on it.
//
// A scenario is: the routing chain, a regeneration measure per routed
// station pair (a finite mixture of service/arrival parameter atoms), a
// switching-time law per pair, and the admissibility bounds (m0, M0).
//
// The analysis pipeline:
//   slope        Y = lambda2 / (mu - lambda1), growth factor of one epoch
//   log_drift    L_i = sum_j P(i,j) E[log Y_ij]
//   moment_matrix, perron_eigenvalue
//                M_ij(s) = P(i,j) E[Y_ij^s], eta(s) its Perron root
//   critical_exponent
//                s* solving eta(s*) = 1; governs which moments of the
//                time-to-empty are finite
//   classify     transient / critical / positive or null recurrent

namespace pollreg {

enum class ServiceFamily { Exponential, Deterministic };

struct ServiceDistribution {
  ServiceFamily family = ServiceFamily::Exponential;
  double rate = 1.0;  // mu; mean service time is 1/mu for both families

  double mean() const { return 1.0 / rate; }
  double second_moment() const {
    const double m = mean();
    return family == ServiceFamily::Exponential ? 2.0 * m * m : m * m;
  }
};

struct ParamAtom {
  double weight = 1.0;  // in (0, 1]; weights of a measure sum to one
  ServiceDistribution service;
  double lambda1 = 1.0;  // arrival rate at the served station
  double lambda2 = 1.0;  // arrival rate at the other open station
};

struct RegenerationMeasure {
  std::vector<ParamAtom> atoms;
};

enum class SwitchingFamily { Zero, Deterministic, Exponential };

struct SwitchingDistribution {
  SwitchingFamily family = SwitchingFamily::Zero;
  double mean = 0.0;
};

struct ConditionEBounds {
  double m0 = 0.0;
  double M0 = 0.0;  // 0 < m0 < M0
};

using StationPair = std::pair<int, int>;  // (server station, other open), 0-based

struct ScenarioSpec {
  RoutingChain chain;
  std::map<StationPair, RegenerationMeasure> regeneration;
  std::map<StationPair, SwitchingDistribution> switching;  // absent = zero
  ConditionEBounds bounds;
};

// ---------------------------------------------------------------------------
// Validation

struct ScenarioViolation {
  int from = -1;   // 0-based pair indices; -1 for global problems
  int to = -1;
  int atom = -1;
  std::string clause;
};

struct ScenarioValidation {
  bool ok = false;
  std::vector<ScenarioViolation> violations;
};

// Admissibility of every atom: service dominates local arrivals with margin
// m0, rates and slopes live inside the (m0, M0) box. Assumes the structural
// layout is already sound.
ScenarioValidation validate_condition_e(const ScenarioSpec& spec);

// Structure first (routing valid, measures exactly on routed pairs, weights
// normalized, switching means sane), then the admissibility clauses.
ScenarioValidation validate_scenario(const ScenarioSpec& spec);

// ---------------------------------------------------------------------------
// Exact analysis

// Epoch growth factor. Throws UnstableEpochError when mu <= lambda1.
double slope(const ParamAtom& atom);

// L_i for one station (0-based).
double log_drift(const ScenarioSpec& spec, int station);

// sum_i pi_i L_i; sign decides transient vs recurrent.
double mean_log_drift(const ScenarioSpec& spec);

struct MomentMatrix {
  double s = 0.0;
  Matrix m;
};

// Requires s >= 0 (the analysis helpers evaluate negative s internally
// where the mixture moments are still finite).
MomentMatrix moment_matrix(const ScenarioSpec& spec, double s);

struct PerronResult {
  double eta = 0.0;
  std::vector<double> right;  // strictly positive, sums to one
  std::vector<double> left;   // strictly positive, sums to one
  int iterations = 0;
};

// Perron root by power iteration on M + eps*I (eps = 1e-3 * max entry; the
// shift makes periodic supports converge and is subtracted afterwards).
// Convergence is certified by the Collatz-Wielandt ratio bracket.
PerronResult perron_eigenvalue(const MomentMatrix& m);

// eta(s) for any real s (internal mixtures have finite moments of all
// orders since slopes are bounded).
double eta_at(const ScenarioSpec& spec, double s);

// Central finite difference of eta at zero, step 1e-5. Agrees with
// mean_log_drift to a few orders below 1e-4.
double eta_prime_at_zero(const ScenarioSpec& spec);

struct CriticalExponent {
  enum class Kind {
    Finite,         // eta(value) = 1, value > 0
    RootBeyondCap,  // eta stays below one up to the search cap
    NoFiniteRoot,   // mean_log_drift >= 0, no positive root exists
  };
  Kind kind = Kind::NoFiniteRoot;
  double value = 0.0;  // meaningful only when Finite
};

constexpr double kCriticalExponentCap = 64.0;

CriticalExponent critical_exponent(const ScenarioSpec& spec);

// ---------------------------------------------------------------------------
// Phase classification

enum class Phase { Transient, Critical, RecurrentPositive, RecurrentNull };

const char* to_string(Phase phase);

struct Classification {
  Phase phase = Phase::Transient;
  double mean_drift = 0.0;
  CriticalExponent s_star;
  // Human-readable statement of which moments of the time-to-empty are
  // finite; the boundary moment is always infinite.
  std::string moment_note;
  // The critical phase is recurrent only when switching times vanish.
  bool zero_switching_caveat = false;
};

Classification classify(const ScenarioSpec& spec);

}  // namespace pollreg
