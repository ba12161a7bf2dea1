#include "pollreg/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pollreg/errors.hpp"

namespace pollreg {

namespace {

constexpr double kWeightSumTolerance = 1e-12;
constexpr double kCriticalDriftTolerance = 1e-12;

// Moment matrix for any real exponent; the public wrapper restricts to
// s >= 0 but finite difference at zero needs a small negative step.
Matrix moment_matrix_any(const ScenarioSpec& spec, double s) {
  const int d = spec.chain.d;
  Matrix m(d, d);
  for (const auto& [pair, measure] : spec.regeneration) {
    double acc = 0.0;
    for (const auto& atom : measure.atoms) {
      acc += atom.weight * std::pow(slope(atom), s);
    }
    m.at(pair.first, pair.second) =
        spec.chain.p.at(pair.first, pair.second) * acc;
  }
  return m;
}

struct PowerIterationResult {
  double value = 0.0;
  std::vector<double> vec;
  int iterations = 0;
};

// Balancing (EISPACK-style): a diagonal similarity with power-of-two
// factors that makes each row sum comparable to its column sum. Moment
// matrices reach wildly different entry scales at large exponents
// (slope^s against slope^-s); without balancing, a shift sized by the max
// entry swamps the Perron root and the iteration cannot resolve it. The
// spectrum is unchanged and power-of-two factors keep the arithmetic
// exact. Returns the diagonal D with the matrix rewritten as D^-1 A D.
std::vector<double> balance_in_place(Matrix& a) {
  const int n = a.rows;
  std::vector<double> scale(static_cast<std::size_t>(n), 1.0);
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      double row = 0.0, col = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        row += std::abs(a.at(i, j));
        col += std::abs(a.at(j, i));
      }
      if (!(row > 0.0) || !(col > 0.0)) continue;
      const double before = col + row;
      double c = col, f = 1.0;
      while (c < row / 2.0) {
        f *= 2.0;
        c *= 4.0;
      }
      while (c >= row * 2.0) {
        f /= 2.0;
        c /= 4.0;
      }
      // Only rescale while it shrinks the combined sums; this makes the
      // sweep loop terminate instead of hunting around the fixed point.
      if ((c + row) / f < 0.95 * before) {
        scale[i] *= f;
        for (int j = 0; j < n; ++j) {
          a.at(i, j) /= f;
          a.at(j, i) *= f;
        }
        changed = true;
      }
    }
    if (!changed) break;
  }
  return scale;
}

// Power iteration with Collatz-Wielandt stopping: for a nonnegative
// irreducible A with positive diagonal, min_i (Av)_i/v_i and
// max_i (Av)_i/v_i bracket the Perron root.
PowerIterationResult power_iterate(const Matrix& a, bool transposed) {
  const int n = a.rows;
  std::vector<double> v(static_cast<std::size_t>(n), 1.0 / n);
  constexpr int kMaxIterations = 100000;
  constexpr double kRelTolerance = 1e-12;
  for (int iter = 1; iter <= kMaxIterations; ++iter) {
    const auto w = transposed ? matvec_transposed(a, v) : matvec(a, v);
    double lo = w[0] / v[0];
    double hi = lo;
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = w[i] / v[i];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      norm += w[i];
    }
    if (hi - lo <= kRelTolerance * hi) {
      std::vector<double> unit(w);
      for (double& x : unit) x /= norm;
      return {0.5 * (lo + hi), std::move(unit), iter};
    }
    v = w;
    for (double& x : v) x /= norm;
  }
  throw NoConvergenceError("power iteration did not converge");
}

double perron_value(const Matrix& m) {
  Matrix balanced = m;
  balance_in_place(balanced);
  double max_entry = 0.0;
  for (double v : balanced.data) max_entry = std::max(max_entry, v);
  if (max_entry <= 0.0) return 0.0;
  const double shift = 1e-3 * max_entry;
  for (int i = 0; i < balanced.rows; ++i) balanced.at(i, i) += shift;
  return power_iterate(balanced, false).value - shift;
}

void check_pair_indices(const ScenarioSpec& spec) {
  const int d = spec.chain.d;
  for (const auto& [pair, measure] : spec.regeneration) {
    (void)measure;
    if (pair.first < 0 || pair.first >= d || pair.second < 0 ||
        pair.second >= d) {
      throw std::invalid_argument("regeneration pair out of range");
    }
  }
}

}  // namespace

double slope(const ParamAtom& atom) {
  const double mu = atom.service.rate;
  if (mu <= atom.lambda1) {
    std::ostringstream msg;
    msg << "service rate " << mu << " does not dominate arrival rate "
        << atom.lambda1;
    throw UnstableEpochError(msg.str());
  }
  return atom.lambda2 / (mu - atom.lambda1);
}

ScenarioValidation validate_condition_e(const ScenarioSpec& spec) {
  ScenarioValidation result;
  const double m0 = spec.bounds.m0;
  const double big = spec.bounds.M0;

  auto flag = [&](const StationPair& pair, int atom_index, std::string clause) {
    result.violations.push_back(
        {pair.first, pair.second, atom_index, std::move(clause)});
  };

  if (!(m0 > 0.0 && m0 < big)) {
    result.violations.push_back({-1, -1, -1, "bounds need 0 < m0 < M0"});
    return result;
  }

  for (const auto& [pair, measure] : spec.regeneration) {
    for (std::size_t k = 0; k < measure.atoms.size(); ++k) {
      const auto& atom = measure.atoms[k];
      const int ki = static_cast<int>(k);
      const double mu = atom.service.rate;
      if (!(atom.lambda1 + m0 < mu)) {
        flag(pair, ki, "service rate must exceed lambda1 + m0");
      }
      if (!(mu < big)) flag(pair, ki, "service rate must stay below M0");
      if (!(atom.lambda1 > m0 && atom.lambda1 < big)) {
        flag(pair, ki, "lambda1 must lie strictly inside (m0, M0)");
      }
      if (!(atom.lambda2 > m0 && atom.lambda2 < big)) {
        flag(pair, ki, "lambda2 must lie strictly inside (m0, M0)");
      }
      if (mu > atom.lambda1) {
        const double y = slope(atom);
        // Slope support must satisfy 1/M0 < Y <= M0: no mass at or below
        // 1/M0, all mass at or below M0.
        if (!(y > 1.0 / big)) flag(pair, ki, "slope must exceed 1/M0");
        if (!(y <= big)) flag(pair, ki, "slope must not exceed M0");
      }
    }
  }
  result.ok = result.violations.empty();
  return result;
}

ScenarioValidation validate_scenario(const ScenarioSpec& spec) {
  ScenarioValidation result;

  const auto routing = validate(spec.chain);
  if (!routing.ok) {
    for (const auto& v : routing.violations) {
      result.violations.push_back(
          {v.index, -1, -1, std::string(to_string(v.kind)) + ": " + v.detail});
    }
    return result;
  }

  const int d = spec.chain.d;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const bool routed = spec.chain.p.at(i, j) > kEdgeZeroTolerance;
      const bool has_measure = spec.regeneration.count({i, j}) > 0;
      if (routed && !has_measure) {
        result.violations.push_back(
            {i, j, -1, "routed pair is missing a regeneration measure"});
      }
      if (!routed && has_measure) {
        result.violations.push_back(
            {i, j, -1, "regeneration measure on a pair with no routing mass"});
      }
      if (!routed && spec.switching.count({i, j}) > 0) {
        result.violations.push_back(
            {i, j, -1, "switching law on a pair with no routing mass"});
      }
    }
  }

  for (const auto& [pair, measure] : spec.regeneration) {
    if (pair.first < 0 || pair.first >= d || pair.second < 0 ||
        pair.second >= d) {
      result.violations.push_back(
          {pair.first, pair.second, -1, "pair index out of range"});
      continue;
    }
    if (measure.atoms.empty()) {
      result.violations.push_back({pair.first, pair.second, -1, "no atoms"});
      continue;
    }
    double total = 0.0;
    for (std::size_t k = 0; k < measure.atoms.size(); ++k) {
      const auto& atom = measure.atoms[k];
      if (!(atom.weight > 0.0 && atom.weight <= 1.0)) {
        result.violations.push_back({pair.first, pair.second,
                                     static_cast<int>(k),
                                     "atom weight must lie in (0, 1]"});
      }
      if (!(atom.service.rate > 0.0)) {
        result.violations.push_back({pair.first, pair.second,
                                     static_cast<int>(k),
                                     "service rate must be positive"});
      }
      total += atom.weight;
    }
    if (std::abs(total - 1.0) > kWeightSumTolerance) {
      std::ostringstream msg;
      msg << "atom weights sum to " << total;
      result.violations.push_back({pair.first, pair.second, -1, msg.str()});
    }
  }

  for (const auto& [pair, sw] : spec.switching) {
    if (sw.family != SwitchingFamily::Zero && !(sw.mean > 0.0)) {
      result.violations.push_back(
          {pair.first, pair.second, -1, "switching mean must be positive"});
    }
    if (sw.family == SwitchingFamily::Zero && sw.mean != 0.0) {
      result.violations.push_back(
          {pair.first, pair.second, -1, "zero switching cannot carry a mean"});
    }
  }

  if (!result.violations.empty()) return result;

  const auto cond_e = validate_condition_e(spec);
  result.violations = cond_e.violations;
  result.ok = result.violations.empty();
  return result;
}

double log_drift(const ScenarioSpec& spec, int station) {
  if (station < 0 || station >= spec.chain.d) {
    throw std::invalid_argument("station index out of range");
  }
  double acc = 0.0;
  for (const auto& [pair, measure] : spec.regeneration) {
    if (pair.first != station) continue;
    double mean_log = 0.0;
    for (const auto& atom : measure.atoms) {
      mean_log += atom.weight * std::log(slope(atom));
    }
    acc += spec.chain.p.at(pair.first, pair.second) * mean_log;
  }
  return acc;
}

double mean_log_drift(const ScenarioSpec& spec) {
  const auto law = stationary_distribution(spec.chain);
  double acc = 0.0;
  for (int i = 0; i < spec.chain.d; ++i) {
    acc += law.pi[i] * log_drift(spec, i);
  }
  return acc;
}

MomentMatrix moment_matrix(const ScenarioSpec& spec, double s) {
  if (s < 0.0) throw std::invalid_argument("moment matrix needs s >= 0");
  check_pair_indices(spec);
  return MomentMatrix{s, moment_matrix_any(spec, s)};
}

PerronResult perron_eigenvalue(const MomentMatrix& m) {
  for (double v : m.m.data) {
    if (v < 0.0) throw std::invalid_argument("moment matrix must be nonnegative");
  }
  Matrix balanced = m.m;
  const auto scale = balance_in_place(balanced);
  double max_entry = 0.0;
  for (double v : balanced.data) max_entry = std::max(max_entry, v);
  if (max_entry <= 0.0) {
    throw std::invalid_argument("moment matrix must have a positive entry");
  }
  const double shift = 1e-3 * max_entry;
  for (int i = 0; i < balanced.rows; ++i) balanced.at(i, i) += shift;

  auto right = power_iterate(balanced, false);
  auto left = power_iterate(balanced, true);
  // Undo the similarity B = D^-1 A D: right vectors pick up D, left
  // vectors 1/D.
  double rsum = 0.0, lsum = 0.0;
  for (int i = 0; i < balanced.rows; ++i) {
    right.vec[i] *= scale[i];
    left.vec[i] /= scale[i];
    rsum += right.vec[i];
    lsum += left.vec[i];
  }
  for (int i = 0; i < balanced.rows; ++i) {
    right.vec[i] /= rsum;
    left.vec[i] /= lsum;
  }
  return PerronResult{right.value - shift, std::move(right.vec),
                      std::move(left.vec),
                      std::max(right.iterations, left.iterations)};
}

double eta_at(const ScenarioSpec& spec, double s) {
  check_pair_indices(spec);
  return perron_value(moment_matrix_any(spec, s));
}

double eta_prime_at_zero(const ScenarioSpec& spec) {
  constexpr double kStep = 1e-5;
  return (eta_at(spec, kStep) - eta_at(spec, -kStep)) / (2.0 * kStep);
}

CriticalExponent critical_exponent(const ScenarioSpec& spec) {
  const double drift = mean_log_drift(spec);
  if (drift >= 0.0) return {CriticalExponent::Kind::NoFiniteRoot, 0.0};

  if (eta_at(spec, kCriticalExponentCap) < 1.0) {
    return {CriticalExponent::Kind::RootBeyondCap, 0.0};
  }

  // eta is log-convex with eta(0) = 1 and negative derivative there, so it
  // dips below one immediately; find a resolvable point of the dip.
  double lo = 0.0;
  bool bracketed = false;
  for (double candidate : {1e-6, 1e-4, 1e-2, 0.1, 0.5, 1.0, 4.0, 16.0}) {
    if (candidate >= kCriticalExponentCap) break;
    if (eta_at(spec, candidate) < 1.0) {
      lo = candidate;
      bracketed = true;
      break;
    }
  }
  if (!bracketed) {
    throw NoConvergenceError(
        "drift is negative but eta is numerically indistinguishable from one "
        "near zero");
  }

  double hi = kCriticalExponentCap;
  // Bisect well below the published 1e-6 accuracy so that eta(s*) sits
  // within 1e-9 of one even for steep eta.
  while (hi - lo > 1e-11 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (eta_at(spec, mid) < 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {CriticalExponent::Kind::Finite, 0.5 * (lo + hi)};
}

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::Transient: return "TRANSIENT";
    case Phase::Critical: return "CRITICAL";
    case Phase::RecurrentPositive: return "RECURRENT/POSITIVE";
    case Phase::RecurrentNull: return "RECURRENT/NULL";
  }
  return "UNKNOWN";
}

Classification classify(const ScenarioSpec& spec) {
  Classification result;
  result.mean_drift = mean_log_drift(spec);

  if (std::abs(result.mean_drift) <= kCriticalDriftTolerance) {
    result.phase = Phase::Critical;
    result.s_star = {CriticalExponent::Kind::NoFiniteRoot, 0.0};
    result.zero_switching_caveat = true;
    result.moment_note =
        "critical: recurrent only when switching times vanish";
    return result;
  }
  if (result.mean_drift > 0.0) {
    result.phase = Phase::Transient;
    result.s_star = {CriticalExponent::Kind::NoFiniteRoot, 0.0};
    result.moment_note = "transient: the system empties with probability < 1";
    return result;
  }

  result.s_star = critical_exponent(spec);
  std::ostringstream note;
  if (result.s_star.kind == CriticalExponent::Kind::RootBeyondCap) {
    result.phase = Phase::RecurrentPositive;
    note << "E[tau^s] finite at least for s < " << kCriticalExponentCap;
  } else {
    const double s_star = result.s_star.value;
    // The boundary moment is infinite, so s* = 1 still means E[tau] = inf;
    // the guard keeps roots numerically at one classified as null.
    const bool positive = s_star > 1.0 + 1e-9;
    result.phase = positive ? Phase::RecurrentPositive : Phase::RecurrentNull;
    note << "E[tau^s] finite for s < " << s_star << ", infinite for s >= "
         << s_star;
  }
  result.moment_note = note.str();
  return result;
}

}  // namespace pollreg
