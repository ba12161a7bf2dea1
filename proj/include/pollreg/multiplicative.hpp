#pragma once

#include <array>
#include <optional>
#include <vector>

#include "pollreg/rng.hpp"
#include "pollreg/sampler.hpp"

// The station-indexed multiplicative chain (I, X).
//
// At every step the station moves by the routing chain, an atom is drawn
// from the regeneration measure of the traversed pair, and X is multiplied
// by that atom's slope. X_r is the size of the r-th fluid epoch, the
// accumulated series x0 + X_1 + X_2 + ... is the time the fluid model
// takes to drain, and the hitting/tail behavior of X is the scalar
// skeleton of the full queueing model.

namespace pollreg {

struct MultState {
  int station = 0;
  double x = 1.0;
  long long step = 0;
};

// One multiplicative step. The log increment is asserted to stay inside
// [-log M0, log M0] on every step; a violation throws std::logic_error
// since validation should have made it impossible.
MultState mult_step(const ScenarioSampler& sampler, const MultState& state,
                    Rng& rng);

struct TotalTimeRecord {
  // partials[0] = 0 and partials[r] = partials[r-1] + X_r: the partial sums
  // of the step sizes, strictly increasing.
  std::vector<double> partials;
  // x0 plus the full series; equals x0 + partials.back().
  double total = 0.0;
  long long steps = 0;    // index of the last X_r accumulated
  bool truncated = false; // stopped by the step cap, not by the tolerance
  // Bound on the discarded tail: eps * x0 * M0 / (1 - rho) where rho is the
  // realized per-step geometric contraction; +inf when truncated or rho >= 1.
  double tail_bound = 0.0;
  // Step index of the first X_r <= sigma_a, when a threshold was tracked.
  std::optional<long long> steps_to_sigma;
};

// Accumulate x0 + sum of X_r until X_r < eps * x0 (or cap steps, flagged
// truncated). Requires x0 > 0 and eps > 0. When sigma_a > 0 the crossing
// step of that threshold is recorded as well.
TotalTimeRecord run_total_time(const ScenarioSampler& sampler, double x0,
                               double eps, long long cap, Rng& rng,
                               int start_station = 0, double sigma_a = 0.0);

// Same accumulation driven by an explicit slope sequence instead of fresh
// draws; used to cross-check against trajectory computations on a shared
// parameter path. Runs are truncated when the sequence is exhausted.
TotalTimeRecord run_total_time_on_slopes(const std::vector<double>& slopes,
                                         double x0, double eps, long long cap,
                                         double sigma_a = 0.0);

struct ProductMomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long long runs = 0;
};

// Monte Carlo estimate of E[(X_n / x0)^s] from the given start station.
// The exact value is the start-station entry of M(s)^n applied to the
// all-ones vector.
ProductMomentEstimate estimate_product_moment(const ScenarioSampler& sampler,
                                              double s, long long n_steps,
                                              long long runs, Rng& rng,
                                              int start_station = 0);

struct HittingTime {
  long long steps = 0;
  bool truncated = false;
};

// First step r > 0 with X_r <= threshold, starting from x0. Requires
// threshold > 0.
HittingTime hitting_time_sigma(const ScenarioSampler& sampler, double x0,
                               double threshold, long long cap, Rng& rng,
                               int start_station = 0);

// Thresholds at which the stability of the Hill estimate is probed.
constexpr std::array<double, 3> kTailStabilityFractions = {0.025, 0.05, 0.10};

struct TailIndexEstimate {
  double index = 0.0;
  double ci_low = 0.0;   // normal 95% interval: index * (1 -+ 1.96 / sqrt(k))
  double ci_high = 0.0;
  long long order_stats = 0;  // k, the number of top order statistics used
  // Hill estimates at the stability fractions, largest fraction last.
  std::array<double, 3> stability{};
  // Light-tailed flag: the estimate keeps climbing as the threshold rises
  // (strictly increasing toward smaller fractions, with the 2.5% estimate
  // more than 1.3 times the 10% one), so no stable tail index exists.
  bool non_heavy = false;
};

// Hill estimator over the top fraction of the samples. Requires at least
// 1000 positive samples and top_fraction in (0, 0.25]; the implied order
// statistic count must be at least 10.
TailIndexEstimate tail_index(const std::vector<double>& samples,
                             double top_fraction);

}  // namespace pollreg
