#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pollreg/multiplicative.hpp"
#include "pollreg/rng.hpp"
#include "pollreg/sampler.hpp"

// Event-level simulator of the two-queues-open polling system.
//
// The embedded chain advances one event at a time: a service completion
// while the server works, or the end of a relocation while it moves. All
// parameters are redrawn when a relocation ends and stay frozen until the
// next one, so each epoch is an excursion with fixed rates. The emptying
// index tau is the first embedded time at which a relocation completes
// onto two empty queues; a service completion that leaves the open pair
// empty only starts the next relocation and never fires tau itself.

namespace pollreg {

enum class ServerPhase { Switching, Serving };

struct SystemState {
  int from = 0;       // station the server left to begin this epoch
  int server = 0;     // station being served (queue one)
  int other = 0;      // companion station collecting queue two
  AtomSample params;  // service law and arrival rates frozen at the last switch
  long long x1 = 0;
  long long x2 = 0;
  long long epoch_index = 0;  // epochs entered, counting the initial one
  long long event_index = 0;  // embedded time: services plus relocations
  ServerPhase phase = ServerPhase::Serving;
};

// Poisson(lambda) arrival count accumulated over one duration drawn fresh
// from the given law. Production sampling always goes duration first, then
// the count; closed-form count laws are used as test oracles only.
long long arrivals_during(const ServiceDistribution& dist, double lambda,
                          Rng& rng);
long long arrivals_during(const SwitchingDistribution& dist, double lambda,
                          Rng& rng);

// One service completion. Requires the serving phase and x1 >= 1, else
// EmptyServerError. Draws one service time, adds both queues' arrivals
// over it, removes the finished customer, and hands the server to the
// relocation phase when queue one empties.
void service_event(const ScenarioSampler& sampler, SystemState& state,
                   Rng& rng);

// One relocation end. Requires the switching phase, else std::logic_error.
// The server lands on the old companion, draws the next companion by the
// routing chain and fresh parameters from the regeneration measure of the
// new pair, and the relocation duration follows the switching law of the
// traversed move. The old queue-two content becomes queue one; both open
// queues collect their arrivals over the relocation interval.
void switch_event(const ScenarioSampler& sampler, SystemState& state,
                  Rng& rng);

// State right after a virtual relocation into start_station: companion and
// parameters drawn fresh, the given queue contents, no arrivals added.
SystemState initial_state(const ScenarioSampler& sampler, long long x1,
                          long long x2, Rng& rng, int start_station = 0);

struct RunResult {
  std::optional<long long> tau;  // emptying index; empty when censored
  long long horizon = 0;
  long long epochs_used = 0;
  long long wall_events = 0;
  std::uint64_t seed = 0;
};

// Advance until tau fires or the event horizon is reached, reporting each
// post-event state to the observer.
template <typename Observer>
RunResult run_with_observer(const ScenarioSampler& sampler, SystemState state,
                            long long horizon, Rng& rng, Observer&& observe) {
  RunResult result;
  result.horizon = horizon;
  while (state.event_index < horizon) {
    if (state.phase == ServerPhase::Switching) {
      switch_event(sampler, state, rng);
      observe(state);
      if (state.x1 == 0 && state.x2 == 0) {
        result.tau = state.event_index;
        break;
      }
    } else {
      service_event(sampler, state, rng);
      observe(state);
    }
  }
  result.epochs_used = state.epoch_index;
  result.wall_events = state.event_index;
  return result;
}

RunResult run_until_empty(const ScenarioSampler& sampler, SystemState state,
                          long long horizon, Rng& rng);

// Fresh run from its own seed: virtual relocation into start_station with
// the given queue contents, then run to tau or the horizon.
RunResult simulate_tau(const ScenarioSampler& sampler, long long x1,
                       long long x2, long long horizon, std::uint64_t seed,
                       int start_station = 0);

struct MonteCarloTauConfig {
  long long runs = 0;
  long long horizon = 1000000;
  long long x1 = 1;
  long long x2 = 0;
  int start_station = 0;
  // Exponents and caps for the capped moments E[min(tau, cap)^s]. Censored
  // runs enter each capped mean at the cap, which is exact as long as every
  // cap stays at or below the horizon.
  std::vector<double> s_grid;
  std::vector<long long> horizon_grid;
  int threads = 1;
  std::uint64_t master_seed = 0;
};

struct CappedMoment {
  double s = 0.0;
  long long cap = 0;
  double value = 0.0;
};

// Order statistics fraction for the tau tail estimate, and the smallest
// uncensored sample count at which one is attempted.
inline constexpr double kTauTailFraction = 0.05;
inline constexpr long long kTauTailMinSamples = 1000;

struct TauSummary {
  long long runs = 0;
  long long censored = 0;
  double censor_fraction = 0.0;
  std::vector<CappedMoment> moments;  // s-major, cap-minor order
  std::optional<TailIndexEstimate> tail;  // from uncensored taus only
};

struct MonteCarloTauResult {
  std::vector<RunResult> runs;  // indexed by run id
  TauSummary summary;
};

// Replicated tau runs with per-run seeds derived from the master seed, so
// results are identical for every thread count. Requires horizon >= 1 and
// every cap in [1, horizon].
MonteCarloTauResult monte_carlo_tau(const ScenarioSampler& sampler,
                                    const MonteCarloTauConfig& config);

}  // namespace pollreg
