#include "pollreg/polling_sim.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "pollreg/errors.hpp"

namespace pollreg {

namespace {

double draw_duration(const ServiceDistribution& dist, Rng& rng) {
  if (dist.family == ServiceFamily::Deterministic) return 1.0 / dist.rate;
  return sample_exponential(rng, dist.rate);
}

double draw_duration(const SwitchingDistribution& dist, Rng& rng) {
  switch (dist.family) {
    case SwitchingFamily::Zero:
      return 0.0;
    case SwitchingFamily::Deterministic:
      return dist.mean;
    case SwitchingFamily::Exponential:
      return sample_exponential(rng, 1.0 / dist.mean);
  }
  return 0.0;
}

}  // namespace

long long arrivals_during(const ServiceDistribution& dist, double lambda,
                          Rng& rng) {
  return sample_poisson(rng, lambda * draw_duration(dist, rng));
}

long long arrivals_during(const SwitchingDistribution& dist, double lambda,
                          Rng& rng) {
  return sample_poisson(rng, lambda * draw_duration(dist, rng));
}

void service_event(const ScenarioSampler& sampler, SystemState& state,
                   Rng& rng) {
  if (state.phase != ServerPhase::Serving) {
    throw EmptyServerError("service completion outside the serving phase");
  }
  if (state.x1 < 1) {
    throw EmptyServerError("service completion with no customer at queue one");
  }
  const double duration = sampler.sample_service(state.params, rng);
  const long long arrived1 = sample_poisson(rng, state.params.lambda1 * duration);
  const long long arrived2 = sample_poisson(rng, state.params.lambda2 * duration);
  state.x1 += arrived1 - 1;
  state.x2 += arrived2;
  ++state.event_index;
  if (state.x1 == 0) state.phase = ServerPhase::Switching;
}

void switch_event(const ScenarioSampler& sampler, SystemState& state,
                  Rng& rng) {
  if (state.phase != ServerPhase::Switching) {
    throw std::logic_error("relocation while queue one is still being served");
  }
  const int from = state.server;
  const int server = state.other;
  const int other = sampler.next_station(server, rng);
  const AtomSample params = sampler.sample_atom(server, other, rng);
  const double duration = sampler.sample_switch(from, server, rng);
  const long long arrived1 = sample_poisson(rng, params.lambda1 * duration);
  const long long arrived2 = sample_poisson(rng, params.lambda2 * duration);
  state.from = from;
  state.server = server;
  state.other = other;
  state.params = params;
  state.x1 = state.x2 + arrived1;
  state.x2 = arrived2;
  ++state.epoch_index;
  ++state.event_index;
  state.phase = state.x1 == 0 ? ServerPhase::Switching : ServerPhase::Serving;
}

SystemState initial_state(const ScenarioSampler& sampler, long long x1,
                          long long x2, Rng& rng, int start_station) {
  if (x1 < 0 || x2 < 0) throw std::invalid_argument("negative queue content");
  if (start_station < 0 || start_station >= sampler.stations()) {
    throw std::invalid_argument("start station outside the chain");
  }
  SystemState state;
  state.from = start_station;
  state.server = start_station;
  state.other = sampler.next_station(start_station, rng);
  state.params = sampler.sample_atom(start_station, state.other, rng);
  state.x1 = x1;
  state.x2 = x2;
  state.epoch_index = 1;
  state.event_index = 0;
  state.phase = x1 == 0 ? ServerPhase::Switching : ServerPhase::Serving;
  return state;
}

RunResult run_until_empty(const ScenarioSampler& sampler, SystemState state,
                          long long horizon, Rng& rng) {
  return run_with_observer(sampler, state, horizon, rng,
                           [](const SystemState&) {});
}

RunResult simulate_tau(const ScenarioSampler& sampler, long long x1,
                       long long x2, long long horizon, std::uint64_t seed,
                       int start_station) {
  Rng rng(seed);
  SystemState state = initial_state(sampler, x1, x2, rng, start_station);
  RunResult result = run_until_empty(sampler, state, horizon, rng);
  result.seed = seed;
  return result;
}

MonteCarloTauResult monte_carlo_tau(const ScenarioSampler& sampler,
                                    const MonteCarloTauConfig& config) {
  if (config.runs < 0) throw std::invalid_argument("negative run count");
  if (config.horizon < 1) throw std::invalid_argument("horizon below one");
  for (const long long cap : config.horizon_grid) {
    if (cap < 1 || cap > config.horizon) {
      throw std::invalid_argument("moment cap outside [1, horizon]");
    }
  }

  MonteCarloTauResult out;
  out.runs.resize(static_cast<std::size_t>(config.runs));

  const auto work = [&](long long begin, long long end) {
    for (long long id = begin; id < end; ++id) {
      const std::uint64_t seed =
          derive_seed(config.master_seed, static_cast<std::uint64_t>(id));
      out.runs[static_cast<std::size_t>(id)] =
          simulate_tau(sampler, config.x1, config.x2, config.horizon, seed,
                       config.start_station);
    }
  };

  const int threads =
      static_cast<int>(std::min<long long>(std::max(config.threads, 1),
                                           std::max<long long>(config.runs, 1)));
  if (threads <= 1) {
    work(0, config.runs);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const long long chunk = (config.runs + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const long long begin = static_cast<long long>(t) * chunk;
      const long long end = std::min(config.runs, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(work, begin, end);
    }
    for (auto& worker : pool) worker.join();
  }

  TauSummary& summary = out.summary;
  summary.runs = config.runs;
  for (const auto& run : out.runs) {
    if (!run.tau.has_value()) ++summary.censored;
  }
  summary.censor_fraction =
      config.runs > 0
          ? static_cast<double>(summary.censored) / static_cast<double>(config.runs)
          : 0.0;

  for (const double s : config.s_grid) {
    for (const long long cap : config.horizon_grid) {
      CappedMoment moment;
      moment.s = s;
      moment.cap = cap;
      if (config.runs > 0) {
        double total = 0.0;
        for (const auto& run : out.runs) {
          const long long capped =
              run.tau.has_value() ? std::min(*run.tau, cap) : cap;
          total += std::pow(static_cast<double>(capped), s);
        }
        moment.value = total / static_cast<double>(config.runs);
      }
      summary.moments.push_back(moment);
    }
  }

  std::vector<double> uncensored;
  uncensored.reserve(out.runs.size());
  for (const auto& run : out.runs) {
    if (run.tau.has_value()) {
      uncensored.push_back(static_cast<double>(*run.tau));
    }
  }
  if (static_cast<long long>(uncensored.size()) >= kTauTailMinSamples) {
    summary.tail = tail_index(uncensored, kTauTailFraction);
  }
  return out;
}

}  // namespace pollreg
