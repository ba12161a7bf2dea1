#include "pollreg/multiplicative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pollreg/errors.hpp"

namespace pollreg {

namespace {

constexpr double kLogSlopeSlack = 1e-9;

void check_log_increment(const ScenarioSampler& sampler,
                         const AtomSample& atom) {
  const double bound = sampler.log_slope_bound() + kLogSlopeSlack;
  if (atom.log_slope < -bound || atom.log_slope > bound) {
    throw std::logic_error("log slope escaped the admissible band");
  }
}

double geometric_tail_bound(double x0, double eps, double big,
                            double last_x, long long steps, bool truncated) {
  if (truncated || steps < 1) return std::numeric_limits<double>::infinity();
  const double rho = std::pow(last_x / x0, 1.0 / static_cast<double>(steps));
  if (!(rho < 1.0)) return std::numeric_limits<double>::infinity();
  return eps * x0 * big / (1.0 - rho);
}

}  // namespace

MultState mult_step(const ScenarioSampler& sampler, const MultState& state,
                    Rng& rng) {
  const int next = sampler.next_station(state.station, rng);
  const AtomSample& atom = sampler.sample_atom(state.station, next, rng);
  check_log_increment(sampler, atom);
  return MultState{next, state.x * atom.slope, state.step + 1};
}

TotalTimeRecord run_total_time(const ScenarioSampler& sampler, double x0,
                               double eps, long long cap, Rng& rng,
                               int start_station, double sigma_a) {
  if (!(x0 > 0.0)) throw std::invalid_argument("x0 must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  TotalTimeRecord record;
  record.partials.push_back(0.0);
  MultState state{start_station, x0, 0};
  const double floor = eps * x0;
  record.truncated = true;
  while (state.step < cap) {
    state = mult_step(sampler, state, rng);
    record.partials.push_back(record.partials.back() + state.x);
    if (sigma_a > 0.0 && !record.steps_to_sigma && state.x <= sigma_a) {
      record.steps_to_sigma = state.step;
    }
    if (state.x < floor) {
      record.truncated = false;
      break;
    }
  }
  record.steps = state.step;
  record.total = x0 + record.partials.back();
  record.tail_bound = geometric_tail_bound(x0, eps, sampler.bounds().M0,
                                           state.x, record.steps,
                                           record.truncated);
  return record;
}

TotalTimeRecord run_total_time_on_slopes(const std::vector<double>& slopes,
                                         double x0, double eps, long long cap,
                                         double sigma_a) {
  if (!(x0 > 0.0)) throw std::invalid_argument("x0 must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  TotalTimeRecord record;
  record.partials.push_back(0.0);
  double x = x0;
  long long step = 0;
  const double floor = eps * x0;
  record.truncated = true;
  double big = 1.0;
  while (step < cap && step < static_cast<long long>(slopes.size())) {
    const double slope = slopes[static_cast<std::size_t>(step)];
    big = std::max({big, slope, 1.0 / slope});
    x *= slope;
    ++step;
    record.partials.push_back(record.partials.back() + x);
    if (sigma_a > 0.0 && !record.steps_to_sigma && x <= sigma_a) {
      record.steps_to_sigma = step;
    }
    if (x < floor) {
      record.truncated = false;
      break;
    }
  }
  record.steps = step;
  record.total = x0 + record.partials.back();
  record.tail_bound =
      geometric_tail_bound(x0, eps, big, x, record.steps, record.truncated);
  return record;
}

ProductMomentEstimate estimate_product_moment(const ScenarioSampler& sampler,
                                              double s, long long n_steps,
                                              long long runs, Rng& rng,
                                              int start_station) {
  if (runs < 1) throw std::invalid_argument("runs must be at least 1");
  if (n_steps < 0) throw std::invalid_argument("n_steps must be nonnegative");
  double mean = 0.0;
  double m2 = 0.0;
  for (long long run = 0; run < runs; ++run) {
    MultState state{start_station, 1.0, 0};
    double log_product = 0.0;
    for (long long k = 0; k < n_steps; ++k) {
      const int next = sampler.next_station(state.station, rng);
      const AtomSample& atom = sampler.sample_atom(state.station, next, rng);
      log_product += atom.log_slope;
      state.station = next;
    }
    const double w = std::exp(s * log_product);
    const double delta = w - mean;
    mean += delta / static_cast<double>(run + 1);
    m2 += delta * (w - mean);
  }
  ProductMomentEstimate estimate;
  estimate.value = mean;
  estimate.runs = runs;
  estimate.std_error =
      runs > 1 ? std::sqrt(m2 / (static_cast<double>(runs) *
                                 static_cast<double>(runs - 1)))
               : 0.0;
  return estimate;
}

HittingTime hitting_time_sigma(const ScenarioSampler& sampler, double x0,
                               double threshold, long long cap, Rng& rng,
                               int start_station) {
  if (!(threshold > 0.0)) {
    throw std::invalid_argument("threshold must be positive");
  }
  if (!(x0 > 0.0)) throw std::invalid_argument("x0 must be positive");
  MultState state{start_station, x0, 0};
  while (state.step < cap) {
    state = mult_step(sampler, state, rng);
    if (state.x <= threshold) return HittingTime{state.step, false};
  }
  return HittingTime{cap, true};
}

namespace {

// Hill estimate from a descending-sorted positive sample.
double hill_from_sorted(const std::vector<double>& desc, long long k) {
  double acc = 0.0;
  const double pivot = std::log(desc[static_cast<std::size_t>(k)]);
  for (long long i = 0; i < k; ++i) {
    acc += std::log(desc[static_cast<std::size_t>(i)]) - pivot;
  }
  const double h = acc / static_cast<double>(k);
  if (h <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / h;
}

}  // namespace

TailIndexEstimate tail_index(const std::vector<double>& samples,
                             double top_fraction) {
  if (!(top_fraction > 0.0) || top_fraction > 0.25) {
    throw std::invalid_argument("top_fraction must lie in (0, 0.25]");
  }
  const long long n = static_cast<long long>(samples.size());
  if (n < 1000) {
    throw TooFewSamplesError("tail estimation needs at least 1000 samples");
  }
  std::vector<double> desc = samples;
  for (double v : desc) {
    if (!(v > 0.0)) {
      throw std::invalid_argument("tail samples must be positive");
    }
  }
  std::sort(desc.begin(), desc.end(), std::greater<>());

  const long long k =
      static_cast<long long>(static_cast<double>(n) * top_fraction);
  if (k < 10) {
    throw TooFewSamplesError("top fraction keeps fewer than 10 samples");
  }

  TailIndexEstimate estimate;
  estimate.order_stats = k;
  estimate.index = hill_from_sorted(desc, k);
  const double rel = 1.96 / std::sqrt(static_cast<double>(k));
  estimate.ci_low = estimate.index * (1.0 - rel);
  estimate.ci_high = estimate.index * (1.0 + rel);

  for (std::size_t f = 0; f < kTailStabilityFractions.size(); ++f) {
    const long long kf = static_cast<long long>(
        static_cast<double>(n) * kTailStabilityFractions[f]);
    estimate.stability[f] = hill_from_sorted(desc, std::max<long long>(kf, 1));
  }
  estimate.non_heavy = estimate.stability[0] > estimate.stability[1] &&
                       estimate.stability[1] > estimate.stability[2] &&
                       estimate.stability[0] > 1.3 * estimate.stability[2];
  return estimate;
}

}  // namespace pollreg
