#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pollreg/errors.hpp"
#include "pollreg/parameters.hpp"
#include "pollreg/rng.hpp"

// Sampling tables compiled once from a validated scenario.
//
// The sampler is immutable after construction and can be shared across
// replication threads; all mutable state lives in the caller's Rng. Atom
// slopes and their logs are precomputed so the per-step admissibility
// assertion costs two comparisons.

namespace pollreg {

struct AtomSample {
  ServiceFamily family = ServiceFamily::Exponential;
  double rate = 1.0;  // mu
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double slope = 1.0;  // lambda2 / (mu - lambda1)
  double log_slope = 0.0;
};

struct PairTable {
  bool routed = false;
  std::vector<double> atom_cum;  // cumulative atom weights, last entry 1
  std::vector<AtomSample> atoms;
  SwitchingFamily sw_family = SwitchingFamily::Zero;
  double sw_mean = 0.0;
};

class ScenarioSampler {
 public:
  // Requires a scenario that passes full validation; throws
  // PreconditionError naming the first violated clause otherwise.
  explicit ScenarioSampler(const ScenarioSpec& spec)
      : d_(spec.chain.d), bounds_(spec.bounds) {
    const auto check = validate_scenario(spec);
    if (!check.ok) {
      throw PreconditionError("scenario rejected: " +
                              check.violations.front().clause);
    }
    log_big_ = std::log(bounds_.M0);

    row_cum_.assign(static_cast<std::size_t>(d_) * d_, 0.0);
    tables_.assign(static_cast<std::size_t>(d_) * d_, PairTable{});
    for (int i = 0; i < d_; ++i) {
      double acc = 0.0;
      for (int j = 0; j < d_; ++j) {
        acc += spec.chain.p.at(i, j);
        row_cum_[idx(i, j)] = acc;
      }
      row_cum_[idx(i, d_ - 1)] = 1.0;
    }
    for (const auto& [pair, measure] : spec.regeneration) {
      auto& table = tables_[idx(pair.first, pair.second)];
      table.routed = true;
      double acc = 0.0;
      for (const auto& atom : measure.atoms) {
        acc += atom.weight;
        table.atom_cum.push_back(acc);
        AtomSample sample;
        sample.family = atom.service.family;
        sample.rate = atom.service.rate;
        sample.lambda1 = atom.lambda1;
        sample.lambda2 = atom.lambda2;
        sample.slope = slope(atom);
        sample.log_slope = std::log(sample.slope);
        table.atoms.push_back(sample);
      }
      table.atom_cum.back() = 1.0;
    }
    for (const auto& [pair, law] : spec.switching) {
      auto& table = tables_[idx(pair.first, pair.second)];
      table.sw_family = law.family;
      table.sw_mean = law.mean;
    }
  }

  int stations() const { return d_; }
  const ConditionEBounds& bounds() const { return bounds_; }
  double log_slope_bound() const { return log_big_; }

  int next_station(int i, Rng& rng) const {
    return sample_categorical(
        rng, std::span<const double>(row_cum_.data() + idx(i, 0),
                                     static_cast<std::size_t>(d_)));
  }

  const PairTable& pair(int i, int j) const { return tables_[idx(i, j)]; }

  const AtomSample& sample_atom(int i, int j, Rng& rng) const {
    const auto& table = tables_[idx(i, j)];
    const int k = sample_categorical(rng, table.atom_cum);
    return table.atoms[static_cast<std::size_t>(k)];
  }

  // Service duration for one job under the atom's law.
  double sample_service(const AtomSample& atom, Rng& rng) const {
    if (atom.family == ServiceFamily::Deterministic) return 1.0 / atom.rate;
    return sample_exponential(rng, atom.rate);
  }

  // Switching duration for the move from station i to station j.
  double sample_switch(int i, int j, Rng& rng) const {
    const auto& table = tables_[idx(i, j)];
    switch (table.sw_family) {
      case SwitchingFamily::Zero:
        return 0.0;
      case SwitchingFamily::Deterministic:
        return table.sw_mean;
      case SwitchingFamily::Exponential:
        return sample_exponential(rng, 1.0 / table.sw_mean);
    }
    return 0.0;
  }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * d_ + j;
  }

  int d_;
  ConditionEBounds bounds_;
  double log_big_ = 0.0;
  std::vector<double> row_cum_;
  std::vector<PairTable> tables_;
};

}  // namespace pollreg
