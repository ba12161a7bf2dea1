#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

// Random number generation for the whole library.
//
// Every stochastic routine derives its generator from a 64-bit master seed
// plus a stream id (usually the replication index) through derive_seed().
// Replications therefore do not share state and results are independent of
// how work is split across threads: summaries are always merged in stream-id
// order.

namespace pollreg {

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed-split scheme: stream r gets mix64(master + (r+1) * golden gamma),
// i.e. the (r+1)-th output of a SplitMix64 sequence seeded with the master.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(master + (stream + 1) * kGoldenGamma);
}

// xoshiro256++ (Blackman, Vigna). Small, fast, and entirely ours, so the
// sampled streams do not depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // Reference seeding: expand the seed with SplitMix64.
    std::uint64_t x = seed;
    for (auto& w : s_) {
      x += kGoldenGamma;
      w = mix64(x);
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe to pass to log().
  double uniform_pos() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> s_{};
};

inline double sample_exponential(Rng& rng, double rate) {
  return -std::log(rng.uniform_pos()) / rate;
}

namespace detail {

// Knuth product-of-uniforms method; cost grows linearly with the mean.
inline long long poisson_small(Rng& rng, double mean) {
  const double limit = std::exp(-mean);
  long long k = 0;
  double p = rng.uniform_pos();
  while (p > limit) {
    ++k;
    p *= rng.uniform_pos();
  }
  return k;
}

// Hormann's PTRS transformed-rejection sampler, for means above ~10.
inline long long poisson_ptrs(Rng& rng, double mean) {
  const double log_mean = std::log(mean);
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u = rng.uniform01() - 0.5;
    double v = rng.uniform_pos();
    double us = 0.5 - std::abs(u);
    double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long long>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    double k = kf;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * log_mean - mean - std::lgamma(k + 1.0)) {
      return static_cast<long long>(kf);
    }
  }
}

}  // namespace detail

inline long long sample_poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  if (mean < 10.0) return detail::poisson_small(rng, mean);
  return detail::poisson_ptrs(rng, mean);
}

// Index into a cumulative-probability table: first i with u <= cum[i].
// The last entry is treated as exactly one.
inline int sample_categorical(Rng& rng, std::span<const double> cum) {
  if (cum.empty()) throw std::invalid_argument("empty categorical table");
  const double u = rng.uniform01();
  for (std::size_t i = 0; i + 1 < cum.size(); ++i) {
    if (u <= cum[i]) return static_cast<int>(i);
  }
  return static_cast<int>(cum.size() - 1);
}

}  // namespace pollreg
