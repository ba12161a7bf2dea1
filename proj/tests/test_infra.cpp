#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pollreg/matrix.hpp"
#include "pollreg/rng.hpp"

using namespace pollreg;

TEST_CASE("matvec multiplies row-major") {
  Matrix a(2, 2);
  a.at(0, 0) = 1.0;
  a.at(0, 1) = 2.0;
  a.at(1, 0) = 3.0;
  a.at(1, 1) = 4.0;
  const auto y = matvec(a, {1.0, -1.0});
  CHECK(y[0] == doctest::Approx(-1.0));
  CHECK(y[1] == doctest::Approx(-1.0));
  const auto yt = matvec_transposed(a, {1.0, -1.0});
  CHECK(yt[0] == doctest::Approx(-2.0));
  CHECK(yt[1] == doctest::Approx(-2.0));
}

TEST_CASE("solve_dense solves a small SPD system") {
  Matrix a(2, 2);
  a.at(0, 0) = 2.0;
  a.at(0, 1) = 1.0;
  a.at(1, 0) = 1.0;
  a.at(1, 1) = 3.0;
  const auto x = solve_dense(a, {3.0, 5.0});
  CHECK(x[0] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(1.4).epsilon(1e-12));
}

TEST_CASE("solve_dense pivots through a zero leading entry") {
  Matrix a(3, 3);
  a.at(0, 1) = 1.0;
  a.at(1, 0) = 1.0;
  a.at(2, 2) = 2.0;
  const auto x = solve_dense(a, {1.0, 2.0, 3.0});
  CHECK(x[0] == doctest::Approx(2.0));
  CHECK(x[1] == doctest::Approx(1.0));
  CHECK(x[2] == doctest::Approx(1.5));
}

TEST_CASE("solve_dense rejects singular systems") {
  Matrix a(2, 2, 1.0);
  CHECK_THROWS_AS(solve_dense(a, {1.0, 2.0}), std::runtime_error);
}

TEST_CASE("derive_seed gives collision-free per-stream seeds") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 4096; ++r) {
    seen.insert(derive_seed(12345, r));
  }
  CHECK(seen.size() == 4096);
  // Different masters decorrelate too.
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("rng streams are reproducible and seed-sensitive") {
  Rng a(42), b(42), c(43);
  bool all_equal = true;
  bool any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next();
    all_equal = all_equal && va == b.next();
    any_diff = any_diff || va != c.next();
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform01 stays in [0,1) with the right mean") {
  Rng rng(7);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("exponential sampler matches its mean and variance") {
  Rng rng(11);
  const int n = 200000;
  const double rate = 2.0;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_exponential(rng, rate);
    REQUIRE(x > 0.0);
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.02));
  CHECK(var == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("poisson sampler matches its first two moments") {
  Rng rng(13);
  for (double mean : {0.3, 3.0, 9.9, 10.1, 25.0, 400.0}) {
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(sample_poisson(rng, mean));
      sum += k;
      sumsq += k * k;
    }
    const double m = sum / n;
    const double v = sumsq / n - m * m;
    CAPTURE(mean);
    CHECK(m == doctest::Approx(mean).epsilon(0.03));
    CHECK(v == doctest::Approx(mean).epsilon(0.06));
  }
}

TEST_CASE("poisson sampler passes a chi-square test in the PTRS regime") {
  Rng rng(17);
  const double mean = 25.0;
  const int n = 200000;
  const int lo = 10, hi = 40;
  std::vector<long long> counts(static_cast<std::size_t>(hi - lo + 3), 0);
  for (int i = 0; i < n; ++i) {
    const long long k = sample_poisson(rng, mean);
    if (k < lo) {
      ++counts.front();
    } else if (k > hi) {
      ++counts.back();
    } else {
      ++counts[static_cast<std::size_t>(k - lo + 1)];
    }
  }
  auto pmf = [&](int k) {
    return std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
  };
  double p_lo = 0.0, p_mid = 0.0;
  std::vector<double> probs(counts.size(), 0.0);
  for (int k = 0; k < lo; ++k) p_lo += pmf(k);
  probs.front() = p_lo;
  for (int k = lo; k <= hi; ++k) {
    probs[static_cast<std::size_t>(k - lo + 1)] = pmf(k);
    p_mid += pmf(k);
  }
  probs.back() = 1.0 - p_lo - p_mid;
  double chi2 = 0.0;
  for (std::size_t b = 0; b < counts.size(); ++b) {
    const double expected = n * probs[b];
    REQUIRE(expected > 5.0);
    const double diff = counts[b] - expected;
    chi2 += diff * diff / expected;
  }
  // 32 degrees of freedom; the 99.9% quantile is about 62.5.
  CHECK(chi2 < 70.0);
}

TEST_CASE("categorical sampler follows the cumulative table") {
  Rng rng(19);
  const std::vector<double> cum{0.25, 1.0};
  const int n = 100000;
  int first = 0;
  for (int i = 0; i < n; ++i) {
    const int k = sample_categorical(rng, cum);
    REQUIRE(k >= 0);
    REQUIRE(k <= 1);
    if (k == 0) ++first;
  }
  CHECK(static_cast<double>(first) / n == doctest::Approx(0.25).epsilon(0.03));
  CHECK_THROWS_AS(sample_categorical(rng, {}), std::invalid_argument);
}
