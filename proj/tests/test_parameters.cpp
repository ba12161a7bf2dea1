#include <cmath>
#include <string>

#include "doctest.h"
#include "pollreg/errors.hpp"
#include "pollreg/parameters.hpp"
#include "pollreg/scenario_io.hpp"
#include "test_support.hpp"

using namespace pollreg;

namespace {

// The built-in example in closed form: the two-rate station contributes
// moment p*4^s + (1-p)*4^-s, the fixed station contributes 1, and the
// spectral radius of the resulting antidiagonal 2x2 matrix is the square
// root of the product.
double example_eta(double p, double s) {
  return std::sqrt(p * std::pow(4.0, s) + (1.0 - p) * std::pow(4.0, -s));
}

double example_root(double p) {
  return (std::log1p(-p) - std::log(p)) / std::log(4.0);
}

double example_drift(double p) { return (2.0 * p - 1.0) * std::log(2.0); }

bool mentions(const ScenarioValidation& v, const std::string& needle) {
  for (const auto& viol : v.violations) {
    if (viol.clause.find(needle) != std::string::npos) return true;
  }
  return false;
}

// Directed three-cycle with unit arrival rates; the last leg's service
// rate is the knob. Slopes along the cycle: 1, 4, 1/(mu_last - 1).
ScenarioSpec cycle_scenario(double mu_last) {
  ScenarioSpec spec;
  spec.chain.d = 3;
  spec.chain.p = Matrix(3, 3);
  spec.chain.p.at(0, 1) = 1.0;
  spec.chain.p.at(1, 2) = 1.0;
  spec.chain.p.at(2, 0) = 1.0;
  spec.bounds = {0.1, 10.0};
  const ServiceDistribution unit{ServiceFamily::Exponential, 2.0};
  const ServiceDistribution slow{ServiceFamily::Exponential, 1.25};
  const ServiceDistribution last{ServiceFamily::Exponential, mu_last};
  spec.regeneration[{0, 1}] = RegenerationMeasure{{{1.0, unit, 1.0, 1.0}}};
  spec.regeneration[{1, 2}] = RegenerationMeasure{{{1.0, slow, 1.0, 1.0}}};
  spec.regeneration[{2, 0}] = RegenerationMeasure{{{1.0, last, 1.0, 1.0}}};
  return spec;
}

// Fork-and-return: station 0 alternates with 1 or 2, drifting up on the
// (0,1) leg and down on both return legs. eta(s)^2 = (1 + 4^-s)/2.
ScenarioSpec fork_scenario() {
  ScenarioSpec spec;
  spec.chain.d = 3;
  spec.chain.p = Matrix(3, 3);
  spec.chain.p.at(0, 1) = 0.5;
  spec.chain.p.at(0, 2) = 0.5;
  spec.chain.p.at(1, 0) = 1.0;
  spec.chain.p.at(2, 0) = 1.0;
  spec.bounds = {0.1, 10.0};
  const ServiceDistribution up{ServiceFamily::Exponential, 1.25};
  const ServiceDistribution flat{ServiceFamily::Exponential, 2.0};
  const ServiceDistribution down{ServiceFamily::Exponential, 5.0};
  spec.regeneration[{0, 1}] = RegenerationMeasure{{{1.0, up, 1.0, 1.0}}};
  spec.regeneration[{0, 2}] = RegenerationMeasure{{{1.0, flat, 1.0, 1.0}}};
  spec.regeneration[{1, 0}] = RegenerationMeasure{{{1.0, down, 1.0, 1.0}}};
  spec.regeneration[{2, 0}] = RegenerationMeasure{{{1.0, down, 1.0, 1.0}}};
  return spec;
}

}  // namespace

TEST_CASE("slope is the per-epoch growth factor") {
  CHECK(slope({1.0, {ServiceFamily::Exponential, 1.25}, 1.0, 1.0}) == 4.0);
  CHECK(slope({1.0, {ServiceFamily::Exponential, 5.0}, 1.0, 1.0}) == 0.25);
  CHECK(slope({1.0, {ServiceFamily::Exponential, 2.0}, 1.0, 1.0}) == 1.0);
  // The family label does not enter the slope.
  CHECK(slope({1.0, {ServiceFamily::Deterministic, 1.25}, 1.0, 1.0}) == 4.0);
  CHECK_THROWS_AS(slope({1.0, {ServiceFamily::Exponential, 1.0}, 1.0, 1.0}),
                  UnstableEpochError);
  CHECK_THROWS_AS(slope({1.0, {ServiceFamily::Exponential, 0.5}, 1.0, 1.0}),
                  UnstableEpochError);
}

TEST_CASE("the built-in example validates across the mixture range") {
  for (double p : {0.0, 0.05, 0.3, 0.5, 1.0}) {
    CAPTURE(p);
    CHECK(validate_scenario(example_scenario(p)).ok);
  }
  CHECK(validate_scenario(
            example_scenario(
                0.3, SwitchingDistribution{SwitchingFamily::Exponential, 2.0}))
            .ok);
  CHECK(validate_scenario(
            example_scenario(0.3, SwitchingDistribution{
                                      SwitchingFamily::Deterministic, 1.0}))
            .ok);
}

TEST_CASE("admissibility violations are reported clause by clause") {
  auto base = example_scenario(0.3);

  SUBCASE("bounds must be ordered") {
    auto spec = base;
    spec.bounds = {10.0, 0.1};
    CHECK(mentions(validate_condition_e(spec), "bounds need 0 < m0 < M0"));
  }
  SUBCASE("service must dominate lambda1 with margin") {
    auto spec = base;
    spec.regeneration[{0, 1}].atoms[0] = {
        1.0, {ServiceFamily::Exponential, 1.0}, 0.95, 0.3};
    CHECK(mentions(validate_condition_e(spec),
                   "service rate must exceed lambda1 + m0"));
  }
  SUBCASE("service rate capped by M0") {
    auto spec = base;
    spec.regeneration[{0, 1}].atoms[0] = {
        1.0, {ServiceFamily::Exponential, 10.0}, 1.0, 1.0};
    CHECK(mentions(validate_condition_e(spec),
                   "service rate must stay below M0"));
  }
  SUBCASE("lambda1 inside the open box") {
    auto spec = base;
    spec.regeneration[{0, 1}].atoms[0] = {
        1.0, {ServiceFamily::Exponential, 2.0}, 0.05, 1.0};
    CHECK(mentions(validate_condition_e(spec),
                   "lambda1 must lie strictly inside (m0, M0)"));
  }
  SUBCASE("lambda2 inside the open box") {
    auto spec = base;
    spec.regeneration[{0, 1}].atoms[0] = {
        1.0, {ServiceFamily::Exponential, 2.0}, 1.0, 0.05};
    CHECK(mentions(validate_condition_e(spec),
                   "lambda2 must lie strictly inside (m0, M0)"));
  }
  SUBCASE("slope must exceed 1/M0") {
    auto spec = base;
    spec.regeneration[{0, 1}].atoms[0] = {
        1.0, {ServiceFamily::Exponential, 9.0}, 0.5, 0.5};
    CHECK(mentions(validate_condition_e(spec), "slope must exceed 1/M0"));
  }
  SUBCASE("slope capped at M0, inclusively") {
    auto spec = base;
    spec.regeneration[{0, 1}].atoms[0] = {
        1.0, {ServiceFamily::Exponential, 1.5}, 1.0, 5.0};
    // Slope exactly M0 is admissible.
    CHECK(validate_condition_e(spec).ok);
    spec.regeneration[{0, 1}].atoms[0].lambda2 = 5.0 + 1e-6;
    CHECK(mentions(validate_condition_e(spec), "slope must not exceed M0"));
  }
  SUBCASE("slope above M0 on one mixture atom only") {
    auto spec = base;
    spec.regeneration[{0, 1}].atoms[0] = {
        1.0, {ServiceFamily::Exponential, 1.2}, 1.0, 9.0};
    const auto v = validate_condition_e(spec);
    CHECK(mentions(v, "slope must not exceed M0"));
    CHECK(v.violations.size() == 1);
  }
}

TEST_CASE("structural violations are caught before admissibility") {
  SUBCASE("missing measure on a routed pair") {
    auto spec = example_scenario(0.3);
    spec.regeneration.erase({0, 1});
    CHECK(mentions(validate_scenario(spec),
                   "routed pair is missing a regeneration measure"));
  }
  SUBCASE("measure on an unrouted pair") {
    auto spec = cycle_scenario(5.0);
    spec.regeneration[{0, 2}] =
        RegenerationMeasure{{{1.0, {ServiceFamily::Exponential, 2.0}, 1, 1}}};
    CHECK(mentions(validate_scenario(spec),
                   "regeneration measure on a pair with no routing mass"));
  }
  SUBCASE("switching law on an unrouted pair") {
    auto spec = cycle_scenario(5.0);
    spec.switching[{0, 2}] = {SwitchingFamily::Exponential, 1.0};
    CHECK(mentions(validate_scenario(spec),
                   "switching law on a pair with no routing mass"));
  }
  SUBCASE("weights must sum to one") {
    auto spec = example_scenario(0.3);
    spec.regeneration[{1, 0}].atoms[0].weight = 0.2;
    CHECK(mentions(validate_scenario(spec), "atom weights sum to"));
  }
  SUBCASE("weights must be positive") {
    auto spec = example_scenario(0.3);
    spec.regeneration[{1, 0}].atoms[0].weight = -0.3;
    spec.regeneration[{1, 0}].atoms[1].weight = 1.3;
    CHECK(mentions(validate_scenario(spec), "atom weight must lie in (0, 1]"));
  }
  SUBCASE("switching mean must be positive") {
    auto spec = example_scenario(0.3);
    spec.switching[{0, 1}] = {SwitchingFamily::Exponential, 0.0};
    CHECK(mentions(validate_scenario(spec), "switching mean must be positive"));
  }
  SUBCASE("zero switching cannot carry a mean") {
    auto spec = example_scenario(0.3);
    spec.switching[{0, 1}] = {SwitchingFamily::Zero, 1.0};
    CHECK(
        mentions(validate_scenario(spec), "zero switching cannot carry a mean"));
  }
  SUBCASE("invalid routing surfaces through scenario validation") {
    auto spec = example_scenario(0.3);
    spec.chain.p.at(0, 1) = 0.9;
    const auto v = validate_scenario(spec);
    REQUIRE_FALSE(v.ok);
    CHECK(mentions(v, "NotStochastic"));
  }
}

TEST_CASE("log drift of the built-in example") {
  CHECK(log_drift(example_scenario(0.0), 0) == doctest::Approx(0.0));
  CHECK(log_drift(example_scenario(0.0), 1) ==
        doctest::Approx(-2.0 * std::log(2.0)).epsilon(1e-14));
  for (double p : {0.1, 0.3, 0.5, 0.7}) {
    CAPTURE(p);
    CHECK(mean_log_drift(example_scenario(p)) ==
          doctest::Approx(example_drift(p)).epsilon(1e-13));
  }
  CHECK(std::abs(mean_log_drift(example_scenario(0.5))) < 1e-13);
  CHECK_THROWS_AS(log_drift(example_scenario(0.3), 2), std::invalid_argument);
}

TEST_CASE("moment matrix entries are mixture moments of the slope") {
  const auto spec = example_scenario(0.2);
  const auto m1 = moment_matrix(spec, 1.0);
  CHECK(m1.m.at(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m1.m.at(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m1.m.at(0, 0) == 0.0);
  CHECK(m1.m.at(1, 1) == 0.0);

  const auto mh = moment_matrix(spec, 0.5);
  CHECK(mh.m.at(1, 0) == doctest::Approx(0.2 * 2.0 + 0.8 * 0.5).epsilon(1e-15));

  CHECK_THROWS_AS(moment_matrix(spec, -0.5), std::invalid_argument);
}

TEST_CASE("perron root of the example matches the closed form") {
  for (double p : {0.05, 0.2, 0.3, 0.45}) {
    for (double s : {0.1, 0.5, 1.0, 2.0, 4.0}) {
      CAPTURE(p);
      CAPTURE(s);
      CHECK(std::abs(eta_at(example_scenario(p), s) - example_eta(p, s)) <
            1e-10);
    }
  }
  // Large exponents reach huge entry scales; the root must still resolve.
  const double big = eta_at(example_scenario(0.3), 64.0);
  CHECK(big == doctest::Approx(example_eta(0.3, 64.0)).epsilon(1e-9));
}

TEST_CASE("perron eigenpair satisfies the eigen equations") {
  const auto spec = fork_scenario();
  const auto mm = moment_matrix(spec, 1.0);
  const auto res = perron_eigenvalue(mm);
  CHECK(res.eta == doctest::Approx(std::sqrt(0.625)).epsilon(1e-10));
  CHECK(res.iterations < 100000);

  double rsum = 0.0, lsum = 0.0;
  for (int i = 0; i < 3; ++i) {
    REQUIRE(res.right[i] > 0.0);
    REQUIRE(res.left[i] > 0.0);
    rsum += res.right[i];
    lsum += res.left[i];
  }
  CHECK(rsum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lsum == doctest::Approx(1.0).epsilon(1e-12));

  const auto mv = matvec(mm.m, res.right);
  const auto vm = matvec_transposed(mm.m, res.left);
  for (int i = 0; i < 3; ++i) {
    CHECK(mv[i] == doctest::Approx(res.eta * res.right[i]).epsilon(1e-9));
    CHECK(vm[i] == doctest::Approx(res.eta * res.left[i]).epsilon(1e-9));
  }
}

TEST_CASE("perron root of a weighted cycle is the geometric mean") {
  const auto grow = cycle_scenario(3.0);  // slopes 1, 4, 1/2
  for (double s : {0.3, 0.9, 2.0}) {
    CAPTURE(s);
    CHECK(eta_at(grow, s) ==
          doctest::Approx(std::pow(2.0, s / 3.0)).epsilon(1e-10));
  }
  const auto flat = cycle_scenario(5.0);  // slopes 1, 4, 1/4
  CHECK(eta_at(flat, 0.7) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(mean_log_drift(flat)) < 1e-13);
}

TEST_CASE("eta is invariant under a common rate rescaling") {
  auto scale_rates = [](ScenarioSpec spec, double c) {
    for (auto& [pair, measure] : spec.regeneration) {
      (void)pair;
      for (auto& atom : measure.atoms) {
        atom.service.rate *= c;
        atom.lambda1 *= c;
        atom.lambda2 *= c;
      }
    }
    return spec;
  };
  const auto base = example_scenario(0.3);
  const auto scaled = scale_rates(base, 3.0);
  for (double s : {0.4, 1.3}) {
    CAPTURE(s);
    CHECK(eta_at(scaled, s) == doctest::Approx(eta_at(base, s)).epsilon(1e-10));
  }
  Rng rng(5150);
  const auto fuzz = pollreg::testing::random_scenario(rng);
  const auto fuzz_scaled = scale_rates(fuzz, 1.7);
  CHECK(eta_at(fuzz_scaled, 0.8) ==
        doctest::Approx(eta_at(fuzz, 0.8)).epsilon(1e-9));
}

TEST_CASE("eta is log-convex in the exponent") {
  const auto spec = example_scenario(0.3);
  const double left = eta_at(spec, 0.2);
  const double right = eta_at(spec, 1.0);
  const double mid = eta_at(spec, 0.6);
  CHECK(mid * mid <= left * right * (1.0 + 1e-11));

  Rng rng(31337);
  for (int trial = 0; trial < 5; ++trial) {
    const auto fuzz = pollreg::testing::random_scenario(rng);
    const double a = eta_at(fuzz, 0.3);
    const double b = eta_at(fuzz, 1.7);
    const double m = eta_at(fuzz, 1.0);
    CAPTURE(trial);
    CHECK(m * m <= a * b * (1.0 + 1e-10));
  }
}

TEST_CASE("eta prime at zero equals the pi-weighted drift") {
  for (double p : {0.1, 0.3, 0.5, 0.7}) {
    CAPTURE(p);
    CHECK(std::abs(eta_prime_at_zero(example_scenario(p)) - example_drift(p)) <
          1e-6);
  }
  // The root solver's 1e-12 bracket divided by the 2e-5 step limits the
  // finite difference to roughly 5e-8 accuracy.
  CHECK(std::abs(eta_prime_at_zero(cycle_scenario(3.0)) - std::log(2.0) / 3.0) <
        1e-6);

  Rng rng(808);
  for (int trial = 0; trial < 30; ++trial) {
    const auto fuzz = pollreg::testing::random_scenario(rng);
    CAPTURE(trial);
    CHECK(std::abs(eta_prime_at_zero(fuzz) - mean_log_drift(fuzz)) < 1e-4);
  }
}

TEST_CASE("critical exponent matches the closed form") {
  for (double p : {0.25, 0.3, 0.35, 0.45}) {
    CAPTURE(p);
    const auto spec = example_scenario(p);
    const auto root = critical_exponent(spec);
    REQUIRE(root.kind == CriticalExponent::Kind::Finite);
    CHECK(std::abs(root.value - example_root(p)) < 1e-6);
    CHECK(std::abs(eta_at(spec, root.value) - 1.0) < 1e-9);
  }
  const auto deep = critical_exponent(example_scenario(0.05));
  REQUIRE(deep.kind == CriticalExponent::Kind::Finite);
  CHECK(std::abs(deep.value - example_root(0.05)) < 1e-6);
}

TEST_CASE("critical exponent edge kinds") {
  CHECK(critical_exponent(example_scenario(0.0)).kind ==
        CriticalExponent::Kind::RootBeyondCap);
  CHECK(critical_exponent(example_scenario(0.5)).kind ==
        CriticalExponent::Kind::NoFiniteRoot);
  CHECK(critical_exponent(example_scenario(0.7)).kind ==
        CriticalExponent::Kind::NoFiniteRoot);
}

TEST_CASE("classification across the phase diagram") {
  const auto positive = classify(example_scenario(0.05));
  CHECK(positive.phase == Phase::RecurrentPositive);
  CHECK(std::string(to_string(positive.phase)) == "RECURRENT/POSITIVE");
  CHECK(positive.moment_note.find("infinite") != std::string::npos);

  // The boundary mixture has root exactly one; that boundary moment is
  // infinite, so the phase is null recurrent.
  const auto boundary = classify(example_scenario(0.2));
  CHECK(boundary.phase == Phase::RecurrentNull);
  REQUIRE(boundary.s_star.kind == CriticalExponent::Kind::Finite);
  CHECK(std::abs(boundary.s_star.value - 1.0) < 1e-6);

  const auto null_phase = classify(example_scenario(0.3));
  CHECK(null_phase.phase == Phase::RecurrentNull);
  CHECK(std::string(to_string(null_phase.phase)) == "RECURRENT/NULL");

  const auto critical = classify(example_scenario(0.5));
  CHECK(critical.phase == Phase::Critical);
  CHECK(critical.zero_switching_caveat);
  CHECK(critical.s_star.kind == CriticalExponent::Kind::NoFiniteRoot);

  const auto transient_near = classify(example_scenario(0.55));
  CHECK(transient_near.phase == Phase::Transient);
  CHECK_FALSE(transient_near.zero_switching_caveat);

  const auto transient = classify(example_scenario(0.7));
  CHECK(transient.phase == Phase::Transient);
  CHECK(transient.mean_drift == doctest::Approx(example_drift(0.7)));

  const auto all_moments = classify(example_scenario(0.0));
  CHECK(all_moments.phase == Phase::RecurrentPositive);
  CHECK(all_moments.s_star.kind == CriticalExponent::Kind::RootBeyondCap);
  CHECK(all_moments.moment_note.find("at least") != std::string::npos);
}

TEST_CASE("fork topology weights the drift by the stationary law") {
  const auto spec = fork_scenario();
  // pi = (1/2, 1/4, 1/4); L = (log 2, -2 log 2, -2 log 2).
  CHECK(mean_log_drift(spec) ==
        doctest::Approx(-0.5 * std::log(2.0)).epsilon(1e-13));
  const auto cls = classify(spec);
  CHECK(cls.phase == Phase::RecurrentPositive);
  CHECK(cls.s_star.kind == CriticalExponent::Kind::RootBeyondCap);
}

TEST_CASE("classification is internally consistent on fuzzed scenarios") {
  Rng rng(424242);
  for (int trial = 0; trial < 25; ++trial) {
    const auto spec = pollreg::testing::random_scenario(rng);
    CAPTURE(trial);
    REQUIRE(validate_scenario(spec).ok);
    const auto cls = classify(spec);
    const double drift = mean_log_drift(spec);
    CHECK(cls.mean_drift == doctest::Approx(drift));
    if (drift > 1e-12) {
      CHECK(cls.phase == Phase::Transient);
    } else if (drift < -1e-12) {
      const bool recurrent = cls.phase == Phase::RecurrentPositive ||
                             cls.phase == Phase::RecurrentNull;
      CHECK(recurrent);
      if (cls.s_star.kind == CriticalExponent::Kind::Finite) {
        CHECK(std::abs(eta_at(spec, cls.s_star.value) - 1.0) < 1e-9);
        const bool above_one = cls.s_star.value > 1.0 + 1e-9;
        CHECK((cls.phase == Phase::RecurrentPositive) == above_one);
      } else {
        CHECK(cls.phase == Phase::RecurrentPositive);
      }
    }
  }
}
