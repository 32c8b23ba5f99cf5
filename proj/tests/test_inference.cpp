#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "r2margin/distributions.hpp"
#include "r2margin/errors.hpp"
#include "r2margin/inference.hpp"

using namespace r2margin;

TEST_CASE("TestInput invariants") {
  CHECK_NOTHROW(TestInput(0.0, 3, 1));
  CHECK_THROWS_AS(TestInput(-0.01, 100, 2), DomainError);
  CHECK_THROWS_AS(TestInput(1.0, 100, 2), DomainError);
  CHECK_THROWS_AS(TestInput(std::nan(""), 100, 2), DomainError);
  CHECK_THROWS_AS(TestInput(0.5, 100, 0), DomainError);
  CHECK_THROWS_AS(TestInput(0.99, 10, 9), DomainError);
  CHECK(TestInput(0.2, 50, 3).residual_df() == 46);
}

TEST_CASE("upper confidence bound reproduces the reference routine") {
  const ConfidenceBound b = upper_ci_p2(TestInput(0.085, 1250, 6), 0.10);
  CHECK(std::fabs(b.upper - 0.1069415) <= 1e-6);
  CHECK(std::fabs(b.upper - 0.10694151080543092) <= 1e-9);
  CHECK(b.tail_probability == doctest::Approx(0.05));
  CHECK(b.level == doctest::Approx(0.95));
  CHECK(b.alpha_param == 0.10);
  CHECK(b.v_final > 0.0);
  CHECK_FALSE(b.clamped);
}

TEST_CASE("p-value reproduces the reference routine") {
  const NonInfResult r = noninferiority_pvalue(TestInput(0.075, 1250, 6), 0.10);
  CHECK(std::fabs(r.p_value - 0.02710537) <= 1e-6);
  CHECK(std::fabs(r.p_value - 0.02710537249594203) <= 1e-9);
  CHECK(r.delta == 0.10);
  CHECK_FALSE(r.short_circuited);
}

TEST_CASE("fixed_point_v with the F statistic of the p-value example") {
  const TestInput input(0.075, 1250, 6);
  const double f = noninferiority_f_stat(input, 0.10);
  CHECK(std::fabs(f - 0.6961274397958971) <= 1e-12);
  const FixedPoint fp = fixed_point_v(input, f);
  CHECK(std::fabs(fp.psq - 0.10) <= 1e-12);
  CHECK(std::fabs(fp.v - 70.10814716934388) <= 1e-8);
  CHECK(fp.iterations <= 3);
  CHECK(std::fabs(f_cdf(f, FParams(fp.v, 1243)) - 0.02710537) <= 1e-6);
}

TEST_CASE("fixed_point_v flags F = 0 as degenerate") {
  const TestInput input(0.2, 100, 3);
  CHECK(psq_update(input, 0.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(fixed_point_v(input, 0.0), DegenerateInputError);
  CHECK_THROWS_AS(fixed_point_v(input, -1.0), DegenerateInputError);
}

TEST_CASE("iteration cap converts non-convergence into an error") {
  const TestInput input(0.085, 1250, 6);
  // Alternating F never lets P^2 settle.
  int calls = 0;
  auto flip = [&](double) { return ++calls % 2 ? 0.5 : 2.0; };
  CHECK_THROWS_AS(iterate_scaled_f(input, flip, kDefaultTolerance, 50), ConvergenceError);
  CHECK(calls == 50);
  CHECK_THROWS_AS(fixed_point_v(input, 0.7, kDefaultTolerance, 1), ConvergenceError);
  CHECK_THROWS_AS(upper_ci_p2(input, 0.10, 0.0), DomainError);
}

TEST_CASE("interval falls back to bisection when the iteration cycles") {
  // Small N and R^2: the update map has slope below -1 at its fixed point and
  // the plain iteration approaches a 2-cycle.
  const TestInput input(0.010214373917862327, 65, 2);
  const ConfidenceBound b = upper_ci_p2(input, 0.10);
  CHECK(b.method == SolveMethod::kBracketed);
  CHECK(b.iterations >= kDefaultMaxIterations);
  const double expected = oracle::ci_upper_by_bisection(input.r2(), input.n(), input.k(), 0.05);
  CHECK(std::fabs(b.upper - expected) <= 1e-8);
  CHECK(std::fabs(noninferiority_pvalue(input, b.upper).p_value - 0.05) <= 1e-6);

  // A small cap forces the fallback even where iteration would converge.
  const TestInput easy(0.085, 1250, 6);
  const ConfidenceBound capped = upper_ci_p2(easy, 0.10, kDefaultTolerance, QuantileConvention::kHalfAlpha, 2);
  CHECK(capped.method == SolveMethod::kBracketed);
  CHECK(std::fabs(capped.upper - upper_ci_p2(easy, 0.10).upper) <= 1e-10);
}

TEST_CASE("fixed point converges within 100 iterations across a randomized grid") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> r2(0.005, 0.5);
  std::uniform_int_distribution<long> n(30, 10000);
  std::uniform_int_distribution<long> k(1, 10);
  std::uniform_real_distribution<double> delta(0.01, 0.9);
  std::size_t worst_test = 0;
  std::size_t worst_ci = 0;
  int bracketed = 0;
  for (int i = 0; i < 400; ++i) {
    const double rr = r2(rng);
    const long nn = n(rng);
    const long kk = k(rng);
    const TestInput input(rr, nn, kk);
    const FixedPoint fp = fixed_point_v(input, noninferiority_f_stat(input, delta(rng)));
    worst_test = std::max(worst_test, fp.iterations);
    const auto b = upper_ci_p2(input, 0.10);
    if (b.method == SolveMethod::kBracketed) {
      ++bracketed;
    } else {
      worst_ci = std::max(worst_ci, b.iterations);
    }
  }
  MESSAGE("max iterations: p-value " << worst_test << ", interval " << worst_ci << " (" << bracketed
                                     << " bracketed)");
  CHECK(worst_test <= 100);
}

TEST_CASE("R^2 = 0: interval clamps to 0 and the p-value short-circuits") {
  const ConfidenceBound b = upper_ci_p2(TestInput(0.0, 100, 3), 0.10);
  CHECK(b.upper == 0.0);
  CHECK(b.clamped);
  CHECK(b.raw_upper < 0.0);
  CHECK(b.v_final > 0.0);

  const NonInfResult r = noninferiority_pvalue(TestInput(0.0, 100, 2), 0.05);
  CHECK(r.p_value == 0.0);
  CHECK(r.f_stat == 0.0);
  CHECK(r.short_circuited);
  CHECK(r.iterations == 0);
  CHECK(r.v_final > 0.0);
}

TEST_CASE("upper bound matches the bisection oracle") {
  // Frozen from the oracle; re-derived live as well.
  constexpr double kFrozen = 0.4879875900234662;
  const double live = oracle::ci_upper_by_bisection(0.3, 50, 2, 0.025);
  CHECK(std::fabs(live - kFrozen) <= 1e-9);
  const ConfidenceBound b = upper_ci_p2(TestInput(0.3, 50, 2), 0.05);
  CHECK(std::fabs(b.upper - kFrozen) <= 1e-8);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> r2(0.02, 0.6);
  std::uniform_int_distribution<long> n(20, 3000);
  std::uniform_int_distribution<long> k(1, 8);
  for (int i = 0; i < 40; ++i) {
    const TestInput input(r2(rng), n(rng), k(rng));
    for (auto convention : {QuantileConvention::kHalfAlpha, QuantileConvention::kAlpha}) {
      const ConfidenceBound bound = upper_ci_p2(input, 0.1, kDefaultTolerance, convention);
      const double expected = oracle::ci_upper_by_bisection(input.r2(), input.n(), input.k(), bound.tail_probability);
      INFO("r2=" << input.r2() << " n=" << input.n() << " k=" << input.k());
      CHECK(std::fabs(bound.upper - expected) <= 1e-8);
    }
  }
}

TEST_CASE("one-sided convention takes the quantile at alpha") {
  const TestInput input(0.085, 1250, 6);
  const auto half = upper_ci_p2(input, 0.10);
  const auto full = upper_ci_p2(input, 0.10, kDefaultTolerance, QuantileConvention::kAlpha);
  CHECK(full.tail_probability == doctest::Approx(0.10));
  CHECK(full.level == doctest::Approx(0.90));
  CHECK(full.upper < half.upper);
  const auto via_half = upper_ci_p2(input, 0.20);
  CHECK(std::fabs(full.upper - via_half.upper) <= 1e-14);
}

TEST_CASE("p-value at the confidence limit equals the quantile probability") {
  const NonInfResult r = noninferiority_pvalue(TestInput(0.085, 1250, 6), 0.1069415);
  CHECK(std::fabs(r.p_value - 0.05) <= 1e-4);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> r2(0.005, 0.7);
  std::uniform_int_distribution<long> n(15, 8000);
  std::uniform_int_distribution<long> k(1, 10);
  int checked = 0;
  while (checked < 200) {
    const long kk = k(rng);
    const long nn = std::max(n(rng), kk + 5);
    const TestInput input(r2(rng), nn, kk);
    for (double alpha : {0.02, 0.05, 0.10, 0.20}) {
      const ConfidenceBound b = upper_ci_p2(input, alpha);
      if (b.clamped) continue;
      const NonInfResult t = noninferiority_pvalue(input, b.upper);
      INFO("r2=" << input.r2() << " n=" << nn << " k=" << kk << " alpha=" << alpha);
      CHECK(std::fabs(t.p_value - alpha / 2) <= 1e-6);
      ++checked;
    }
  }
}

TEST_CASE("F statistic inverts the P^2 update exactly") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unit(0.001, 0.95);
  std::uniform_int_distribution<long> n(10, 5000);
  std::uniform_int_distribution<long> k(1, 8);
  for (int i = 0; i < 1000; ++i) {
    const long kk = k(rng);
    const TestInput input(unit(rng), std::max(n(rng), kk + 2), kk);
    const double delta = unit(rng);
    CHECK(std::fabs(psq_update(input, noninferiority_f_stat(input, delta)) - delta) <= 1e-12);
  }
}

TEST_CASE("p-value is monotone in delta and in R^2") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> r2(0.01, 0.4);
  std::uniform_int_distribution<long> n(30, 5000);
  std::uniform_int_distribution<long> k(1, 6);
  for (int t = 0; t < 40; ++t) {
    const long nn = n(rng);
    const long kk = k(rng);
    const TestInput input(r2(rng), nn, kk);
    double prev = 1.0;
    for (int i = 1; i < 100; ++i) {
      const double p = noninferiority_pvalue(input, i / 100.0).p_value;
      CHECK(p <= prev + 1e-14);
      CHECK((p >= 0.0 && p <= 1.0));
      prev = p;
    }
    const double delta = 0.05 + 0.4 * t / 40.0;
    prev = 0.0;
    for (int i = 0; i < 100; ++i) {
      const NonInfResult res = noninferiority_pvalue(TestInput(i / 120.0, nn, kk), delta);
      CHECK(res.p_value >= prev - 1e-14);
      CHECK(res.f_stat >= 0.0);
      prev = res.p_value;
    }
  }
}

TEST_CASE("domain errors") {
  const TestInput input(0.2, 100, 3);
  CHECK_THROWS_AS(noninferiority_pvalue(input, 0.0), DomainError);
  CHECK_THROWS_AS(noninferiority_pvalue(input, 1.0), DomainError);
  CHECK_THROWS_AS(noninferiority_pvalue(input, 1.2), DomainError);
  CHECK_THROWS_AS(upper_ci_p2(input, 0.0), DomainError);
  CHECK_THROWS_AS(upper_ci_p2(input, 1.0), DomainError);
}

TEST_CASE("df clamp keeps v positive for negative or near-one P^2") {
  const TestInput input(0.1, 100, 3);
  CHECK(scaled_f_df(input, -0.5) == doctest::Approx(3.0));
  CHECK(scaled_f_df(input, 2.0) > 0.0);
  CHECK(std::isfinite(scaled_f_df(input, 2.0)));
}
