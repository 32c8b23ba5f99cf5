#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "r2margin/distributions.hpp"
#include "r2margin/errors.hpp"

using namespace r2margin;

TEST_CASE("ln_gamma known values") {
  CHECK(std::fabs(ln_gamma(1.0)) <= 1e-12);
  CHECK(std::fabs(ln_gamma(2.0)) <= 1e-12);
  CHECK(std::fabs(ln_gamma(0.5) - 0.5 * std::log(M_PI)) <= 1e-12);
  CHECK(std::fabs(ln_gamma(10.0) - oracle::ln_factorial(9)) <= 1e-12);
  CHECK(std::fabs(ln_gamma(10.0) - 12.8018274800814696) <= 1e-12);
}

TEST_CASE("ln_gamma agrees with std::lgamma across [1e-3, 1e6]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> log10x(-3.0, 6.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = std::pow(10.0, log10x(rng));
    const double expected = std::lgamma(x);
    // Absolute 1e-12 where the magnitude allows it; beyond that the double
    // spacing of the result itself dominates.
    const double tol = std::max(1e-12, 8e-16 * std::fabs(expected));
    INFO("x = " << x);
    CHECK(std::fabs(ln_gamma(x) - expected) <= tol);
  }
}

TEST_CASE("ln_gamma rejects non-positive and non-finite arguments") {
  CHECK_THROWS_AS(ln_gamma(0.0), DomainError);
  CHECK_THROWS_AS(ln_gamma(-1.5), DomainError);
  CHECK_THROWS_AS(ln_gamma(std::nan("")), DomainError);
  CHECK_THROWS_AS(ln_gamma(INFINITY), DomainError);
}

TEST_CASE("reg_inc_beta examples") {
  CHECK(reg_inc_beta(2.5, 3.5, 0.0) == 0.0);
  CHECK(reg_inc_beta(2.5, 3.5, 1.0) == 1.0);
  CHECK(std::fabs(reg_inc_beta(1.0, 1.0, 0.3) - 0.3) <= 1e-14);
  CHECK(std::fabs(reg_inc_beta(2.0, 3.0, 0.5) - 0.6875) <= 1e-14);
  CHECK(std::fabs(oracle::beta_cdf_integer(2, 3, 0.5) - 0.6875) <= 1e-15);
}

TEST_CASE("reg_inc_beta matches the binomial expansion for integer shapes") {
  for (unsigned a = 1; a <= 12; ++a) {
    for (unsigned b = 1; b <= 12; ++b) {
      for (double x : {0.02, 0.1, 0.37, 0.5, 0.81, 0.97}) {
        const double expected = oracle::beta_cdf_integer(a, b, x);
        INFO("a=" << a << " b=" << b << " x=" << x);
        CHECK(std::fabs(reg_inc_beta(a, b, x) - expected) <= 1e-10 * std::max(expected, 1e-300) + 1e-15);
      }
    }
  }
}

TEST_CASE("reg_inc_beta symmetry I_x(a,b) + I_{1-x}(b,a) = 1") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> shape(-1.0, 3.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = std::pow(10.0, shape(rng));
    const double b = std::pow(10.0, shape(rng));
    const double x = unit(rng);
    INFO("a=" << a << " b=" << b << " x=" << x);
    CHECK(std::fabs(reg_inc_beta(a, b, x) + reg_inc_beta(b, a, 1.0 - x) - 1.0) <= 1e-12);
  }
}

TEST_CASE("reg_inc_beta is monotone in x") {
  for (auto [a, b] : {std::pair{0.5, 0.5}, std::pair{3.15, 621.5}, std::pair{40.0, 2.0}}) {
    double prev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double v = reg_inc_beta(a, b, i / 1000.0);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("reg_inc_beta domain errors") {
  CHECK_THROWS_AS(reg_inc_beta(0.0, 1.0, 0.5), DomainError);
  CHECK_THROWS_AS(reg_inc_beta(1.0, -2.0, 0.5), DomainError);
  CHECK_THROWS_AS(reg_inc_beta(1.0, 1.0, -0.1), DomainError);
  CHECK_THROWS_AS(reg_inc_beta(1.0, 1.0, 1.1), DomainError);
}

TEST_CASE("FParams rejects non-positive degrees of freedom") {
  CHECK_THROWS_AS(FParams(0.0, 3.0), DomainError);
  CHECK_THROWS_AS(FParams(3.0, -1.0), DomainError);
  CHECK_THROWS_AS(FParams(std::nan(""), 3.0), DomainError);
  CHECK_NOTHROW(FParams(0.3, 0.7));
}

TEST_CASE("f_cdf examples") {
  CHECK(f_cdf(0.0, FParams(3, 12)) == 0.0);
  CHECK(f_cdf(-2.0, FParams(3, 12)) == 0.0);
  CHECK(std::fabs(f_cdf(1.0, FParams(7, 7)) - 0.5) <= 1e-14);
  // Frozen from the quadrature oracle (also checked live below).
  CHECK(std::fabs(f_cdf(2.5, FParams(3, 12)) - 0.8908452876049937) <= 1e-9);
  CHECK(std::fabs(oracle::f_cdf_quadrature(2.5, 3, 12) - 0.8908452876049937) <= 1e-9);
  CHECK(f_cdf(INFINITY, FParams(3, 12)) == 1.0);
}

TEST_CASE("f_cdf agrees with quadrature on random fractional-df triples") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ld1(std::log(0.5), std::log(200.0));
  std::uniform_real_distribution<double> ld2(std::log(1.0), std::log(5000.0));
  std::uniform_real_distribution<double> lx(std::log(0.02), std::log(20.0));
  for (int i = 0; i < 200; ++i) {
    const double d1 = std::exp(ld1(rng));
    const double d2 = std::exp(ld2(rng));
    const double x = std::exp(lx(rng));
    INFO("x=" << x << " d1=" << d1 << " d2=" << d2);
    CHECK(std::fabs(f_cdf(x, FParams(d1, d2)) - oracle::f_cdf_quadrature(x, d1, d2)) <= 1e-9);
  }
}

TEST_CASE("f_cdf is monotone on randomized grids") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> df(0.5, 300.0);
  for (int t = 0; t < 30; ++t) {
    const FParams p(df(rng), df(rng));
    double prev = 0.0;
    for (int i = 1; i <= 400; ++i) {
      const double v = f_cdf(i * 0.02, p);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("f_quantile examples") {
  CHECK(std::fabs(f_quantile(0.5, FParams(7, 7)) - 1.0) <= 1e-10);
  for (double q : {0.01, 0.05, 0.5, 0.95, 0.99}) {
    const FParams p(4.0, 17.0);
    CHECK(std::fabs(f_cdf(f_quantile(q, p), p) - q) <= 1e-10);
  }
  const double q = f_quantile(0.05, FParams(6.3, 1243));
  CHECK(std::fabs(q - 0.2840023371652665) <= 1e-8);
}

TEST_CASE("f_quantile and f_cdf are mutual inverses") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ldf(std::log(0.5), std::log(5000.0));
  std::uniform_real_distribution<double> prob(0.001, 0.999);
  for (int i = 0; i < 500; ++i) {
    const FParams p(std::exp(ldf(rng)), std::exp(ldf(rng)));
    const double q = prob(rng);
    const double x = f_quantile(q, p);
    INFO("q=" << q << " d1=" << p.d1() << " d2=" << p.d2());
    CHECK(std::fabs(f_cdf(x, p) - q) <= 1e-8);
    CHECK(std::fabs(f_quantile(f_cdf(x, p), p) - x) <= 1e-8 * std::max(1.0, x));
  }
}

TEST_CASE("f_quantile rejects probabilities outside (0, 1)") {
  CHECK_THROWS_AS(f_quantile(0.0, FParams(2, 2)), DomainError);
  CHECK_THROWS_AS(f_quantile(1.0, FParams(2, 2)), DomainError);
  CHECK_THROWS_AS(f_quantile(-0.5, FParams(2, 2)), DomainError);
}

TEST_CASE("distribution functions are pure") {
  const FParams p(6.3, 1243);
  CHECK(f_cdf(0.31, p) == f_cdf(0.31, p));
  CHECK(f_quantile(0.05, p) == f_quantile(0.05, p));
  CHECK(reg_inc_beta(3.3, 4.4, 0.6) == reg_inc_beta(3.3, 4.4, 0.6));
}
