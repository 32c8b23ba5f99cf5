#include "r2margin/distributions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "r2margin/errors.hpp"

namespace r2margin {

namespace {

constexpr int kBetaMaxIterations = 300;
constexpr double kBetaTolerance = 1e-14;
constexpr double kTiny = 1e-300;

constexpr int kQuantileMaxIterations = 200;
constexpr int kBracketMaxExpansions = 64;
constexpr double kQuantileTolerance = 1e-10;

// Continued fraction for I_x(a, b) without the x^a (1-x)^b / (a B(a,b))
// prefactor; modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kBetaMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kBetaTolerance) return h;
  }
  throw ConvergenceError("reg_inc_beta: continued fraction did not converge for a=" +
                             std::to_string(a) + ", b=" + std::to_string(b) +
                             ", x=" + std::to_string(x),
                         kBetaMaxIterations);
}

double ln_beta(double a, double b) { return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b); }

// I_x(a, b) with y = 1 - x supplied separately so callers that know the
// complement exactly do not lose it to cancellation.
double inc_beta(double a, double b, double x, double y) {
  if (x == 0.0) return 0.0;
  if (y == 0.0) return 1.0;
  const double ln_front = a * std::log(x) + b * std::log(y) - ln_beta(a, b);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

void require_probability(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw DomainError("f_quantile: probability must lie in (0, 1), got " + std::to_string(prob));
  }
}

}  // namespace

FParams::FParams(double d1, double d2) : d1_(d1), d2_(d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0) || !std::isfinite(d1) || !std::isfinite(d2)) {
    throw DomainError("FParams: degrees of freedom must be finite and positive (d1=" +
                      std::to_string(d1) + ", d2=" + std::to_string(d2) + ")");
  }
}

double ln_gamma(double x) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError("ln_gamma: argument must be finite and positive, got " + std::to_string(x));
  }
  // g = 671/128, 14 terms.
  static constexpr std::array<double, 14> kCoefficients = {
      57.1562356658629235,     -59.5979603554754912,    14.1360979747417471,
      -0.491913816097620199,   .339946499848118887e-4,  .465236289270485756e-4,
      -.983744753048795646e-4, .158088703224912494e-3,  -.210264441724104883e-3,
      .217439618115212643e-3,  -.164318106536763890e-3, .844182239838527433e-4,
      -.261908384015814087e-4, .368991826595316234e-5};
  double y = x;
  double tmp = x + 5.24218750000000000;
  tmp = (x + 0.5) * std::log(tmp) - tmp;
  double series = 0.999999999999997092;
  for (double c : kCoefficients) series += c / ++y;
  return tmp + std::log(2.5066282746310005 * series / x);
}

double reg_inc_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("reg_inc_beta: shape parameters must be finite and positive");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("reg_inc_beta: x must lie in [0, 1], got " + std::to_string(x));
  }
  return inc_beta(a, b, x, 1.0 - x);
}

double f_pdf(double x, const FParams& p) {
  if (std::isnan(x)) throw DomainError("f_pdf: x is NaN");
  if (x < 0.0 || std::isinf(x)) return 0.0;
  const double a = 0.5 * p.d1();
  const double b = 0.5 * p.d2();
  if (x == 0.0) {
    if (a < 1.0) return std::numeric_limits<double>::infinity();
    if (a == 1.0) return 1.0;
    return 0.0;
  }
  const double s = p.d1() * x + p.d2();
  const double ln_density = a * std::log(p.d1() * x) + b * std::log(p.d2()) - (a + b) * std::log(s) -
                            ln_beta(a, b) - std::log(x);
  return std::exp(ln_density);
}

double f_cdf(double x, const FParams& p) {
  if (std::isnan(x)) throw DomainError("f_cdf: x is NaN");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double a = 0.5 * p.d1();
  const double b = 0.5 * p.d2();
  const double s = p.d1() * x + p.d2();
  const double z = p.d1() * x / s;
  const double w = p.d2() / s;
  return inc_beta(a, b, z, w);
}

double f_quantile(double prob, const FParams& p) {
  require_probability(prob);

  double lo = 1e-10;
  double hi = 1e10;
  for (int i = 0; f_cdf(lo, p) > prob; ++i) {
    if (i == kBracketMaxExpansions) throw ConvergenceError("f_quantile: cannot bracket lower tail", i);
    lo *= 1e-4;
  }
  for (int i = 0; f_cdf(hi, p) < prob; ++i) {
    if (i == kBracketMaxExpansions) throw ConvergenceError("f_quantile: cannot bracket upper tail", i);
    hi *= 1e4;
  }

  // Newton in log(x), falling back to geometric bisection whenever the step
  // leaves the bracket.
  double x = (lo < 1.0 && 1.0 < hi) ? 1.0 : std::sqrt(lo * hi);
  double best_x = x;
  double best_residual = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < kQuantileMaxIterations; ++iter) {
    const double residual = f_cdf(x, p) - prob;
    if (std::fabs(residual) < best_residual) {
      best_residual = std::fabs(residual);
      best_x = x;
    }
    if (residual == 0.0) return x;
    if (residual < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;

    const double slope = f_pdf(x, p) * x;
    double next = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(slope) && slope > 0.0) next = x * std::exp(-residual / slope);
    if (!(next > lo && next < hi)) next = std::sqrt(lo * hi);
    if (std::fabs(next - x) <= 1e-15 * x) {
      x = next;
      const double r = std::fabs(f_cdf(x, p) - prob);
      if (r < best_residual) {
        best_residual = r;
        best_x = x;
      }
      break;
    }
    x = next;
  }
  if (best_residual > kQuantileTolerance) {
    throw ConvergenceError("f_quantile: root finder failed for prob=" + std::to_string(prob) +
                               ", d1=" + std::to_string(p.d1()) + ", d2=" + std::to_string(p.d2()),
                           kQuantileMaxIterations);
  }
  return best_x;
}

}  // namespace r2margin
