#include "r2margin/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "r2margin/distributions.hpp"
#include "r2margin/errors.hpp"

namespace r2margin {

namespace {

constexpr double kPsqCeiling = 1.0 - 1e-12;

constexpr int kBisectionSteps = 200;

// Root of T(P) - P where T(P) = psq_update(F(v(P))). T is non-increasing and
// constant for P <= 0, so the root lies in [0, T(0)] when T(0) > 0 and
// equals T(0) otherwise.
template <typename FOfV>
FixedPoint bracketed_fixed_point(const TestInput& input, FOfV&& f_of_v, std::size_t prior_iterations) {
  auto image = [&](double psq) { return psq_update(input, f_of_v(scaled_f_df(input, psq))); };
  std::size_t steps = 0;
  double root = image(0.0);
  if (root > 0.0) {
    double lo = 0.0;
    double hi = root;
    for (; steps < kBisectionSteps; ++steps) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (image(mid) > mid ? lo : hi) = mid;
    }
    root = 0.5 * (lo + hi);
  }
  FixedPoint fp;
  fp.v = scaled_f_df(input, root);
  fp.f_stat = f_of_v(fp.v);
  fp.psq = psq_update(input, fp.f_stat);
  fp.iterations = prior_iterations + steps;
  if (!std::isfinite(fp.psq)) throw DegenerateInputError("bracketed fixed point produced a non-finite P^2");
  return fp;
}

}  // namespace

TestInput::TestInput(double r2, long n, long k) : r2_(r2), n_(n), k_(k) {
  if (!std::isfinite(r2) || r2 < 0.0 || r2 >= 1.0) {
    throw DomainError("TestInput: r2 must satisfy 0 <= r2 < 1, got " + std::to_string(r2));
  }
  if (k < 1) throw DomainError("TestInput: k must be >= 1, got " + std::to_string(k));
  if (n < k + 2) {
    throw DomainError("TestInput: n must be >= k + 2 (n=" + std::to_string(n) + ", k=" + std::to_string(k) +
                      ")");
  }
}

double scaled_f_df(const TestInput& input, double psq) {
  const double p = std::clamp(psq, 0.0, kPsqCeiling);
  const double m = static_cast<double>(input.residual_df());
  const double k = static_cast<double>(input.k());
  const double n = static_cast<double>(input.n());
  const double numerator = (m * p + k) * (m * p + k);
  const double denominator = n - 1.0 - m * (1.0 - p) * (1.0 - p);
  if (!(denominator > 0.0)) {
    throw DegenerateInputError("scaled_f_df: non-positive df denominator " + std::to_string(denominator));
  }
  return numerator / denominator;
}

double psq_update(const TestInput& input, double f_stat) {
  const double m = static_cast<double>(input.residual_df());
  const double k = static_cast<double>(input.k());
  const double r2 = input.r2();
  return (m * r2 - (1.0 - r2) * k * f_stat) / (m * (r2 + (1.0 - r2) * f_stat));
}

double noninferiority_f_stat(const TestInput& input, double delta) {
  const double m = static_cast<double>(input.residual_df());
  const double k = static_cast<double>(input.k());
  const double r2 = input.r2();
  return (m * r2 * (delta - 1.0)) / ((r2 - 1.0) * (delta * m + k));
}

FixedPoint fixed_point_v(const TestInput& input, double f_stat, double tol, std::size_t max_iter) {
  // F = 0 maps every P^2 to 1 (or 0/0 at R^2 = 0).
  if (!std::isfinite(f_stat) || f_stat <= 0.0) {
    throw DegenerateInputError("fixed_point_v: F statistic must be finite and positive, got " +
                               std::to_string(f_stat));
  }
  return iterate_scaled_f(input, [f_stat](double) { return f_stat; }, tol, max_iter);
}

ConfidenceBound upper_ci_p2(const TestInput& input, double alpha, double tol, QuantileConvention convention,
                            std::size_t max_iter) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("upper_ci_p2: alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  const double tail = convention == QuantileConvention::kHalfAlpha ? alpha / 2.0 : alpha;
  const double residual_df = static_cast<double>(input.residual_df());
  auto quantile = [&](double v) { return f_quantile(tail, FParams(v, residual_df)); };
  ConfidenceBound bound{};
  FixedPoint fp;
  try {
    fp = iterate_scaled_f(input, quantile, tol, max_iter);
    bound.method = SolveMethod::kIteration;
  } catch (const ConvergenceError& e) {
    fp = bracketed_fixed_point(input, quantile, e.iterations());
    bound.method = SolveMethod::kBracketed;
  }

  bound.raw_upper = psq_update(input, fp.f_stat);
  bound.upper = std::max(0.0, std::min(bound.raw_upper, kPsqCeiling));
  bound.clamped = bound.upper != bound.raw_upper;
  bound.level = 1.0 - tail;
  bound.alpha_param = alpha;
  bound.tail_probability = tail;
  bound.v_final = fp.v;
  bound.f_final = fp.f_stat;
  bound.iterations = fp.iterations;
  bound.convention = convention;
  return bound;
}

NonInfResult noninferiority_pvalue(const TestInput& input, double delta, double tol, std::size_t max_iter) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError("noninferiority_pvalue: delta must lie in (0, 1), got " + std::to_string(delta));
  }
  NonInfResult result{};
  result.delta = delta;
  result.f_stat = noninferiority_f_stat(input, delta);
  if (input.r2() == 0.0) {
    result.f_stat = 0.0;
    result.p_value = 0.0;
    result.v_final = scaled_f_df(input, 0.0);
    result.iterations = 0;
    result.short_circuited = true;
    return result;
  }
  const FixedPoint fp = fixed_point_v(input, result.f_stat, tol, max_iter);
  result.v_final = fp.v;
  result.iterations = fp.iterations;
  result.p_value = std::clamp(f_cdf(result.f_stat, FParams(fp.v, static_cast<double>(input.residual_df()))),
                              0.0, 1.0);
  return result;
}

}  // namespace r2margin
