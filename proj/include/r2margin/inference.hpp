#pragma once

#include <cstddef>

namespace r2margin {

inline constexpr double kDefaultTolerance = 1e-12;
inline constexpr std::size_t kDefaultMaxIterations = 10'000;

/// Sufficient statistics for inference on P^2: observed R^2, sample size N
/// and covariate count K. Requires 0 <= r2 < 1, k >= 1, n >= k + 2.
class TestInput {
 public:
  TestInput(double r2, long n, long k);

  double r2() const noexcept { return r2_; }
  long n() const noexcept { return n_; }
  long k() const noexcept { return k_; }
  /// N - K - 1, the denominator degrees of freedom.
  long residual_df() const noexcept { return n_ - k_ - 1; }

 private:
  double r2_;
  long n_;
  long k_;
};

/// Which lower-tail probability feeds the F quantile in the interval
/// recurrence. kHalfAlpha is the reference routine's qf(alpha/2, ...);
/// kAlpha is the literal F_alpha reading.
enum class QuantileConvention { kHalfAlpha, kAlpha };

/// How the interval's fixed point was located.
enum class SolveMethod {
  kIteration,  // plain v <-> P^2 iteration converged
  kBracketed,  // iteration hit its cap (it can settle into a 2-cycle); the
               // unique root of T(P) - P was found by bisection instead
};

struct ConfidenceBound {
  double upper;             // clamped to [0, 1 - 1e-12]
  double raw_upper;         // unclamped value of the interval formula
  double level;             // 1 - tail_probability
  double alpha_param;       // alpha as supplied
  double tail_probability;  // alpha / 2 or alpha, per convention
  double v_final;
  double f_final;
  std::size_t iterations;
  bool clamped;
  QuantileConvention convention;
  SolveMethod method;
};

struct NonInfResult {
  double p_value;
  double f_stat;
  double v_final;
  double delta;
  std::size_t iterations;
  bool short_circuited;  // R^2 = 0: p = 0 without iterating
};

struct FixedPoint {
  double psq;
  double v;       // df evaluated at the Psq that produced the final update
  double f_stat;  // F used in the final update
  std::size_t iterations;
};

/// Scaled-F numerator df v for a candidate P^2. psq is first clamped into
/// [0, 1 - 1e-12] so that v stays positive.
double scaled_f_df(const TestInput& input, double psq);

/// One step of the P^2 recurrence: ((N-K-1) R^2 - (1-R^2) K F) / ((N-K-1)(R^2 + (1-R^2) F)).
double psq_update(const TestInput& input, double f_stat);

/// F statistic for margin delta; psq_update(input, noninferiority_f_stat(input, delta)) == delta.
double noninferiority_f_stat(const TestInput& input, double delta);

/// Drives the v <-> P^2 iteration starting from P^2 = R^2, with F supplied
/// per pass by f_of_v(v). Stops when successive P^2 differ by at most tol.
template <typename FOfV>
FixedPoint iterate_scaled_f(const TestInput& input, FOfV&& f_of_v, double tol, std::size_t max_iter);

/// Fixed point for a constant F statistic.
FixedPoint fixed_point_v(const TestInput& input, double f_stat, double tol = kDefaultTolerance,
                         std::size_t max_iter = kDefaultMaxIterations);

/// Upper limit of the one-sided confidence interval [0, U] for P^2. Runs the
/// plain iteration for up to max_iter passes; if that does not settle, the
/// same fixed point is located by bisection (the update map is decreasing in
/// P^2, so the root is unique).
ConfidenceBound upper_ci_p2(const TestInput& input, double alpha, double tol = kDefaultTolerance,
                            QuantileConvention convention = QuantileConvention::kHalfAlpha,
                            std::size_t max_iter = kDefaultMaxIterations);

/// p-value for H0: P^2 >= delta against H1: P^2 < delta. Small p supports
/// P^2 < delta.
NonInfResult noninferiority_pvalue(const TestInput& input, double delta, double tol = kDefaultTolerance,
                                   std::size_t max_iter = kDefaultMaxIterations);

}  // namespace r2margin

#include "r2margin/inference_impl.hpp"
