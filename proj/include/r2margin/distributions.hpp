#pragma once

namespace r2margin {

/// Degrees of freedom of a central F distribution. Both may be fractional.
class FParams {
 public:
  FParams(double d1, double d2);

  double d1() const noexcept { return d1_; }
  double d2() const noexcept { return d2_; }

 private:
  double d1_;
  double d2_;
};

/// ln Gamma(x) for x > 0 (Lanczos approximation).
double ln_gamma(double x);

/// Regularized incomplete beta function I_x(a, b), evaluated with the
/// modified Lentz continued fraction on whichever side of the
/// (a+1)/(a+b+2) pivot converges fastest.
double reg_inc_beta(double a, double b, double x);

double f_pdf(double x, const FParams& p);

/// P(F <= x). Zero for x <= 0.
double f_cdf(double x, const FParams& p);

/// Inverse of f_cdf: returns x with |f_cdf(x) - prob| <= 1e-10.
/// Throws ConvergenceError when the root finder exhausts its iteration cap.
double f_quantile(double prob, const FParams& p);

}  // namespace r2margin
