#pragma once

#include <cmath>
#include <string>

#include "r2margin/errors.hpp"

namespace r2margin {

template <typename FOfV>
FixedPoint iterate_scaled_f(const TestInput& input, FOfV&& f_of_v, double tol, std::size_t max_iter) {
  if (!(tol > 0.0)) throw DomainError("iterate_scaled_f: tolerance must be positive");
  FixedPoint fp{input.r2(), 0.0, 0.0, 0};
  double last = 1.0;
  // At least one pass, so v and F are always defined.
  do {
    if (fp.iterations == max_iter) {
      throw ConvergenceError("scaled-F fixed point did not converge within " + std::to_string(max_iter) +
                                 " iterations",
                             max_iter);
    }
    last = fp.psq;
    fp.v = scaled_f_df(input, fp.psq);
    fp.f_stat = f_of_v(fp.v);
    fp.psq = psq_update(input, fp.f_stat);
    ++fp.iterations;
    if (!std::isfinite(fp.psq)) {
      throw DegenerateInputError("scaled-F fixed point produced a non-finite P^2 (F = " +
                                 std::to_string(fp.f_stat) + ")");
    }
  } while (std::fabs(last - fp.psq) > tol);
  return fp;
}

}  // namespace r2margin
