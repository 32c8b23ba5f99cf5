#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace r2margin {

// Argument outside the mathematical domain of a function or violating a
// documented invariant (TestInput, FParams, Scenario, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DimensionMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative routine hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations)
      : std::runtime_error(what), iterations_(iterations) {}
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

// The scaled-F recurrence cannot be evaluated (zero F statistic with
// non-zero R^2, or a non-positive df denominator).
class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankDeficiencyError : public std::runtime_error {
 public:
  // column is the index into the augmented design [1 | X]; 0 is the
  // intercept, j >= 1 is covariate j (1-based).
  RankDeficiencyError(const std::string& what, std::size_t column)
      : std::runtime_error(what), column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class NotPositiveDefiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Too many Monte Carlo replicates failed inference.
class ExcessiveSkipsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace r2margin
