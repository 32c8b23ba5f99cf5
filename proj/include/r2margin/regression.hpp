#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "r2margin/errors.hpp"

namespace r2margin {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Outcome vector and covariate matrix for Y = b0 + X b + e. The intercept
/// column is not stored; fit_ols adds it.
template <typename Scalar>
struct Dataset {
  Vector<Scalar> y;
  Matrix<Scalar> x;

  Eigen::Index n() const { return y.size(); }
  Eigen::Index k() const { return x.cols(); }
};

template <typename Scalar>
struct OlsFit {
  Scalar intercept;
  Vector<Scalar> coefficients;
  Scalar r2;
  Scalar residual_variance_hat;  // SSE / (N - K - 1)
  Vector<Scalar> fitted;
  bool constant_outcome;  // SST == 0; r2 reported as 0
};

/// Checks shape and finiteness; throws DimensionMismatchError / DomainError.
template <typename Scalar>
void validate(const Dataset<Scalar>& data) {
  if (data.x.rows() != data.y.size()) {
    throw DimensionMismatchError("Dataset: y has " + std::to_string(data.y.size()) + " rows but x has " +
                                 std::to_string(data.x.rows()));
  }
  if (data.k() < 1) throw DomainError("Dataset: at least one covariate column is required");
  if (data.n() < data.k() + 2) {
    throw DomainError("Dataset: need N >= K + 2 (N=" + std::to_string(data.n()) +
                      ", K=" + std::to_string(data.k()) + ")");
  }
  if (!data.y.allFinite() || !data.x.allFinite()) throw DomainError("Dataset: non-finite entry");
}

/// Least squares with intercept via Householder QR of [1 | X]. A column whose
/// R diagonal falls below 1e-10 times the largest R diagonal is reported as
/// collinear with the columns before it.
template <typename Scalar>
OlsFit<Scalar> fit_ols(const Dataset<Scalar>& data) {
  using std::abs;
  validate(data);
  const Eigen::Index n = data.n();
  const Eigen::Index k = data.k();

  Matrix<Scalar> design(n, k + 1);
  design.col(0).setOnes();
  design.rightCols(k) = data.x;

  const Eigen::HouseholderQR<Matrix<Scalar>> qr(design);
  const auto r = qr.matrixQR().topLeftCorner(k + 1, k + 1).template triangularView<Eigen::Upper>();
  const Vector<Scalar> diag = qr.matrixQR().diagonal().head(k + 1).cwiseAbs();
  const Scalar threshold = Scalar(1e-10) * diag.maxCoeff();
  for (Eigen::Index j = 0; j <= k; ++j) {
    if (!(diag(j) > threshold)) {
      throw RankDeficiencyError(j == 0 ? std::string("fit_ols: intercept column is degenerate")
                                       : "fit_ols: covariate column " + std::to_string(j) +
                                             " is collinear with preceding columns",
                                static_cast<std::size_t>(j));
    }
  }

  const Vector<Scalar> qty = qr.householderQ().adjoint() * data.y;
  const Vector<Scalar> theta = r.solve(qty.head(k + 1));

  OlsFit<Scalar> fit;
  fit.intercept = theta(0);
  fit.coefficients = theta.tail(k);
  fit.fitted = design * theta;
  const Scalar sse = (data.y - fit.fitted).squaredNorm();
  const Scalar sst = (data.y.array() - data.y.mean()).matrix().squaredNorm();
  fit.residual_variance_hat = sse / Scalar(n - k - 1);
  fit.constant_outcome = (data.y.array() == data.y(0)).all() || sst == Scalar(0);
  if (fit.constant_outcome) {
    fit.r2 = Scalar(0);
  } else {
    fit.r2 = std::clamp(Scalar(1) - sse / sst, Scalar(0), Scalar(1));
  }
  return fit;
}

template <typename Scalar>
Scalar r_squared(const Dataset<Scalar>& data) {
  return fit_ols(data).r2;
}

}  // namespace r2margin
