#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "r2margin/errors.hpp"
#include "r2margin/random.hpp"
#include "r2margin/regression.hpp"

namespace r2margin {

/// Population proportion of variance for y = b0 + X b + e with X ~ MVN(0, Sigma):
/// b' Sigma b / (b' Sigma b + sigma2).
template <typename DerivedB, typename DerivedS>
typename DerivedB::Scalar true_p2(const Eigen::MatrixBase<DerivedB>& beta, const Eigen::MatrixBase<DerivedS>& sigma,
                                  typename DerivedB::Scalar sigma2) {
  using Scalar = typename DerivedB::Scalar;
  if (sigma.rows() != sigma.cols() || sigma.rows() != beta.size()) {
    throw DimensionMismatchError("true_p2: beta has length " + std::to_string(beta.size()) +
                                 " but sigma is " + std::to_string(sigma.rows()) + "x" +
                                 std::to_string(sigma.cols()));
  }
  if (!(sigma2 > Scalar(0))) throw DomainError("true_p2: sigma2 must be positive");
  const Scalar signal = beta.dot(sigma * beta);
  return signal / (signal + sigma2);
}

/// Lower-triangular L with L L' = sigma. Throws NotPositiveDefiniteError when
/// a pivot is <= 1e-12.
template <typename Derived>
Matrix<typename Derived::Scalar> cholesky_factor(const Eigen::MatrixBase<Derived>& sigma) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::sqrt;
  const Eigen::Index k = sigma.rows();
  if (sigma.cols() != k) throw DimensionMismatchError("cholesky_factor: matrix is not square");
  const Scalar scale = std::max(Scalar(1), sigma.cwiseAbs().maxCoeff());
  if (!((sigma - sigma.transpose()).cwiseAbs().maxCoeff() <= Scalar(1e-12) * scale)) {
    throw DomainError("cholesky_factor: matrix is not symmetric");
  }
  Matrix<Scalar> lower = Matrix<Scalar>::Zero(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Scalar pivot = sigma(j, j) - lower.row(j).head(j).squaredNorm();
    if (!(pivot > Scalar(1e-12))) {
      throw NotPositiveDefiniteError("cholesky_factor: pivot " + std::to_string(j) + " is not positive");
    }
    lower(j, j) = sqrt(pivot);
    for (Eigen::Index i = j + 1; i < k; ++i) {
      lower(i, j) = (sigma(i, j) - lower.row(i).head(j).dot(lower.row(j).head(j))) / lower(j, j);
    }
  }
  return lower;
}

/// One cell of a simulation grid.
struct Scenario {
  std::string id;
  long n = 0;
  long k = 0;
  Eigen::VectorXd beta;
  double sigma2 = 1.0;
  Eigen::MatrixXd sigma_matrix;
  double beta0 = 0.0;
  std::optional<double> reported_p2;  // value quoted alongside the published grid, metadata only

  double true_p2() const { return r2margin::true_p2(beta, sigma_matrix, sigma2); }
};

/// Throws DomainError / DimensionMismatchError / NotPositiveDefiniteError.
void validate(const Scenario& scenario);

/// Unit-diagonal k x k matrix with every off-diagonal entry equal to offdiag.
Eigen::MatrixXd exchangeable_covariance(long k, double offdiag);

struct RejectionRecord {
  std::string scenario_id;
  long n = 0;
  long k = 0;
  double sigma2 = 0.0;
  double true_p2 = 0.0;
  double delta = 0.0;
  double alpha = 0.0;
  std::uint64_t n_sims = 0;
  std::uint64_t rejections = 0;
  double rejection_rate = 0.0;  // rejections / n_sims
  std::uint64_t skipped = 0;
  std::uint64_t master_seed = 0;
};

/// Draws X rows as L z with z standard normal, then y = b0 + X b + e.
Dataset<double> generate_dataset(const Scenario& scenario, RandomStream& stream);
Dataset<double> generate_dataset(const Scenario& scenario, const Eigen::MatrixXd& cholesky_lower,
                                 RandomStream& stream);

/// Stream for replicate j of a scenario; independent of run order.
RandomStream replicate_stream(std::uint64_t master_seed, const std::string& scenario_id, std::uint64_t replicate);

/// Simulates n_sims datasets, computes R^2 once per dataset and tests every
/// delta against it, counting p < alpha. Records come back in deltas order.
/// threads == 0 picks std::thread::hardware_concurrency(). Throws
/// ExcessiveSkipsError when more than 0.1% of replicates fail inference.
std::vector<RejectionRecord> run_scenario(const Scenario& scenario, const std::vector<double>& deltas,
                                          std::uint64_t n_sims, double alpha, std::uint64_t master_seed,
                                          unsigned threads = 0);

std::vector<RejectionRecord> run_grid(const std::vector<Scenario>& scenarios, const std::vector<double>& deltas,
                                      std::uint64_t n_sims, double alpha, std::uint64_t master_seed,
                                      unsigned threads = 0);

/// 3 residual variances x 5 sample sizes x 2 covariate settings.
std::vector<Scenario> paper_grid();

/// 19 margins, 0.01 to 0.10 in steps of 0.005.
std::vector<double> default_deltas();

inline constexpr std::uint64_t kDefaultSims = 5'000;
inline constexpr double kDefaultAlpha = 0.05;

}  // namespace r2margin
