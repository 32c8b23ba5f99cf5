#include "r2margin/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <stdexcept>
#include <thread>

#include "r2margin/inference.hpp"

namespace r2margin {

namespace {

struct ChunkTally {
  std::vector<std::uint64_t> rejections;
  std::uint64_t skipped = 0;
  std::exception_ptr failure;
};

void simulate_chunk(const Scenario& scenario, const Eigen::MatrixXd& lower, const std::vector<double>& deltas,
                    double alpha, std::uint64_t master_seed, std::uint64_t label_hash, std::uint64_t begin,
                    std::uint64_t end, ChunkTally& tally) {
  tally.rejections.assign(deltas.size(), 0);
  std::vector<char> reject(deltas.size());
  try {
    for (std::uint64_t j = begin; j < end; ++j) {
      RandomStream stream(master_seed, label_hash, j);
      const Dataset<double> data = generate_dataset(scenario, lower, stream);
      try {
        const TestInput input(r_squared(data), scenario.n, scenario.k);
        for (std::size_t d = 0; d < deltas.size(); ++d) {
          reject[d] = noninferiority_pvalue(input, deltas[d]).p_value < alpha;
        }
      } catch (const DomainError&) {
        ++tally.skipped;
        continue;
      } catch (const ConvergenceError&) {
        ++tally.skipped;
        continue;
      } catch (const DegenerateInputError&) {
        ++tally.skipped;
        continue;
      } catch (const RankDeficiencyError&) {
        ++tally.skipped;
        continue;
      }
      for (std::size_t d = 0; d < deltas.size(); ++d) tally.rejections[d] += reject[d];
    }
  } catch (...) {
    tally.failure = std::current_exception();
  }
}

}  // namespace

void validate(const Scenario& scenario) {
  if (scenario.id.empty()) throw DomainError("Scenario: id must be non-empty");
  if (scenario.k < 1) throw DomainError("Scenario " + scenario.id + ": k must be >= 1");
  if (scenario.n < scenario.k + 2) throw DomainError("Scenario " + scenario.id + ": n must be >= k + 2");
  if (scenario.beta.size() != scenario.k) {
    throw DimensionMismatchError("Scenario " + scenario.id + ": beta length differs from k");
  }
  if (scenario.sigma_matrix.rows() != scenario.k || scenario.sigma_matrix.cols() != scenario.k) {
    throw DimensionMismatchError("Scenario " + scenario.id + ": covariance must be k x k");
  }
  if (!(scenario.sigma2 > 0.0) || !std::isfinite(scenario.sigma2)) {
    throw DomainError("Scenario " + scenario.id + ": sigma2 must be positive and finite");
  }
  if (!scenario.beta.allFinite() || !std::isfinite(scenario.beta0)) {
    throw DomainError("Scenario " + scenario.id + ": coefficients must be finite");
  }
  cholesky_factor(scenario.sigma_matrix);
}

Eigen::MatrixXd exchangeable_covariance(long k, double offdiag) {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(k, k, offdiag);
  sigma.diagonal().setOnes();
  return sigma;
}

Dataset<double> generate_dataset(const Scenario& scenario, RandomStream& stream) {
  validate(scenario);
  return generate_dataset(scenario, cholesky_factor(scenario.sigma_matrix), stream);
}

Dataset<double> generate_dataset(const Scenario& scenario, const Eigen::MatrixXd& cholesky_lower,
                                 RandomStream& stream) {
  const Eigen::Index n = scenario.n;
  const Eigen::Index k = scenario.k;
  const double sigma = std::sqrt(scenario.sigma2);
  Dataset<double> data{Eigen::VectorXd(n), Eigen::MatrixXd(n, k)};
  Eigen::VectorXd z(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) z(j) = sample_standard_normal(stream);
    data.x.row(i).noalias() = (cholesky_lower.triangularView<Eigen::Lower>() * z).transpose();
    data.y(i) = scenario.beta0 + data.x.row(i).dot(scenario.beta) + sigma * sample_standard_normal(stream);
  }
  return data;
}

RandomStream replicate_stream(std::uint64_t master_seed, const std::string& scenario_id, std::uint64_t replicate) {
  return RandomStream(master_seed, hash_label(scenario_id), replicate);
}

std::vector<RejectionRecord> run_scenario(const Scenario& scenario, const std::vector<double>& deltas,
                                          std::uint64_t n_sims, double alpha, std::uint64_t master_seed,
                                          unsigned threads) {
  validate(scenario);
  if (deltas.empty()) throw DomainError("run_scenario: at least one delta is required");
  for (double d : deltas) {
    if (!(d > 0.0 && d < 1.0)) throw DomainError("run_scenario: every delta must lie in (0, 1)");
  }
  if (n_sims < 1) throw DomainError("run_scenario: n_sims must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("run_scenario: alpha must lie in (0, 1)");

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const std::uint64_t workers = std::min<std::uint64_t>(threads, n_sims);
  const Eigen::MatrixXd lower = cholesky_factor(scenario.sigma_matrix);
  const std::uint64_t label_hash = hash_label(scenario.id);

  std::vector<ChunkTally> tallies(workers);
  auto bounds = [&](std::uint64_t w) { return n_sims * w / workers; };
  if (workers == 1) {
    simulate_chunk(scenario, lower, deltas, alpha, master_seed, label_hash, 0, n_sims, tallies[0]);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::uint64_t w = 0; w < workers; ++w) {
      pool.emplace_back(simulate_chunk, std::cref(scenario), std::cref(lower), std::cref(deltas), alpha,
                        master_seed, label_hash, bounds(w), bounds(w + 1), std::ref(tallies[w]));
    }
    for (auto& t : pool) t.join();
  }

  std::vector<std::uint64_t> rejections(deltas.size(), 0);
  std::uint64_t skipped = 0;
  for (const auto& tally : tallies) {
    if (tally.failure) std::rethrow_exception(tally.failure);
    for (std::size_t d = 0; d < deltas.size(); ++d) rejections[d] += tally.rejections[d];
    skipped += tally.skipped;
  }
  if (skipped * 1000 > n_sims) {
    throw ExcessiveSkipsError("run_scenario: " + std::to_string(skipped) + " of " + std::to_string(n_sims) +
                              " replicates in scenario " + scenario.id + " failed inference");
  }

  const double p2 = scenario.true_p2();
  std::vector<RejectionRecord> records;
  records.reserve(deltas.size());
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    RejectionRecord rec;
    rec.scenario_id = scenario.id;
    rec.n = scenario.n;
    rec.k = scenario.k;
    rec.sigma2 = scenario.sigma2;
    rec.true_p2 = p2;
    rec.delta = deltas[d];
    rec.alpha = alpha;
    rec.n_sims = n_sims;
    rec.rejections = rejections[d];
    rec.rejection_rate = static_cast<double>(rejections[d]) / static_cast<double>(n_sims);
    rec.skipped = skipped;
    rec.master_seed = master_seed;
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<RejectionRecord> run_grid(const std::vector<Scenario>& scenarios, const std::vector<double>& deltas,
                                      std::uint64_t n_sims, double alpha, std::uint64_t master_seed,
                                      unsigned threads) {
  std::vector<RejectionRecord> all;
  for (const auto& scenario : scenarios) {
    auto records = run_scenario(scenario, deltas, n_sims, alpha, master_seed, threads);
    all.insert(all.end(), std::make_move_iterator(records.begin()), std::make_move_iterator(records.end()));
  }
  return all;
}

std::vector<Scenario> paper_grid() {
  struct CovariateSetting {
    long k;
    std::vector<double> beta;
  };
  const std::vector<CovariateSetting> settings = {{2, {0.11, -0.15}}, {4, {0.11, 0.10, -0.05, -0.10}}};
  const std::vector<long> sample_sizes = {60, 180, 540, 1000, 8000};
  // Residual variance paired with the rounded P^2 quoted for it.
  const std::vector<std::pair<double, double>> variances = {{0.4, 0.080}, {0.5, 0.065}, {1.0, 0.034}};

  std::vector<Scenario> grid;
  for (const auto& setting : settings) {
    for (long n : sample_sizes) {
      for (const auto& [sigma2, reported] : variances) {
        char id[32];
        std::snprintf(id, sizeof id, "K%ld_N%04ld_S%.1f", setting.k, n, sigma2);
        Scenario s;
        s.id = id;
        s.n = n;
        s.k = setting.k;
        s.beta = Eigen::Map<const Eigen::VectorXd>(setting.beta.data(), setting.k);
        s.sigma2 = sigma2;
        s.sigma_matrix = exchangeable_covariance(setting.k, 0.05);
        s.beta0 = 0.0;
        s.reported_p2 = reported;
        grid.push_back(std::move(s));
      }
    }
  }
  return grid;
}

std::vector<double> default_deltas() {
  std::vector<double> deltas;
  for (int i = 0; i < 19; ++i) deltas.push_back((2 + i) / 200.0);
  return deltas;
}

}  // namespace r2margin
