#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "r2margin/errors.hpp"
#include "r2margin/montecarlo.hpp"
#include "r2margin/regression.hpp"

namespace r2margin {

/// Malformed CSV or JSON input.
class InputFormatError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Outcome in column 1, covariates in columns 2..K+1, one header row.
struct LabeledDataset {
  Dataset<double> data;
  std::vector<std::string> header;
};

LabeledDataset read_data_csv(std::istream& in);

struct SimulationConfig {
  std::vector<Scenario> scenarios;
  std::vector<double> deltas;
};

/// {"scenarios":[{"id","n","k","beta","sigma2","sigma_offdiag"}], "deltas":[...]}.
/// "deltas" may be omitted, in which case default_deltas() is used.
SimulationConfig parse_simulation_config(std::string_view json_text);

inline constexpr std::string_view kResultsHeader =
    "scenario_id,n,k,sigma2,true_p2,delta,alpha,n_sims,rejections,rejection_rate,skipped,master_seed";

/// Writes an optional "# comment" line, the header, then rows sorted by
/// (scenario_id, delta), LF line endings.
void write_results_csv(std::ostream& out, std::vector<RejectionRecord> records, std::string_view comment);

/// Reads rows written by write_results_csv; '#' lines are skipped.
std::vector<RejectionRecord> read_results_csv(std::istream& in);

/// One panel per covariate count (ascending), rejection rate against delta,
/// one polyline per scenario and a reference line at alpha. restricted_axis
/// caps the vertical axis at 0.2.
std::string render_svg(const std::vector<RejectionRecord>& records, bool restricted_axis);

}  // namespace r2margin
