#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "btmc/mlmc.hpp"
#include "btmc/scenario.hpp"

namespace btmc {

struct EpsResult {
  double eps = 0.0;
  bool skipped = false;           // eps outside the admissible range
  MlmcPlan plan;
  std::vector<MlmcResult> replicates;
  double rmse = 0.0;              // against the reference mean
  std::int64_t work_units = 0;    // per replicate (identical across replicates)
};

struct ScenarioResult {
  ScenarioConfig config;
  double reference_value = 0.0;
  std::vector<double> reference_estimates;
  std::vector<EpsResult> per_eps;
};

// Runs the reference estimator (n_ref replicates at eps_ref), then n_ml
// replicates per entry of eps_list, and reports the realized RMSE per eps.
// All randomness is derived from config.seed; rerunning with the same seed
// reproduces the result bit for bit at any thread count.
ScenarioResult run_scenario(const ScenarioConfig& config, int threads = 1);

// Fixed-schema CSV with a YAML front-matter block echoing the config.
void write_scenario_csv(std::ostream& os, const ScenarioResult& result);

// Rows parsed back from write_scenario_csv output.
struct CsvSummary {
  std::string scenario;
  RateParams rates;
  int d = 2;
  std::vector<double> eps;
  std::vector<double> rmse;
  std::vector<double> work_units;  // per replicate
};

CsvSummary read_scenario_csv(std::istream& is);

struct ComplexityFit {
  double fitted_slope = 0.0;     // log2(work) vs log2(eps)
  double predicted_exponent = 0.0;
  int points = 0;
};

// Least-squares fit of recorded work against eps; needs >= 3 points.
std::optional<ComplexityFit> complexity_report(const CsvSummary& summary);

// Writes b_{T,N} on the 2^R lattice and the matching FEM solution (constant
// unit load) to <prefix>_field.csv and <prefix>_solution.csv.
void dump_field_sample(const ScenarioConfig& config, int resolution, int truncation,
                       const std::string& prefix);

}  // namespace btmc
