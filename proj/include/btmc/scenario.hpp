#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "btmc/mlmc.hpp"
#include "btmc/prior.hpp"

namespace btmc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  std::string name = "custom";
  PriorParams prior;     // truncation is chosen per level by the plan
  RateParams rates;
  std::vector<double> eps_list;
  double eps_ref = 0.0;
  int n_ml = 32;
  int n_ref = 8;
  std::uint64_t seed = 0;
  std::string out_path;       // empty: results_<name>.csv
  bool emit_timings = false;  // wall-clock columns stay empty unless set
};

// Table of built-in parameter sets:
//   smooth_gaussian: s=2,   p=2,   kappa=1, beta=1/2, t=1,   r=1
//   rough_gaussian:  s=3/2, p=2,   kappa=1, beta=1/2, t=1/2, r=1/2
//   p_exponential:   s=2,   p=8/5, kappa=1, beta=3/4, t=3/4, r=3/4
// Desk-scale defaults: eps = 2^{-r xi}, xi = 3..6, eps_ref = 2^{-8 r},
// n_ml = 32, n_ref = 8.
ScenarioConfig builtin_scenario(const std::string& name);
bool is_builtin_scenario(const std::string& name);

// Full-scale settings: xi = 5..9, eps_ref = 2^{-11 r}, n_ml = 256, n_ref = 16.
void apply_full_scale(ScenarioConfig& config);

// key = value lines; '#' comments. Unknown keys are rejected.
ScenarioConfig load_scenario_file(const std::string& path);

// Predicted work exponent of the estimator cost in eps (log factors ignored):
// -2 if 2(2-theta) r >= d, else -(2 + (d - 2(2-theta) r)/((2-theta) r)).
double predicted_work_exponent(const RateParams& rates, int d);

// Cascade depth rule: J = max(ceil(N t / alpha), R + 2) for the deepest
// truncation N and finest evaluation resolution R in the run.
int cascade_depth_for(const ScenarioConfig& config, int max_trunc, int max_resolution);

}  // namespace btmc
