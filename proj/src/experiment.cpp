#include "btmc/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "btmc/stats.hpp"

namespace btmc {

namespace {

constexpr std::uint32_t kReferenceRunId = 0xFFFF0000u;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double admissible_eps_bound(const ScenarioConfig& config) {
  return std::pow(0.5, (2.0 - config.rates.theta) * config.rates.r);
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config, int threads) {
  if (config.eps_list.empty()) throw ConfigError("run: eps list is empty");
  if (!(config.eps_ref > 0.0 && config.eps_ref < admissible_eps_bound(config)))
    throw ConfigError("run: eps_ref outside the admissible range");
  if (config.n_ml < 1 || config.n_ref < 1) throw ConfigError("run: replicate counts must be >= 1");

  ScenarioResult result;
  result.config = config;

  // one wavelet table serves the whole run
  const MlmcPlan ref_plan = make_plan(config.eps_ref, config.rates);
  int max_trunc = ref_plan.trunc.back();
  int max_res = ref_plan.mesh_level(ref_plan.levels) + 1;
  std::vector<std::optional<MlmcPlan>> plans;
  for (double eps : config.eps_list) {
    if (eps > 0.0 && eps < admissible_eps_bound(config)) {
      plans.emplace_back(make_plan(eps, config.rates));
      max_trunc = std::max(max_trunc, plans.back()->trunc.back());
      max_res = std::max(max_res, plans.back()->mesh_level(plans.back()->levels) + 1);
    } else {
      plans.emplace_back(std::nullopt);
    }
  }
  const WaveletTable table(WaveletFamily::daubechies(5),
                           cascade_depth_for(config, max_trunc, max_res));
  const PdeQoiPayload payload(config.prior, &table);

  for (int i = 0; i < config.n_ref; ++i) {
    MlmcOptions options;
    options.threads = threads;
    options.run_id = kReferenceRunId;
    options.replicate = static_cast<std::uint32_t>(i);
    result.reference_estimates.push_back(
        mlmc_estimate(ref_plan, payload, config.seed, options).estimate);
  }
  result.reference_value =
      pairwise_sum(result.reference_estimates) / static_cast<double>(config.n_ref);

  for (std::size_t e = 0; e < config.eps_list.size(); ++e) {
    EpsResult er;
    er.eps = config.eps_list[e];
    if (!plans[e].has_value()) {
      er.skipped = true;
      result.per_eps.push_back(std::move(er));
      continue;
    }
    er.plan = *plans[e];
    std::vector<double> sq_dev(static_cast<std::size_t>(config.n_ml));
    for (int i = 0; i < config.n_ml; ++i) {
      MlmcOptions options;
      options.threads = threads;
      options.run_id = static_cast<std::uint32_t>(e);
      options.replicate = static_cast<std::uint32_t>(i);
      er.replicates.push_back(mlmc_estimate(er.plan, payload, config.seed, options));
      const double dev = er.replicates.back().estimate - result.reference_value;
      sq_dev[static_cast<std::size_t>(i)] = dev * dev;
    }
    er.rmse = std::sqrt(pairwise_sum(sq_dev) / static_cast<double>(config.n_ml));
    er.work_units = er.plan.work_units_total();
    result.per_eps.push_back(std::move(er));
  }
  return result;
}

void write_scenario_csv(std::ostream& os, const ScenarioResult& result) {
  const ScenarioConfig& c = result.config;
  os << "---\n";
  os << "scenario: " << c.name << "\n";
  os << "d: " << c.prior.tree.d << "\n";
  os << "s: " << fmt(c.prior.s) << "\n";
  os << "p: " << fmt(c.prior.p) << "\n";
  os << "kappa: " << fmt(c.prior.kappa) << "\n";
  os << "beta: " << fmt(c.prior.tree.beta) << "\n";
  os << "t: " << fmt(c.rates.t) << "\n";
  os << "r: " << fmt(c.rates.r) << "\n";
  os << "theta: " << fmt(c.rates.theta) << "\n";
  os << "eps_list:";
  for (double e : c.eps_list) os << " " << fmt(e);
  os << "\n";
  os << "eps_ref: " << fmt(c.eps_ref) << "\n";
  os << "n_ml: " << c.n_ml << "\n";
  os << "n_ref: " << c.n_ref << "\n";
  os << "seed: " << c.seed << "\n";
  os << "---\n";
  os << "kind,role,eps,replicate,level,N_l,h_l,M_l,mean_y,var_y,estimate,rmse,work_units,"
        "wall_seconds,rejected\n";

  auto emit_replicate = [&](const std::string& role, double eps, int replicate,
                            const MlmcResult& res) {
    for (const auto& st : res.levels) {
      os << "level," << role << "," << fmt(eps) << "," << replicate << "," << st.level << ","
         << st.trunc << "," << fmt(st.h) << "," << st.samples << "," << fmt(st.mean_y) << ","
         << fmt(st.var_y) << ",,," << st.work_units << ",";
      if (result.config.emit_timings) os << fmt(st.wall_seconds);
      os << "," << st.rejected << "\n";
    }
    os << "estimate," << role << "," << fmt(eps) << "," << replicate << ",,,,,,,"
       << fmt(res.estimate) << ",," << res.work_units_total << ",";
    if (result.config.emit_timings) os << fmt(res.wall_seconds);
    os << "," << res.rejected_total << "\n";
  };

  for (std::size_t i = 0; i < result.reference_estimates.size(); ++i) {
    // reference rows carry the estimate alone (levels omitted for brevity)
    os << "estimate,reference," << fmt(result.config.eps_ref) << "," << i << ",,,,,,,"
       << fmt(result.reference_estimates[i]) << ",,,,\n";
  }
  os << "reference_mean,reference," << fmt(result.config.eps_ref) << ",,,,,,,,"
     << fmt(result.reference_value) << ",,,,\n";

  for (const auto& er : result.per_eps) {
    if (er.skipped) {
      os << "skipped,main," << fmt(er.eps) << ",,,,,,,,,,,,\n";
      continue;
    }
    for (std::size_t i = 0; i < er.replicates.size(); ++i)
      emit_replicate("main", er.eps, static_cast<int>(i), er.replicates[i]);
    os << "rmse,main," << fmt(er.eps) << ",,,,,,,,," << fmt(er.rmse) << "," << er.work_units
       << ",,\n";
  }
}

CsvSummary read_scenario_csv(std::istream& is) {
  CsvSummary summary;
  std::string line;
  bool in_header = false;
  while (std::getline(is, line)) {
    if (line == "---") {
      in_header = !in_header;
      continue;
    }
    if (in_header) {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = line.substr(0, colon);
      const std::string value = line.substr(colon + 2 > line.size() ? colon + 1 : colon + 2);
      if (key == "scenario") summary.scenario = value;
      if (key == "t") summary.rates.t = std::stod(value);
      if (key == "r") summary.rates.r = std::stod(value);
      if (key == "theta") summary.rates.theta = std::stod(value);
      if (key == "d") summary.d = std::stoi(value);
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 13 || cells[0] != "rmse") continue;
    summary.eps.push_back(std::stod(cells[2]));
    summary.rmse.push_back(std::stod(cells[11]));
    summary.work_units.push_back(std::stod(cells[12]));
  }
  return summary;
}

std::optional<ComplexityFit> complexity_report(const CsvSummary& summary) {
  if (summary.eps.size() < 3) return std::nullopt;
  ComplexityFit fit;
  fit.points = static_cast<int>(summary.eps.size());
  fit.fitted_slope = fit_log2_slope(summary.eps, summary.work_units);
  fit.predicted_exponent = predicted_work_exponent(summary.rates, summary.d);
  return fit;
}

void dump_field_sample(const ScenarioConfig& config, int resolution, int truncation,
                       const std::string& prefix) {
  if (resolution < 1 || resolution > 12) throw ConfigError("dump-field: resolution out of range");
  if (truncation < 0 || truncation > 14) throw ConfigError("dump-field: truncation out of range");

  const WaveletTable table(WaveletFamily::daubechies(5),
                           cascade_depth_for(config, truncation, resolution));
  PriorParams prior = config.prior;
  prior.truncation = truncation;
  validate_prior_params(prior, table.family());

  const SampleKey key{config.seed, 0xD0F1u, 0, 0, 0, 0};
  const FieldRealization field = sample_field(prior, key);

  std::ostringstream echo;
  echo << "scenario=" << config.name << " s=" << fmt(prior.s) << " p=" << fmt(prior.p)
       << " kappa=" << fmt(prior.kappa) << " beta=" << fmt(prior.tree.beta)
       << " N=" << truncation << " seed=" << config.seed;

  const GridField b = evaluate_field(field, resolution, GridKind::lattice, table);
  std::ofstream field_out(prefix + "_field.csv");
  if (!field_out) throw std::runtime_error("dump-field: cannot write " + prefix + "_field.csv");
  write_grid(field_out, b, echo.str());

  const int mesh_level = resolution - 1;
  const GridField coeff = coefficient_at_midpoints(field, mesh_level, table);
  const MeshLevel mesh(mesh_level);
  const DiscreteSolution u = solve(assemble_stiffness(mesh, coeff), assemble_load(mesh, 1.0));
  std::ofstream sol_out(prefix + "_solution.csv");
  if (!sol_out) throw std::runtime_error("dump-field: cannot write " + prefix + "_solution.csv");
  write_grid(sol_out, solution_to_grid(u), echo.str());
}

}  // namespace btmc
