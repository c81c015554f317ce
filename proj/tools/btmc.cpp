// Batch driver for the Besov-tree MLMC experiments: runs scenario estimators
// against a high-accuracy reference, dumps sample fields for figures, and
// summarizes recorded runs.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "btmc/experiment.hpp"

namespace {

btmc::ScenarioConfig resolve_scenario(const std::string& spec) {
  if (btmc::is_builtin_scenario(spec)) return btmc::builtin_scenario(spec);
  return btmc::load_scenario_file(spec);
}

int cmd_run(const std::string& scenario, const std::vector<double>& eps_list, std::uint64_t seed,
            bool seed_set, int threads, bool full, bool timings, const std::string& out_path) {
  btmc::ScenarioConfig config = resolve_scenario(scenario);
  if (full) btmc::apply_full_scale(config);
  if (!eps_list.empty()) config.eps_list = eps_list;
  if (seed_set) config.seed = seed;
  config.emit_timings = timings;

  const btmc::ScenarioResult result = btmc::run_scenario(config, threads);

  std::string path = !out_path.empty() ? out_path
                     : !config.out_path.empty() ? config.out_path
                                                : "results_" + config.name + ".csv";
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return 2;
  }
  btmc::write_scenario_csv(out, result);

  std::printf("scenario %s  reference E(Psi) = %.6f  (n_ref=%d at eps_ref=%.3g)\n",
              config.name.c_str(), result.reference_value, config.n_ref, config.eps_ref);
  std::printf("%12s %12s %12s %14s\n", "eps", "RMSE", "RMSE/eps", "work_units");
  for (const auto& er : result.per_eps) {
    if (er.skipped) {
      std::printf("%12.5g %12s %12s %14s  (outside admissible range, skipped)\n", er.eps, "-",
                  "-", "-");
      continue;
    }
    std::printf("%12.5g %12.5g %12.3f %14lld\n", er.eps, er.rmse, er.rmse / er.eps,
                static_cast<long long>(er.work_units));
  }
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int cmd_dump_field(const std::string& scenario, int resolution, int truncation, std::uint64_t seed,
                   bool seed_set, const std::string& out_prefix) {
  btmc::ScenarioConfig config = resolve_scenario(scenario);
  if (seed_set) config.seed = seed;
  const std::string prefix = out_prefix.empty() ? "sample_" + config.name : out_prefix;
  btmc::dump_field_sample(config, resolution, truncation, prefix);
  std::printf("wrote %s_field.csv and %s_solution.csv\n", prefix.c_str(), prefix.c_str());
  return 0;
}

int cmd_report(const std::string& in_path) {
  std::ifstream in(in_path);
  if (!in) {
    std::cerr << "error: cannot read " << in_path << "\n";
    return 2;
  }
  const btmc::CsvSummary summary = btmc::read_scenario_csv(in);
  if (summary.eps.empty()) {
    std::cerr << "error: no rmse rows found in " << in_path << "\n";
    return 2;
  }
  std::printf("scenario %s\n", summary.scenario.c_str());
  std::printf("%12s %12s %12s %14s\n", "eps", "RMSE", "RMSE/eps", "work_units");
  for (std::size_t i = 0; i < summary.eps.size(); ++i)
    std::printf("%12.5g %12.5g %12.3f %14.0f\n", summary.eps[i], summary.rmse[i],
                summary.rmse[i] / summary.eps[i], summary.work_units[i]);
  const auto fit = btmc::complexity_report(summary);
  if (fit) {
    std::printf("work ~ eps^%.3f (fitted over %d points; predicted exponent %.3f%s)\n",
                fit->fitted_slope, fit->points, fit->predicted_exponent,
                summary.scenario == "smooth_gaussian" ? ", up to log^2 factors" : "");
  } else {
    std::printf("fewer than 3 eps points recorded; no complexity fit\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Besov random tree priors, FEM, and multilevel Monte Carlo"};
  app.require_subcommand(1);

  std::string scenario, out_path, in_path, out_prefix;
  std::vector<double> eps_list;
  std::uint64_t seed = 0;
  int threads = 0;
  int resolution = 9, truncation = 9;
  bool full = false, timings = false;

  auto* run = app.add_subcommand("run", "run a scenario and write the result CSV");
  run->add_option("--scenario", scenario, "builtin name or config file path")->required();
  run->add_option("--eps-list", eps_list, "override target accuracies");
  auto* seed_opt = run->add_option("--seed", seed, "master seed");
  run->add_option("--threads", threads, "worker threads (0: all cores)");
  run->add_flag("--full", full, "full-scale replicate counts and accuracies");
  run->add_flag("--timings", timings, "include wall-clock columns in the CSV");
  run->add_option("--out", out_path, "output CSV path");

  auto* dump = app.add_subcommand("dump-field", "write one sampled field and its FEM solution");
  dump->add_option("--scenario", scenario, "builtin name or config file path")->required();
  dump->add_option("--resolution", resolution, "lattice resolution R (grid 2^R x 2^R)");
  dump->add_option("--truncation", truncation, "maximal wavelet scale N");
  auto* dump_seed_opt = dump->add_option("--seed", seed, "master seed");
  dump->add_option("--out", out_prefix, "output file prefix");

  auto* report = app.add_subcommand("report", "summarize a recorded run CSV");
  report->add_option("--in", in_path, "input CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(scenario, eps_list, seed, seed_opt->count() > 0, threads, full, timings,
                     out_path);
    if (dump->parsed())
      return cmd_dump_field(scenario, resolution, truncation, seed, dump_seed_opt->count() > 0,
                            out_prefix);
    if (report->parsed()) return cmd_report(in_path);
  } catch (const btmc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
