#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "btmc/experiment.hpp"
#include "btmc/tree.hpp"

using namespace btmc;

namespace {

// a fast custom configuration used by the CSV and determinism tests
ScenarioConfig tiny_config() {
  ScenarioConfig c = builtin_scenario("smooth_gaussian");
  c.eps_list = {std::exp2(-3.0)};
  c.eps_ref = std::exp2(-4.0);
  c.n_ml = 2;
  c.n_ref = 2;
  c.seed = 7;
  return c;
}

std::string temp_path(const std::string& name) {
  return std::string("/tmp/btmc_test_") + name;
}

}  // namespace

TEST_CASE("builtin scenarios match the parameter table") {
  const auto smooth = builtin_scenario("smooth_gaussian");
  CHECK(smooth.prior.s == 2.0);
  CHECK(smooth.prior.p == 2.0);
  CHECK(smooth.prior.kappa == 1.0);
  CHECK(smooth.prior.tree.beta == 0.5);
  CHECK(smooth.rates.t == 1.0);
  CHECK(smooth.rates.r == 1.0);
  CHECK(smooth.rates.theta == 1.0);

  const auto rough = builtin_scenario("rough_gaussian");
  CHECK(rough.prior.s == 1.5);
  CHECK(rough.prior.p == 2.0);
  CHECK(rough.prior.tree.beta == 0.5);
  CHECK(rough.rates.t == 0.5);
  CHECK(rough.rates.r == 0.5);

  const auto pexp = builtin_scenario("p_exponential");
  CHECK(pexp.prior.s == 2.0);
  CHECK(pexp.prior.p == 1.6);
  CHECK(pexp.prior.tree.beta == 0.75);
  CHECK(pexp.rates.t == 0.75);
  CHECK(pexp.rates.r == 0.75);

  CHECK_THROWS_AS(builtin_scenario("nope"), ConfigError);

  // desk-scale defaults
  CHECK(smooth.n_ml == 32);
  CHECK(smooth.n_ref == 8);
  CHECK(smooth.eps_ref == std::exp2(-8.0));
  REQUIRE(smooth.eps_list.size() == 4);
  CHECK(smooth.eps_list.front() == std::exp2(-3.0));
  CHECK(smooth.eps_list.back() == std::exp2(-6.0));
  CHECK(rough.eps_ref == std::exp2(-4.0));
  CHECK(rough.eps_list.front() == std::exp2(-1.5));
}

TEST_CASE("full-scale settings") {
  auto c = builtin_scenario("smooth_gaussian");
  apply_full_scale(c);
  CHECK(c.n_ml == 256);
  CHECK(c.n_ref == 16);
  CHECK(c.eps_ref == std::exp2(-11.0));
  REQUIRE(c.eps_list.size() == 5);
  CHECK(c.eps_list.front() == std::exp2(-5.0));
  CHECK(c.eps_list.back() == std::exp2(-9.0));
}

TEST_CASE("config files") {
  SUBCASE("base scenario with overrides") {
    const std::string path = temp_path("cfg_ok");
    std::ofstream(path) << "scenario = rough_gaussian\n"
                           "# comment line\n"
                           "beta = 0.25\n"
                           "eps = 0.25,0.125\n"
                           "eps_ref = 0.0625\n"
                           "n_ml = 4\n"
                           "seed = 99\n";
    const auto c = load_scenario_file(path);
    CHECK(c.name == "rough_gaussian");
    CHECK(c.prior.s == 1.5);
    CHECK(c.prior.tree.beta == 0.25);
    CHECK(c.eps_list == std::vector<double>{0.25, 0.125});
    CHECK(c.eps_ref == 0.0625);
    CHECK(c.n_ml == 4);
    CHECK(c.seed == 99);
  }

  SUBCASE("unknown keys are rejected") {
    const std::string path = temp_path("cfg_bad_key");
    std::ofstream(path) << "scenario = smooth_gaussian\nfrobnicate = 3\n";
    CHECK_THROWS_AS(load_scenario_file(path), ConfigError);
  }

  SUBCASE("bad values are rejected") {
    const std::string path = temp_path("cfg_bad_value");
    std::ofstream(path) << "scenario = smooth_gaussian\ns = banana\n";
    CHECK_THROWS_AS(load_scenario_file(path), ConfigError);
  }

  SUBCASE("custom scenarios need eps settings") {
    const std::string path = temp_path("cfg_custom_incomplete");
    std::ofstream(path) << "s = 2\np = 2\nbeta = 0.5\nt = 1\nr = 1\n";
    CHECK_THROWS_AS(load_scenario_file(path), ConfigError);
  }

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_scenario_file("/nonexistent/btmc.cfg"), ConfigError);
  }
}

TEST_CASE("predicted work exponents") {
  CHECK(predicted_work_exponent({1.0, 1.0, 1.0}, 2) == -2.0);        // log^2 factor implied
  CHECK(predicted_work_exponent({0.5, 0.5, 1.0}, 2) == -4.0);
  CHECK(predicted_work_exponent({0.75, 0.75, 1.0}, 2) ==
        doctest::Approx(-8.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("run_scenario output") {
  const ScenarioConfig config = tiny_config();
  const ScenarioResult result = run_scenario(config, 1);

  SUBCASE("estimates are positive and rmse is attached") {
    CHECK(result.reference_value > 0.0);
    REQUIRE(result.per_eps.size() == 1);
    CHECK(!result.per_eps[0].skipped);
    CHECK(result.per_eps[0].replicates.size() == 2);
    CHECK(result.per_eps[0].rmse >= 0.0);
    CHECK(result.per_eps[0].work_units ==
          result.per_eps[0].plan.work_units_total());
  }

  SUBCASE("per-level means sum to each replicate estimate") {
    for (const auto& rep : result.per_eps[0].replicates) {
      double acc = 0.0;
      for (const auto& st : rep.levels) acc += st.mean_y;
      CHECK(rep.estimate == acc);
    }
  }

  SUBCASE("a single replicate reduces the rmse to an absolute deviation") {
    ScenarioConfig one = tiny_config();
    one.n_ml = 1;
    const ScenarioResult r1 = run_scenario(one, 1);
    const double dev =
        std::abs(r1.per_eps[0].replicates[0].estimate - r1.reference_value);
    CHECK(r1.per_eps[0].rmse == doctest::Approx(dev).epsilon(1e-15));
  }

  SUBCASE("csv matches the golden file") {
    std::ostringstream ss;
    write_scenario_csv(ss, result);
    std::ifstream golden(std::string(BTMC_TEST_DIR) + "/golden/tiny_run.csv");
    REQUIRE_MESSAGE(golden.good(), "golden file golden/tiny_run.csv not found");
    std::stringstream expected;
    expected << golden.rdbuf();
    CHECK(ss.str() == expected.str());
  }

  SUBCASE("csv is byte-identical across thread counts and reruns") {
    std::ostringstream a, b;
    write_scenario_csv(a, result);
    write_scenario_csv(b, run_scenario(config, 4));
    CHECK(a.str() == b.str());
  }

  SUBCASE("csv parses back and feeds the report") {
    std::ostringstream ss;
    write_scenario_csv(ss, result);
    std::istringstream in(ss.str());
    const CsvSummary summary = read_scenario_csv(in);
    CHECK(summary.scenario == "smooth_gaussian");
    REQUIRE(summary.eps.size() == 1);
    CHECK(summary.eps[0] == std::exp2(-3.0));
    CHECK(summary.work_units[0] ==
          static_cast<double>(result.per_eps[0].work_units));
    CHECK(!complexity_report(summary).has_value());  // one point only
  }

  SUBCASE("out-of-range eps entries are skipped with a report row") {
    ScenarioConfig config2 = tiny_config();
    config2.eps_list = {0.75, std::exp2(-3.0)};
    const ScenarioResult r2 = run_scenario(config2, 1);
    REQUIRE(r2.per_eps.size() == 2);
    CHECK(r2.per_eps[0].skipped);
    CHECK(!r2.per_eps[1].skipped);
    std::ostringstream ss;
    write_scenario_csv(ss, r2);
    CHECK(ss.str().find("skipped,main,0.75") != std::string::npos);
  }
}

TEST_CASE("complexity fit on synthetic records") {
  CsvSummary summary;
  summary.scenario = "synthetic";
  summary.rates = {1.0, 1.0, 1.0};
  summary.d = 2;
  for (int xi = 2; xi <= 6; ++xi) {
    const double eps = std::exp2(-xi);
    summary.eps.push_back(eps);
    summary.rmse.push_back(eps);
    summary.work_units.push_back(1.0 / (eps * eps));
  }
  const auto fit = complexity_report(summary);
  REQUIRE(fit.has_value());
  CHECK(fit->fitted_slope == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(fit->predicted_exponent == -2.0);
  CHECK(fit->points == 5);
}

TEST_CASE("dump_field_sample") {
  ScenarioConfig config = builtin_scenario("smooth_gaussian");
  config.seed = 11;

  SUBCASE("deterministic output files") {
    dump_field_sample(config, 4, 3, temp_path("dump_a"));
    dump_field_sample(config, 4, 3, temp_path("dump_b"));
    for (const char* suffix : {"_field.csv", "_solution.csv"}) {
      std::ifstream fa(temp_path("dump_a") + suffix), fb(temp_path("dump_b") + suffix);
      std::stringstream sa, sb;
      sa << fa.rdbuf();
      sb << fb.rdbuf();
      CHECK(sa.str() == sb.str());
      CHECK(!sa.str().empty());
    }
  }

  SUBCASE("field grid has the requested shape") {
    dump_field_sample(config, 5, 4, temp_path("dump_c"));
    std::ifstream in(temp_path("dump_c") + "_field.csv");
    const GridField grid = read_grid(in);
    CHECK(grid.d == 2);
    CHECK(grid.resolution == 5);
    CHECK(grid.kind == GridKind::lattice);
    CHECK(grid.values.size() == 32u * 32u);
  }

  SUBCASE("full wavelet density populates every scale") {
    ScenarioConfig gauss = config;
    gauss.prior.tree.beta = 1.0;
    PriorParams p = gauss.prior;
    p.truncation = 4;
    const auto field = sample_field(p, SampleKey{gauss.seed, 0, 0, 0, 0, 0});
    for (int j = 0; j <= 4; ++j)
      CHECK(field.active.nodes_at(j) == (std::size_t{1} << (2 * j)));
  }

  SUBCASE("shared gate stream couples active sets monotonically in beta") {
    const SampleKey key{config.seed, 0, 0, 0, 0, 0};
    const auto lo = sample_tree({2, 0.25}, 6, gate_source(key));
    const auto hi = sample_tree({2, 0.75}, 6, gate_source(key));
    for (int j = 0; j <= 6; ++j) {
      const auto& l = lo.scales[static_cast<std::size_t>(j)];
      const auto& h = hi.scales[static_cast<std::size_t>(j)];
      for (std::uint64_t n : l)
        CHECK(std::find(h.begin(), h.end(), n) != h.end());
    }
  }
}
