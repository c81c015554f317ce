#include "btmc/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "btmc/wavelet.hpp"

namespace btmc {

namespace {

void set_desk_scale(ScenarioConfig& config) {
  config.eps_list.clear();
  for (int xi = 3; xi <= 6; ++xi)
    config.eps_list.push_back(std::exp2(-config.rates.r * xi));
  config.eps_ref = std::exp2(-config.rates.r * 8);
  config.n_ml = 32;
  config.n_ref = 8;
}

}  // namespace

bool is_builtin_scenario(const std::string& name) {
  return name == "smooth_gaussian" || name == "rough_gaussian" || name == "p_exponential";
}

ScenarioConfig builtin_scenario(const std::string& name) {
  ScenarioConfig config;
  config.name = name;
  config.prior.tree.d = 2;
  config.prior.kappa = 1.0;
  config.rates.theta = 1.0;
  if (name == "smooth_gaussian") {
    config.prior.s = 2.0;
    config.prior.p = 2.0;
    config.prior.tree.beta = 0.5;
    config.rates.t = 1.0;
    config.rates.r = 1.0;
  } else if (name == "rough_gaussian") {
    config.prior.s = 1.5;
    config.prior.p = 2.0;
    config.prior.tree.beta = 0.5;
    config.rates.t = 0.5;
    config.rates.r = 0.5;
  } else if (name == "p_exponential") {
    config.prior.s = 2.0;
    config.prior.p = 1.6;
    config.prior.tree.beta = 0.75;
    config.rates.t = 0.75;
    config.rates.r = 0.75;
  } else {
    throw ConfigError("unknown scenario: " + name);
  }
  set_desk_scale(config);
  return config;
}

void apply_full_scale(ScenarioConfig& config) {
  config.eps_list.clear();
  for (int xi = 5; xi <= 9; ++xi)
    config.eps_list.push_back(std::exp2(-config.rates.r * xi));
  config.eps_ref = std::exp2(-config.rates.r * 11);
  config.n_ml = 256;
  config.n_ref = 16;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);

  ScenarioConfig config;
  config.name = "custom";
  config.rates.theta = 1.0;
  bool have_eps = false, have_eps_ref = false;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) eq = line.find(':');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (eq == std::string::npos) {
      if (!trim(line).empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");

    try {
      if (key == "scenario" || key == "name") {
        if (is_builtin_scenario(value)) {
          const auto base = builtin_scenario(value);
          config.name = base.name;
          config.prior = base.prior;
          config.rates = base.rates;
          if (!have_eps) config.eps_list = base.eps_list;
          if (!have_eps_ref) config.eps_ref = base.eps_ref;
        } else {
          config.name = value;
        }
      } else if (key == "s") {
        config.prior.s = std::stod(value);
      } else if (key == "p") {
        config.prior.p = std::stod(value);
      } else if (key == "kappa") {
        config.prior.kappa = std::stod(value);
      } else if (key == "beta") {
        config.prior.tree.beta = std::stod(value);
      } else if (key == "d") {
        config.prior.tree.d = std::stoi(value);
      } else if (key == "t") {
        config.rates.t = std::stod(value);
      } else if (key == "r") {
        config.rates.r = std::stod(value);
      } else if (key == "theta") {
        config.rates.theta = std::stod(value);
      } else if (key == "eps") {
        config.eps_list.clear();
        std::istringstream es(value);
        std::string tok;
        while (std::getline(es, tok, ',')) config.eps_list.push_back(std::stod(tok));
        have_eps = true;
      } else if (key == "eps_ref") {
        config.eps_ref = std::stod(value);
        have_eps_ref = true;
      } else if (key == "n_ml") {
        config.n_ml = std::stoi(value);
      } else if (key == "n_ref") {
        config.n_ref = std::stoi(value);
      } else if (key == "seed") {
        config.seed = std::stoull(value);
      } else if (key == "out") {
        config.out_path = value;
      } else if (key == "timings") {
        config.emit_timings = (value == "1" || value == "true");
      } else {
        throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("config line " + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
  }

  if (config.eps_list.empty() || config.eps_ref <= 0.0) {
    if (config.name == "custom")
      throw ConfigError("config: eps and eps_ref are required for custom scenarios");
  }
  return config;
}

double predicted_work_exponent(const RateParams& rates, int d) {
  const double exp_r = (2.0 - rates.theta) * rates.r;
  if (2.0 * exp_r >= d) return -2.0;
  return -(2.0 + (d - 2.0 * exp_r) / exp_r);
}

int cascade_depth_for(const ScenarioConfig& config, int max_trunc, int max_resolution) {
  const WaveletFamily family = WaveletFamily::daubechies(5);
  const int from_accuracy =
      static_cast<int>(std::ceil(max_trunc * config.rates.t / family.hoelder_alpha));
  return std::max(from_accuracy, max_resolution + 2);
}

}  // namespace btmc
