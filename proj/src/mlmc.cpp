#include "btmc/mlmc.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "btmc/stats.hpp"

namespace btmc {

void validate_rates(const RateParams& rates) {
  if (!(rates.t > 0.0)) throw std::invalid_argument("rates: t must be positive");
  if (!(rates.r > 0.0 && rates.r <= 1.0)) throw std::invalid_argument("rates: r must be in (0,1]");
  if (!(rates.theta >= 0.0 && rates.theta <= 1.0))
    throw std::invalid_argument("rates: theta must be in [0,1]");
}

std::int64_t MlmcPlan::work_units(int level) const {
  const std::int64_t dof_fine = MeshLevel(mesh_level(level)).dofs();
  const std::int64_t dof_coarse = MeshLevel(mesh_level(level) - 1).dofs();
  return samples[static_cast<std::size_t>(level - 1)] * (dof_fine + dof_coarse);
}

std::int64_t MlmcPlan::work_units_total() const {
  std::int64_t acc = 0;
  for (int l = 1; l <= levels; ++l) acc += work_units(l);
  return acc;
}

MlmcPlan make_plan(double eps, const RateParams& rates, double h0, double c_k, int d) {
  validate_rates(rates);
  const double exp_r = (2.0 - rates.theta) * rates.r;
  if (!(eps > 0.0 && eps < std::pow(h0, exp_r)))
    throw std::invalid_argument("make_plan: eps must be in (0, h0^{(2-theta) r})");

  MlmcPlan plan;
  plan.eps = eps;
  plan.rates = rates;
  plan.h0 = h0;
  plan.c_k = c_k;
  plan.d = d;
  plan.levels = static_cast<int>(
      std::ceil(std::log(eps) / (exp_r * std::log(c_k)) - std::log(h0) / std::log(c_k)));

  const double crit = 2.0 * exp_r;  // compared against d
  if (crit > d)
    plan.regime = WeightRegime::above_d;
  else if (crit == d)
    plan.regime = WeightRegime::equal_d;
  else
    plan.regime = WeightRegime::below_d;

  const int L = plan.levels;
  plan.h.resize(static_cast<std::size_t>(L));
  plan.trunc.resize(static_cast<std::size_t>(L));
  plan.weights.resize(static_cast<std::size_t>(L));
  plan.samples.resize(static_cast<std::size_t>(L));
  for (int l = 1; l <= L; ++l) {
    const std::size_t i = static_cast<std::size_t>(l - 1);
    plan.h[i] = std::pow(c_k, l) * h0;
    plan.trunc[i] = static_cast<int>(std::ceil(-std::log(plan.h[i]) * exp_r / (std::log(2.0) * rates.t)));
    switch (plan.regime) {
      case WeightRegime::above_d:
        plan.weights[i] = std::pow(static_cast<double>(l), 1.1);
        break;
      case WeightRegime::equal_d:
        plan.weights[i] = static_cast<double>(L);
        break;
      case WeightRegime::below_d:
        plan.weights[i] = std::pow(c_k, (crit - d) * (L - l) / 2.0);
        break;
    }
  }
  const double hL = plan.h[static_cast<std::size_t>(L - 1)];
  for (int l = 1; l <= L; ++l) {
    const std::size_t i = static_cast<std::size_t>(l - 1);
    plan.samples[i] =
        static_cast<std::int64_t>(std::ceil(std::pow(plan.h[i] / hL, 2.0 * exp_r) * plan.weights[i]));
  }
  return plan;
}

PdeQoiPayload::PdeQoiPayload(PriorParams prior, const WaveletTable* table, double cg_tol)
    : prior_(prior), table_(table), cg_tol_(cg_tol) {
  validate_prior_params(prior_, table_->family());
  if (prior_.tree.d != 2) throw std::invalid_argument("pde payload: the solver is 2-D");
}

double PdeQoiPayload::psi(const FieldRealization& field, int trunc, int mesh_level) const {
  const MeshLevel mesh(mesh_level);
  const GridField coeff = coefficient_at_midpoints(field, mesh_level, *table_, trunc);
  const StiffnessOperator A = assemble_stiffness(mesh, coeff);
  const std::vector<double> F = assemble_load(mesh, 1.0);
  const DiscreteSolution u = solve(A, F, cg_tol_);
  return qoi_gradient_norm(u);
}

double PdeQoiPayload::draw_difference(int level, const MlmcPlan& plan, const SampleKey& key) const {
  PriorParams p = prior_;
  p.truncation = plan.trunc[static_cast<std::size_t>(level - 1)];
  const FieldRealization field = sample_field(p, key);
  const double psi_fine = psi(field, p.truncation, plan.mesh_level(level));
  if (level == 1) return psi_fine;  // Psi_0 := 0
  const double psi_coarse =
      psi(field, plan.trunc[static_cast<std::size_t>(level - 2)], plan.mesh_level(level) - 1);
  return psi_fine - psi_coarse;
}

double PdeQoiPayload::draw_single(int mesh_level, int trunc, const SampleKey& key) const {
  PriorParams p = prior_;
  p.truncation = trunc;
  const FieldRealization field = sample_field(p, key);
  return psi(field, trunc, mesh_level);
}

namespace {
double deterministic_psi(int mesh_level) {
  const MeshLevel mesh(mesh_level);
  const StiffnessOperator A = unit_stiffness(mesh);
  const std::vector<double> F = assemble_load(mesh, 1.0);
  return qoi_gradient_norm(solve(A, F));
}
}  // namespace

double DeterministicPoissonPayload::draw_difference(int level, const MlmcPlan& plan,
                                                    const SampleKey&) const {
  const double fine = deterministic_psi(plan.mesh_level(level));
  if (level == 1) return fine;
  return fine - deterministic_psi(plan.mesh_level(level) - 1);
}

double DeterministicPoissonPayload::draw_single(int mesh_level, int, const SampleKey&) const {
  return deterministic_psi(mesh_level);
}

namespace {

struct LevelRun {
  std::vector<double> ys;
  std::uint64_t rejected = 0;
  double wall_seconds = 0.0;
};

template <typename DrawFn>
LevelRun run_samples(std::int64_t count, int threads, const DrawFn& draw) {
  LevelRun run;
  run.ys.resize(static_cast<std::size_t>(count));
  std::atomic<std::int64_t> cursor{0};
  std::atomic<std::uint64_t> rejected{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const auto t0 = std::chrono::steady_clock::now();

  auto worker = [&]() {
    try {
      for (;;) {
        const std::int64_t i = cursor.fetch_add(1);
        if (i >= count || failed.load(std::memory_order_relaxed)) break;
        std::uint64_t local_rejects = 0;
        run.ys[static_cast<std::size_t>(i)] = draw(i, local_rejects);
        if (local_rejects) rejected.fetch_add(local_rejects);
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
      failed.store(true);
    }
  };

  int nthreads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  nthreads = std::max(1, std::min<int>(nthreads, static_cast<int>(count)));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  run.rejected = rejected.load();
  run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

constexpr std::uint32_t kMaxRedraws = 64;

}  // namespace

MlmcResult mlmc_estimate(const MlmcPlan& plan, const CoupledPayload& payload,
                         std::uint64_t master_seed, const MlmcOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  MlmcResult result;
  result.levels.resize(static_cast<std::size_t>(plan.levels));

  std::vector<int> order = options.level_order;
  if (order.empty()) {
    order.resize(static_cast<std::size_t>(plan.levels));
    std::iota(order.begin(), order.end(), 1);
  } else {
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expected(static_cast<std::size_t>(plan.levels));
    std::iota(expected.begin(), expected.end(), 1);
    if (sorted != expected)
      throw std::invalid_argument("mlmc: level_order must be a permutation of 1..L");
  }

  std::int64_t total_samples = 0;
  for (int level : order) {
    const std::size_t li = static_cast<std::size_t>(level - 1);
    const std::int64_t M = plan.samples[li];
    total_samples += M;
    auto draw = [&](std::int64_t i, std::uint64_t& rejects) {
      for (std::uint32_t attempt = 0;; ++attempt) {
        if (attempt > kMaxRedraws) throw std::runtime_error("mlmc: sample redraw limit exceeded");
        SampleKey key{master_seed, options.run_id, options.replicate,
                      static_cast<std::uint32_t>(level), static_cast<std::uint64_t>(i), attempt};
        try {
          return payload.draw_difference(level, plan, key);
        } catch (const DegenerateSample&) {
          ++rejects;
        }
      }
    };
    LevelRun run = run_samples(M, options.threads, draw);
    const MeanVar mv = mean_var(run.ys);

    LevelStats& st = result.levels[li];
    st.level = level;
    st.trunc = plan.trunc[li];
    st.h = plan.h[li];
    st.samples = M;
    st.mean_y = mv.mean;
    st.var_y = mv.var;
    st.work_units = plan.work_units(level);
    st.rejected = run.rejected;
    st.wall_seconds = run.wall_seconds;
  }

  for (const auto& st : result.levels) {
    result.estimate += st.mean_y;
    result.rejected_total += st.rejected;
    result.work_units_total += st.work_units;
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (result.rejected_total >
      options.max_reject_fraction * static_cast<double>(std::max<std::int64_t>(1, total_samples)))
    throw std::runtime_error("mlmc: degenerate-sample rate exceeded " +
                             std::to_string(options.max_reject_fraction) + " (" +
                             std::to_string(result.rejected_total) + " redraws)");
  return result;
}

SlmcResult slmc_estimate(double eps, const RateParams& rates, const CoupledPayload& payload,
                         std::uint64_t master_seed, const MlmcOptions& options) {
  validate_rates(rates);
  const double exp_r = (2.0 - rates.theta) * rates.r;
  if (!(eps > 0.0 && eps < std::pow(0.5, exp_r)))
    throw std::invalid_argument("slmc: eps must be in (0, h0^{(2-theta) r})");

  SlmcResult result;
  // h^{(2-theta) r} ~ eps on the dyadic hierarchy h = 2^-(level+1)
  result.mesh_level = static_cast<int>(std::ceil(-std::log2(eps) / exp_r)) - 1;
  result.mesh_level = std::max(result.mesh_level, 0);
  const double h = MeshLevel(result.mesh_level).h();
  result.trunc = static_cast<int>(std::ceil(-std::log2(h) * exp_r / rates.t));
  result.samples = static_cast<std::int64_t>(std::ceil(1.0 / (eps * eps)));
  result.work_units = result.samples * MeshLevel(result.mesh_level).dofs();

  auto draw = [&](std::int64_t i, std::uint64_t& rejects) {
    for (std::uint32_t attempt = 0;; ++attempt) {
      if (attempt > kMaxRedraws) throw std::runtime_error("slmc: sample redraw limit exceeded");
      SampleKey key{master_seed, options.run_id, options.replicate, 0,
                    static_cast<std::uint64_t>(i), attempt};
      try {
        return payload.draw_single(result.mesh_level, result.trunc, key);
      } catch (const DegenerateSample&) {
        ++rejects;
      }
    }
  };
  LevelRun run = run_samples(result.samples, options.threads, draw);
  const MeanVar mv = mean_var(run.ys);
  result.estimate = mv.mean;
  result.var = mv.var;
  result.rejected = run.rejected;
  return result;
}

VarianceReport variance_decay_report(const RateParams& rates, const CoupledPayload& payload,
                                     int levels, std::int64_t samples_per_level,
                                     std::uint64_t master_seed, const MlmcOptions& options) {
  validate_rates(rates);
  if (samples_per_level < 50)
    throw std::invalid_argument("variance report: need at least 50 samples per level");

  // A plan-shaped schedule deep enough to host all requested levels.
  MlmcPlan plan = make_plan(std::pow(2.0, -(levels + 1) * (2.0 - rates.theta) * rates.r) * 0.99,
                            rates);
  if (plan.levels < levels) throw std::runtime_error("variance report: schedule too shallow");

  VarianceReport report;
  for (int level = 1; level <= levels; ++level) {
    auto draw = [&](std::int64_t i, std::uint64_t& rejects) {
      for (std::uint32_t attempt = 0;; ++attempt) {
        if (attempt > kMaxRedraws)
          throw std::runtime_error("variance report: sample redraw limit exceeded");
        SampleKey key{master_seed, options.run_id, options.replicate,
                      static_cast<std::uint32_t>(level), static_cast<std::uint64_t>(i), attempt};
        try {
          return payload.draw_difference(level, plan, key);
        } catch (const DegenerateSample&) {
          ++rejects;
        }
      }
    };
    LevelRun run = run_samples(samples_per_level, options.threads, draw);
    const MeanVar mv = mean_var(run.ys);
    VarianceRow row;
    row.level = level;
    row.h = plan.h[static_cast<std::size_t>(level - 1)];
    row.samples = samples_per_level;
    row.mean_y = mv.mean;
    row.var_y = mv.var;
    row.var_stderr = mv.var * std::sqrt(2.0 / static_cast<double>(samples_per_level - 1));
    report.rows.push_back(row);
  }

  std::vector<double> hs, vars;
  for (const auto& row : report.rows) {
    if (row.var_y > 0.0) {
      hs.push_back(row.h);
      vars.push_back(row.var_y);
    }
  }
  report.fitted_log2_slope = hs.size() >= 2 ? fit_log2_slope(hs, vars) : 0.0;
  return report;
}

}  // namespace btmc
