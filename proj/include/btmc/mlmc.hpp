#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "btmc/fem.hpp"
#include "btmc/prior.hpp"
#include "btmc/rng.hpp"

namespace btmc {

struct RateParams {
  double t = 1.0;      // truncation rate, > 0
  double r = 1.0;      // FEM rate, in (0, 1]
  double theta = 1.0;  // functional smoothness, in [0, 1]
};

void validate_rates(const RateParams& rates);

enum class WeightRegime { above_d, equal_d, below_d };  // 2(2-theta)r vs d

// The (L, {N_l}, {h_l}, {M_l}, {w_l}) schedule for one target accuracy.
// Level l uses FEM mesh level l (h_l = 2^-(l+1) for the default h0 = 1/2,
// c_K = 1/2) and truncation N_l; the coarse member of the pair lives on mesh
// level l-1 with truncation N_{l-1} (Psi_0 := 0).
struct MlmcPlan {
  double eps = 0.0;
  RateParams rates;
  double h0 = 0.5;
  double c_k = 0.5;
  int d = 2;
  int levels = 0;                      // L
  std::vector<double> h;               // [L] mesh widths, h[l-1] = c_k^l h0
  std::vector<int> trunc;              // [L] N_l
  std::vector<std::int64_t> samples;   // [L] M_l
  std::vector<double> weights;         // [L] w_l
  WeightRegime regime = WeightRegime::equal_d;

  int mesh_level(int level) const { return level; }  // h = 2^-(level+1)
  std::int64_t work_units(int level) const;           // M_l (dof_l + dof_{l-1})
  std::int64_t work_units_total() const;
};

// Parameter rule: L = ceil(log(eps)/((2-theta) r log(c_k)) - log(h0)/log(c_k)),
// N_l = ceil(-log(h_l)(2-theta) r / (log(2) t)),
// M_l = ceil((h_l/h_L)^{2(2-theta) r} w_l) with regime-selected weights
// (iota = 0.1 in the supercritical regime). Requires eps in (0, h0^{(2-theta)r}).
MlmcPlan make_plan(double eps, const RateParams& rates, double h0 = 0.5, double c_k = 0.5,
                   int d = 2);

// Produces one sample of Psi at a given discretization; coupled draws share
// the full random input between the fine and coarse member.
class CoupledPayload {
 public:
  virtual ~CoupledPayload() = default;
  // Y_l for one fresh sample: Psi(N_l, mesh l) - Psi(N_{l-1}, mesh l-1),
  // with the l = 1 coarse member defined as zero.
  virtual double draw_difference(int level, const MlmcPlan& plan, const SampleKey& key) const = 0;
  // Psi at a single discretization, for single-level estimation.
  virtual double draw_single(int mesh_level, int trunc, const SampleKey& key) const = 0;
};

// The log-Besov diffusion pipeline: sample the prior, exponentiate at the
// midpoints, assemble, solve, take the gradient-norm QoI.
class PdeQoiPayload : public CoupledPayload {
 public:
  PdeQoiPayload(PriorParams prior, const WaveletTable* table, double cg_tol = 1e-10);

  double draw_difference(int level, const MlmcPlan& plan, const SampleKey& key) const override;
  double draw_single(int mesh_level, int trunc, const SampleKey& key) const override;

  // Psi(u) for an already-sampled realization truncated at trunc scales.
  double psi(const FieldRealization& field, int trunc, int mesh_level) const;

 private:
  PriorParams prior_;
  const WaveletTable* table_;
  double cg_tol_;
};

// Psi identically equal to a constant; Y_1 = c and Y_l = 0 for l >= 2.
class ConstantPayload : public CoupledPayload {
 public:
  explicit ConstantPayload(double value) : value_(value) {}
  double draw_difference(int level, const MlmcPlan&, const SampleKey&) const override {
    return level == 1 ? value_ : 0.0;
  }
  double draw_single(int, int, const SampleKey&) const override { return value_; }

 private:
  double value_;
};

// Deterministic unit-coefficient Poisson payload; level differences carry the
// pure FEM refinement increment and have zero variance.
class DeterministicPoissonPayload : public CoupledPayload {
 public:
  double draw_difference(int level, const MlmcPlan& plan, const SampleKey& key) const override;
  double draw_single(int mesh_level, int trunc, const SampleKey& key) const override;
};

struct LevelStats {
  int level = 0;
  int trunc = 0;
  double h = 0.0;
  std::int64_t samples = 0;
  double mean_y = 0.0;
  double var_y = 0.0;
  std::int64_t work_units = 0;
  std::uint64_t rejected = 0;
  double wall_seconds = 0.0;
};

struct MlmcResult {
  double estimate = 0.0;  // sum of per-level means, in level order
  std::vector<LevelStats> levels;
  std::uint64_t rejected_total = 0;
  std::int64_t work_units_total = 0;
  double wall_seconds = 0.0;
};

struct MlmcOptions {
  int threads = 1;                      // 0: hardware concurrency
  std::uint32_t run_id = 0;             // separates eps runs / reference runs
  std::uint32_t replicate = 0;
  std::vector<int> level_order;         // execution order, default 1..L
  double max_reject_fraction = 1e-4;    // abort threshold for redrawn samples
};

// Bit-reproducible for fixed (master_seed, run_id, replicate) at any thread
// count: every sample is keyed, slots are preallocated, aggregation is
// pairwise in index order.
MlmcResult mlmc_estimate(const MlmcPlan& plan, const CoupledPayload& payload,
                         std::uint64_t master_seed, const MlmcOptions& options = {});

struct SlmcResult {
  double estimate = 0.0;
  double var = 0.0;
  std::int64_t samples = 0;
  int mesh_level = 0;
  int trunc = 0;
  std::int64_t work_units = 0;
  std::uint64_t rejected = 0;
};

// Single-level estimator with the balanced choice M = ceil(eps^-2),
// h^{(2-theta)r} ~ eps aligned to the dyadic mesh, N from the same balancing.
SlmcResult slmc_estimate(double eps, const RateParams& rates, const CoupledPayload& payload,
                         std::uint64_t master_seed, const MlmcOptions& options = {});

struct VarianceRow {
  int level = 0;
  double h = 0.0;
  std::int64_t samples = 0;
  double mean_y = 0.0;
  double var_y = 0.0;
  double var_stderr = 0.0;
};

struct VarianceReport {
  std::vector<VarianceRow> rows;
  double fitted_log2_slope = 0.0;  // of Var(Y_l) against h_l
};

// Sample variances of the coupled differences on levels 1..levels with a
// fixed per-level sample count (>= 50).
VarianceReport variance_decay_report(const RateParams& rates, const CoupledPayload& payload,
                                     int levels, std::int64_t samples_per_level,
                                     std::uint64_t master_seed, const MlmcOptions& options = {});

}  // namespace btmc
