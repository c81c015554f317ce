#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "btmc/rng.hpp"
#include "btmc/tree.hpp"
#include "btmc/wavelet.hpp"

namespace btmc {

struct PriorParams {
  double s = 2.0;       // smoothness
  double p = 2.0;       // integrability, >= 1
  double kappa = 1.0;   // scaling of the p-exponential density
  TreeParams tree;
  int truncation = 0;   // N, maximal retained scale
};

// Enforces s p > d and s <= M of the family in use (the vanishing-moment
// count bounds the usable smoothness of the basis).
void validate_prior_params(const PriorParams& params, const WaveletFamily& family);

// eta_j = 2^{-j (s + d/2 - d/p)}
double eta(int j, const PriorParams& params);

// A draw from the density ~ exp(-|x|^p / kappa). Direct for p = 1 (inverse
// CDF Laplace) and p = 2 (Gaussian, variance kappa/2); acceptance-rejection
// with a Laplace envelope otherwise.
double sample_p_exponential(double p, double kappa, RngStream& stream);

// One sample of the truncated prior: the active index set of a depth-N tree
// plus i.i.d. p-exponential coefficients X^l_{j,k} for every active index.
// Coefficient layout per scale: nodes in stored order, types l in increasing
// bitmask order (all of L_0 at scale 0, nonzero l at scales j >= 1).
struct FieldRealization {
  PriorParams params;
  ActiveIndexSet active;
  std::vector<std::vector<double>> coefficients;  // [j][node * types + type_slot]

  std::size_t coefficient_count() const;
  double coefficient(int j, std::size_t node_pos, unsigned l) const;
};

FieldRealization sample_field(const PriorParams& params, const SampleKey& key);

// Uniform d-dimensional grid of step 2^-R; values row-major, x fastest.
struct GridField {
  int d = 2;
  int resolution = 0;  // R
  GridKind kind = GridKind::lattice;
  std::vector<double> values;

  std::int64_t points_per_axis() const { return std::int64_t{1} << resolution; }
};

struct EvalStats {
  std::uint64_t touched_points = 0;  // grid-point accumulations performed
};

// Accumulates eta_j X^l_{j,k} psi^l_{j,k} over all active indices with
// j <= max_scale (pass a smaller value to truncate a stored realization).
GridField evaluate_field(const FieldRealization& field, int grid_resolution, GridKind kind,
                         const WaveletTable& table,
                         int max_scale = std::numeric_limits<int>::max(),
                         EvalStats* stats = nullptr);

// Contribution of a single scale; evaluate_field is the sum of these.
GridField evaluate_field_scale(const FieldRealization& field, int j, int grid_resolution,
                               GridKind kind, const WaveletTable& table,
                               EvalStats* stats = nullptr);

// Signals a sample whose log-field exceeds the exp overflow guard; the Monte
// Carlo driver redraws such samples and counts them.
struct DegenerateSample : std::runtime_error {
  explicit DegenerateSample(double sup)
      : std::runtime_error("degenerate sample: sup |b| = " + std::to_string(sup)), sup_b(sup) {}
  double sup_b;
};

// exp(b_{T,N}) on the midpoint grid of FEM mesh level ell (grid step equals
// the mesh width). Throws DegenerateSample if any |b| exceeds 700.
GridField coefficient_at_midpoints(const FieldRealization& field, int mesh_level,
                                   const WaveletTable& table,
                                   int max_scale = std::numeric_limits<int>::max(),
                                   EvalStats* stats = nullptr);

// Besov norm of the stored expansion in B^t_q, q in [1, inf]; uses
// (b, psi^l_{j,k}) = eta_j X^l_{j,k} by orthonormality. Scales above
// max_scale are ignored.
double besov_norm(const FieldRealization& field, double t, double q,
                  int max_scale = std::numeric_limits<int>::max());

// GridField serialization: '#'-prefixed header lines followed by one CSV row
// of values per grid line (row-major).
void write_grid(std::ostream& os, const GridField& grid, const std::string& params_echo);
GridField read_grid(std::istream& is);

}  // namespace btmc
