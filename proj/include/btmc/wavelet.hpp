#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace btmc {

// A Daubechies-type orthonormal wavelet family, defined by its low-pass
// refinement filter. The scaling function phi is supported on [0, 2M-1], the
// mother wavelet psi on [-M+1, M].
struct WaveletFamily {
  int vanishing_moments = 0;     // M
  std::vector<double> filter;    // 2M low-pass coefficients, sum = sqrt(2)
  double hoelder_alpha = 0.0;    // smoothness exponent of phi, psi

  int support_length() const { return 2 * vanishing_moments - 1; }
  int phi_lo() const { return 0; }
  int phi_hi() const { return 2 * vanishing_moments - 1; }
  int psi_lo() const { return -vanishing_moments + 1; }
  int psi_hi() const { return vanishing_moments; }

  static WaveletFamily haar();
  static WaveletFamily daubechies(int M);  // M in [1, 10]
};

// Throws std::invalid_argument if the filter violates the two-scale
// normalization (sum sqrt(2), unit energy) beyond 1e-12.
void validate_family(const WaveletFamily& family);

// Samples of phi and psi on the dyadic grid of step 2^-J over their supports,
// produced by the cascade iteration started from the Haar indicator. The
// sup-norm error is O(2^{-J alpha}); values between lattice points are read
// off by linear interpolation.
class WaveletTable {
 public:
  WaveletTable(WaveletFamily family, int cascade_depth);

  const WaveletFamily& family() const { return family_; }
  int depth() const { return depth_; }
  std::span<const double> phi_values() const { return phi_; }
  std::span<const double> psi_values() const { return psi_; }

  // Point evaluation with linear interpolation; zero outside the support.
  double phi(double x) const;
  double psi(double x) const;
  double value(double x, int type_bit) const { return type_bit ? psi(x) : phi(x); }

  double psi_sup() const { return psi_sup_; }

 private:
  WaveletFamily family_;
  int depth_;
  std::vector<double> phi_;  // on [0, 2M-1]
  std::vector<double> psi_;  // on [-M+1, M]
  double psi_sup_ = 0.0;
};

// Smallest w such that the mother support, scaled by 2^-w and centered, fits
// in the open euclidean ball of radius 1/2 in d dimensions:
// 2^-w (2M-1)/2 sqrt(d) < 1/2.
int minimal_scaling_shift(const WaveletFamily& family, int d);

// Sparse vector on the periodic grid {(i + offset) 2^-R : i = 0..2^R-1}.
struct SparseVec {
  std::vector<std::int32_t> idx;  // strictly increasing
  std::vector<double> val;
  std::size_t nnz() const { return idx.size(); }
};

enum class GridKind { lattice, midpoint };

// Values of the periodized 2^{j/2} (phi|psi)(2^j x - k) on a dyadic 1-D grid.
// Entries outside the wrapped support are omitted.
SparseVec evaluate_periodized_1d(const WaveletTable& table, int j, std::int64_t k, int type_bit,
                                 int grid_resolution, GridKind kind);

// Index (j, k, l) of the isotropic tensor basis on the d-torus: k in K_j,
// l a bitmask over axes (l = 0 is allowed only at j = 0).
struct PeriodizedIndex {
  int d = 2;
  int j = 0;
  std::vector<std::int64_t> k;  // size d, 0 <= k_i < 2^j
  unsigned l = 0;               // axis i uses psi iff bit i of l is set
};

void validate_index(const PeriodizedIndex& index);

// Factored evaluation of one tensor wavelet on the d-dimensional grid: the
// full tensor is the outer product of the per-axis sparse vectors.
struct TensorEvaluation {
  std::vector<SparseVec> axes;  // size d
  std::size_t nonzero_count() const {
    std::size_t c = 1;
    for (const auto& a : axes) c *= a.nnz();
    return c;
  }
};

TensorEvaluation evaluate_tensor(const WaveletTable& table, const PeriodizedIndex& index,
                                 int grid_resolution, GridKind kind);

}  // namespace btmc
