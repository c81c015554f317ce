#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "btmc/prior.hpp"

namespace btmc {

// Uniform square mesh of the unit square, h = 2^-(level+1), with homogeneous
// Dirichlet dofs ordered lexicographically (x fastest).
struct MeshLevel {
  int level = 0;

  explicit MeshLevel(int ell) : level(ell) {
    if (ell < 0) throw std::invalid_argument("mesh: level must be >= 0");
  }
  int n() const { return 1 << (level + 1); }          // cells per axis
  double h() const { return 1.0 / n(); }
  std::int64_t dofs() const {
    const std::int64_t m = n() - 1;
    return m * m;
  }
};

// Half-interval 1-D blocks of the tensorized assembly: S has diagonal 1/h and
// subdiagonal -1/h, M has diagonal h/3 and subdiagonal h/6.
struct HalfIntervalBlocks {
  double s_diag, s_sub, m_diag, m_sub;
  explicit HalfIntervalBlocks(double h) : s_diag(1.0 / h), s_sub(-1.0 / h), m_diag(h / 3.0), m_sub(h / 6.0) {}
};

// The stiffness operator under midpoint quadrature: a 9-point stencil whose
// entries combine the four cell-midpoint coefficient values around each node.
// Stored as the per-cell coefficient, applied element-wise.
class StiffnessOperator {
 public:
  StiffnessOperator(MeshLevel mesh, std::vector<double> cell_coeff);

  const MeshLevel& mesh() const { return mesh_; }
  std::span<const double> cell_coeff() const { return cell_a_; }

  void apply(std::span<const double> x, std::span<double> y) const;
  void add_diagonal(std::span<double> diag) const;

  // Row entries from the four-cell combination formula; independent of the
  // element-loop path in apply(), used as its algebraic cross-check.
  struct Entry {
    std::int64_t col;
    double value;
  };
  std::vector<Entry> row(int i1, int i2) const;

  std::int64_t dof(int i1, int i2) const {
    return static_cast<std::int64_t>(i2 - 1) * (mesh_.n() - 1) + (i1 - 1);
  }

 private:
  MeshLevel mesh_;
  std::vector<double> cell_a_;  // n*n midpoint values, row-major (x fastest)
};

// Throws std::invalid_argument unless the coefficient grid is the midpoint
// grid of this mesh with strictly positive values.
StiffnessOperator assemble_stiffness(const MeshLevel& mesh, const GridField& midpoint_coeff);
StiffnessOperator unit_stiffness(const MeshLevel& mesh);

// Load vector for constant f: every interior entry is f h^2 (exact).
std::vector<double> assemble_load(const MeshLevel& mesh, double f_const);

struct DiscreteSolution {
  MeshLevel mesh;
  std::vector<double> u;
};

struct SolveReport {
  int iterations = 0;
  double rel_residual = 0.0;
};

struct SolveFailure : std::runtime_error {
  SolveFailure(int iters, double res)
      : std::runtime_error("linear solve failed: residual " + std::to_string(res) + " after " +
                           std::to_string(iters) + " iterations"),
        iterations(iters),
        rel_residual(res) {}
  int iterations;
  double rel_residual;
};

// Conjugate gradients with a geometric multigrid V-cycle preconditioner;
// terminates at ||F - A u|| / ||F|| <= tol.
DiscreteSolution solve(const StiffnessOperator& A, std::span<const double> F, double tol = 1e-10,
                       SolveReport* report = nullptr);

// Psi(u) = sqrt(u^T S2D u) with the unit-coefficient stiffness of the mesh:
// the exact L2 norm of the piecewise-bilinear gradient.
double qoi_gradient_norm(const DiscreteSolution& sol);

// Mass-matrix product (unit density), for exact L2 norms of FE functions.
void apply_mass(const MeshLevel& mesh, std::span<const double> x, std::span<double> y);

// Bilinear embedding of a solution on mesh level ell into level ell+1
// (exact: the FE spaces are nested).
std::vector<double> prolong(const MeshLevel& coarse, std::span<const double> xc);

// Solution values on the lattice grid of step h (boundary rows are zero),
// in the GridField serialization layout.
GridField solution_to_grid(const DiscreteSolution& sol);

}  // namespace btmc
