#include "btmc/fem.hpp"

#include <algorithm>
#include <cmath>

#include "btmc/stats.hpp"

namespace btmc {

namespace {

// Element stiffness of the bilinear square element with unit coefficient,
// local node order p = p1 + 2 p2. Entries are h-independent.
constexpr double kElem[4][4] = {
    {2.0 / 3.0, -1.0 / 6.0, -1.0 / 6.0, -1.0 / 3.0},
    {-1.0 / 6.0, 2.0 / 3.0, -1.0 / 3.0, -1.0 / 6.0},
    {-1.0 / 6.0, -1.0 / 3.0, 2.0 / 3.0, -1.0 / 6.0},
    {-1.0 / 3.0, -1.0 / 6.0, -1.0 / 6.0, 2.0 / 3.0},
};

}  // namespace

StiffnessOperator::StiffnessOperator(MeshLevel mesh, std::vector<double> cell_coeff)
    : mesh_(mesh), cell_a_(std::move(cell_coeff)) {
  const std::size_t cells = static_cast<std::size_t>(mesh_.n()) * static_cast<std::size_t>(mesh_.n());
  if (cell_a_.size() != cells)
    throw std::invalid_argument("stiffness: coefficient grid does not match the mesh");
  for (double a : cell_a_)
    if (!(a > 0.0)) throw std::invalid_argument("stiffness: coefficient must be positive");
}

void StiffnessOperator::apply(std::span<const double> x, std::span<double> y) const {
  const int n = mesh_.n();
  const int m = n - 1;
  for (double& v : y) v = 0.0;
  for (int c2 = 0; c2 < n; ++c2) {
    for (int c1 = 0; c1 < n; ++c1) {
      const double a = cell_a_[static_cast<std::size_t>(c2) * n + c1];
      // local nodes (c1+p1, c2+p2); interior iff index in [1, n-1]
      double xv[4];
      std::int64_t id[4];
      for (int p = 0; p < 4; ++p) {
        const int i1 = c1 + (p & 1);
        const int i2 = c2 + (p >> 1);
        if (i1 >= 1 && i1 <= m && i2 >= 1 && i2 <= m) {
          id[p] = static_cast<std::int64_t>(i2 - 1) * m + (i1 - 1);
          xv[p] = x[static_cast<std::size_t>(id[p])];
        } else {
          id[p] = -1;
          xv[p] = 0.0;
        }
      }
      for (int p = 0; p < 4; ++p) {
        if (id[p] < 0) continue;
        y[static_cast<std::size_t>(id[p])] +=
            a * (kElem[p][0] * xv[0] + kElem[p][1] * xv[1] + kElem[p][2] * xv[2] + kElem[p][3] * xv[3]);
      }
    }
  }
}

void StiffnessOperator::add_diagonal(std::span<double> diag) const {
  const int n = mesh_.n();
  const int m = n - 1;
  for (int i2 = 1; i2 <= m; ++i2)
    for (int i1 = 1; i1 <= m; ++i1) {
      const double a = cell_a_[static_cast<std::size_t>(i2 - 1) * n + (i1 - 1)] +
                       cell_a_[static_cast<std::size_t>(i2 - 1) * n + i1] +
                       cell_a_[static_cast<std::size_t>(i2) * n + (i1 - 1)] +
                       cell_a_[static_cast<std::size_t>(i2) * n + i1];
      diag[static_cast<std::size_t>(dof(i1, i2))] += a * (2.0 / 3.0);
    }
}

std::vector<StiffnessOperator::Entry> StiffnessOperator::row(int i1, int i2) const {
  const int n = mesh_.n();
  const int m = n - 1;
  const double h = mesh_.h();
  const HalfIntervalBlocks b(h);
  auto S = [&](int i, int jj) { return jj == i ? b.s_diag : (jj == i - 1 ? b.s_sub : 0.0); };
  auto St = [&](int i, int jj) { return jj == i ? b.s_diag : (jj == i + 1 ? b.s_sub : 0.0); };
  auto Mm = [&](int i, int jj) { return jj == i ? b.m_diag : (jj == i - 1 ? b.m_sub : 0.0); };
  auto Mt = [&](int i, int jj) { return jj == i ? b.m_diag : (jj == i + 1 ? b.m_sub : 0.0); };
  auto cell = [&](int c1, int c2) { return cell_a_[static_cast<std::size_t>(c2) * n + c1]; };

  std::vector<Entry> out;
  for (int j2 = std::max(1, i2 - 1); j2 <= std::min(m, i2 + 1); ++j2)
    for (int j1 = std::max(1, i1 - 1); j1 <= std::min(m, i1 + 1); ++j1) {
      const double v =
          cell(i1 - 1, i2 - 1) * (S(i1, j1) * Mm(i2, j2) + Mm(i1, j1) * S(i2, j2)) +
          cell(i1, i2 - 1) * (St(i1, j1) * Mm(i2, j2) + Mt(i1, j1) * S(i2, j2)) +
          cell(i1 - 1, i2) * (S(i1, j1) * Mt(i2, j2) + Mm(i1, j1) * St(i2, j2)) +
          cell(i1, i2) * (St(i1, j1) * Mt(i2, j2) + Mt(i1, j1) * St(i2, j2));
      if (v != 0.0) out.push_back({dof(j1, j2), v});
    }
  return out;
}

StiffnessOperator assemble_stiffness(const MeshLevel& mesh, const GridField& midpoint_coeff) {
  if (midpoint_coeff.d != 2 || midpoint_coeff.kind != GridKind::midpoint ||
      midpoint_coeff.points_per_axis() != mesh.n())
    throw std::invalid_argument("assemble: coefficient grid is not the midpoint grid of the mesh");
  return StiffnessOperator(mesh, midpoint_coeff.values);
}

StiffnessOperator unit_stiffness(const MeshLevel& mesh) {
  return StiffnessOperator(
      mesh, std::vector<double>(static_cast<std::size_t>(mesh.n()) * static_cast<std::size_t>(mesh.n()), 1.0));
}

std::vector<double> assemble_load(const MeshLevel& mesh, double f_const) {
  return std::vector<double>(static_cast<std::size_t>(mesh.dofs()), f_const * mesh.h() * mesh.h());
}

namespace {

// Geometric V-cycle over rediscretized operators: the coarse coefficient is
// the 2x2 cell average of the fine one. Damped Jacobi smoothing, full
// weighting restriction, bilinear prolongation. Symmetric (equal pre/post
// sweeps), so it is a valid CG preconditioner.
class MgHierarchy {
 public:
  explicit MgHierarchy(const StiffnessOperator& fine) {
    ops_.push_back(&fine);
    int n = fine.mesh().n();
    while (n > 2) {
      const auto& prev_a = owned_.empty() ? fine.cell_coeff() : std::span<const double>(owned_.back().cell_coeff());
      const int nc = n / 2;
      std::vector<double> ac(static_cast<std::size_t>(nc) * nc);
      for (int c2 = 0; c2 < nc; ++c2)
        for (int c1 = 0; c1 < nc; ++c1)
          ac[static_cast<std::size_t>(c2) * nc + c1] =
              0.25 * (prev_a[static_cast<std::size_t>(2 * c2) * n + 2 * c1] +
                      prev_a[static_cast<std::size_t>(2 * c2) * n + 2 * c1 + 1] +
                      prev_a[static_cast<std::size_t>(2 * c2 + 1) * n + 2 * c1] +
                      prev_a[static_cast<std::size_t>(2 * c2 + 1) * n + 2 * c1 + 1]);
      owned_.emplace_back(MeshLevel(owned_.empty() ? fine.mesh().level - 1 : owned_.back().mesh().level - 1),
                          std::move(ac));
      n = nc;
    }
    for (const auto& op : owned_) ops_.push_back(&op);
    diags_.resize(ops_.size());
    for (std::size_t l = 0; l < ops_.size(); ++l) {
      diags_[l].assign(static_cast<std::size_t>(ops_[l]->mesh().dofs()), 0.0);
      ops_[l]->add_diagonal(diags_[l]);
    }
    work_x_.resize(ops_.size());
    work_r_.resize(ops_.size());
    work_s_.resize(ops_.size());
    for (std::size_t l = 0; l < ops_.size(); ++l) {
      work_x_[l].resize(static_cast<std::size_t>(ops_[l]->mesh().dofs()));
      work_r_[l].resize(static_cast<std::size_t>(ops_[l]->mesh().dofs()));
      work_s_[l].resize(static_cast<std::size_t>(ops_[l]->mesh().dofs()));
    }
  }

  // z = V-cycle(r) on the finest level
  void precondition(std::span<const double> r, std::span<double> z) {
    std::copy(r.begin(), r.end(), work_r_[0].begin());
    vcycle(0);
    std::copy(work_x_[0].begin(), work_x_[0].end(), z.begin());
  }

 private:
  static constexpr double kOmega = 0.8;
  static constexpr int kSweeps = 2;

  void smooth(std::size_t l, std::vector<double>& x, const std::vector<double>& b,
              std::vector<double>& scratch) {
    const auto& A = *ops_[l];
    const auto& D = diags_[l];
    A.apply(x, scratch);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += kOmega * (b[i] - scratch[i]) / D[i];
  }

  void vcycle(std::size_t l) {
    auto& x = work_x_[l];
    auto& b = work_r_[l];
    std::fill(x.begin(), x.end(), 0.0);
    if (l + 1 == ops_.size()) {
      // coarsest mesh has a single dof
      x[0] = b[0] / diags_[l][0];
      return;
    }
    auto& scratch = work_s_[l];
    for (int s = 0; s < kSweeps; ++s) smooth(l, x, b, scratch);
    ops_[l]->apply(x, scratch);
    for (std::size_t i = 0; i < scratch.size(); ++i) scratch[i] = b[i] - scratch[i];
    restrict_to(l + 1, scratch, work_r_[l + 1]);
    vcycle(l + 1);
    add_prolonged(l, work_x_[l + 1], x);
    for (int s = 0; s < kSweeps; ++s) smooth(l, x, b, scratch);
  }

  // r_c = P^T r_f: with the bilinear prolongation this matches the Galerkin
  // coarse operator, which for nested bilinear FE equals the rediscretized
  // one (up to the coefficient averaging)
  void restrict_to(std::size_t lc, const std::vector<double>& rf, std::vector<double>& rc) const {
    const int nc = ops_[lc]->mesh().n();
    const int nf = 2 * nc;
    const int mf = nf - 1;
    auto rfv = [&](int i1, int i2) -> double {
      if (i1 < 1 || i1 > mf || i2 < 1 || i2 > mf) return 0.0;
      return rf[static_cast<std::size_t>(i2 - 1) * mf + (i1 - 1)];
    };
    for (int I2 = 1; I2 < nc; ++I2)
      for (int I1 = 1; I1 < nc; ++I1) {
        double acc = rfv(2 * I1, 2 * I2);
        acc += 0.5 * (rfv(2 * I1 - 1, 2 * I2) + rfv(2 * I1 + 1, 2 * I2) + rfv(2 * I1, 2 * I2 - 1) +
                      rfv(2 * I1, 2 * I2 + 1));
        acc += 0.25 * (rfv(2 * I1 - 1, 2 * I2 - 1) + rfv(2 * I1 + 1, 2 * I2 - 1) +
                       rfv(2 * I1 - 1, 2 * I2 + 1) + rfv(2 * I1 + 1, 2 * I2 + 1));
        rc[static_cast<std::size_t>(I2 - 1) * (nc - 1) + (I1 - 1)] = acc;
      }
  }

  void add_prolonged(std::size_t lf, const std::vector<double>& xc, std::vector<double>& xf) const {
    const int nf = ops_[lf]->mesh().n();
    const int nc = nf / 2;
    const int mc = nc - 1;
    auto xcv = [&](int I1, int I2) -> double {
      if (I1 < 1 || I1 > mc || I2 < 1 || I2 > mc) return 0.0;
      return xc[static_cast<std::size_t>(I2 - 1) * mc + (I1 - 1)];
    };
    const int mf = nf - 1;
    for (int i2 = 1; i2 <= mf; ++i2)
      for (int i1 = 1; i1 <= mf; ++i1) {
        double v;
        if (i1 % 2 == 0 && i2 % 2 == 0)
          v = xcv(i1 / 2, i2 / 2);
        else if (i1 % 2 == 1 && i2 % 2 == 0)
          v = 0.5 * (xcv((i1 - 1) / 2, i2 / 2) + xcv((i1 + 1) / 2, i2 / 2));
        else if (i1 % 2 == 0)
          v = 0.5 * (xcv(i1 / 2, (i2 - 1) / 2) + xcv(i1 / 2, (i2 + 1) / 2));
        else
          v = 0.25 * (xcv((i1 - 1) / 2, (i2 - 1) / 2) + xcv((i1 + 1) / 2, (i2 - 1) / 2) +
                      xcv((i1 - 1) / 2, (i2 + 1) / 2) + xcv((i1 + 1) / 2, (i2 + 1) / 2));
        xf[static_cast<std::size_t>(i2 - 1) * mf + (i1 - 1)] += v;
      }
  }

  std::vector<const StiffnessOperator*> ops_;
  std::vector<StiffnessOperator> owned_;
  std::vector<std::vector<double>> diags_;
  std::vector<std::vector<double>> work_x_, work_r_, work_s_;
};

// fixed-order sequential product sum: deterministic and allocation free
double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

DiscreteSolution solve(const StiffnessOperator& A, std::span<const double> F, double tol,
                       SolveReport* report) {
  const auto ndof = static_cast<std::size_t>(A.mesh().dofs());
  if (F.size() != ndof) throw std::invalid_argument("solve: load size mismatch");
  DiscreteSolution sol{A.mesh(), std::vector<double>(ndof, 0.0)};

  const double f_norm = std::sqrt(dot(F, F));
  if (f_norm == 0.0) {
    if (report) *report = {0, 0.0};
    return sol;
  }
  if (ndof == 1) {
    std::vector<double> diag(1, 0.0);
    A.add_diagonal(diag);
    sol.u[0] = F[0] / diag[0];
    if (report) *report = {1, 0.0};
    return sol;
  }

  MgHierarchy mg(A);
  std::vector<double> r(F.begin(), F.end());
  std::vector<double> z(ndof), q(ndof), d(ndof);
  mg.precondition(r, z);
  d = z;
  double rho = dot(r, z);
  const int max_iter = 500;
  for (int it = 1; it <= max_iter; ++it) {
    A.apply(d, q);
    const double alpha = rho / dot(d, q);
    for (std::size_t i = 0; i < ndof; ++i) {
      sol.u[i] += alpha * d[i];
      r[i] -= alpha * q[i];
    }
    const double res = std::sqrt(dot(r, r)) / f_norm;
    if (res <= tol) {
      if (report) *report = {it, res};
      return sol;
    }
    mg.precondition(r, z);
    const double rho_new = dot(r, z);
    const double beta = rho_new / rho;
    rho = rho_new;
    for (std::size_t i = 0; i < ndof; ++i) d[i] = z[i] + beta * d[i];
  }
  throw SolveFailure(max_iter, std::sqrt(dot(r, r)) / f_norm);
}

double qoi_gradient_norm(const DiscreteSolution& sol) {
  const auto A1 = unit_stiffness(sol.mesh);
  std::vector<double> y(sol.u.size());
  A1.apply(sol.u, y);
  return std::sqrt(std::max(0.0, dot(sol.u, y)));
}

void apply_mass(const MeshLevel& mesh, std::span<const double> x, std::span<double> y) {
  const int n = mesh.n();
  const int m = n - 1;
  const double h2 = mesh.h() * mesh.h();
  // element mass matrix h^2 (m1 x m1) with m1 = [[1/3,1/6],[1/6,1/3]]
  static constexpr double m1[2][2] = {{1.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 1.0 / 3.0}};
  for (double& v : y) v = 0.0;
  for (int c2 = 0; c2 < n; ++c2)
    for (int c1 = 0; c1 < n; ++c1) {
      double xv[4];
      std::int64_t id[4];
      for (int p = 0; p < 4; ++p) {
        const int i1 = c1 + (p & 1);
        const int i2 = c2 + (p >> 1);
        if (i1 >= 1 && i1 <= m && i2 >= 1 && i2 <= m) {
          id[p] = static_cast<std::int64_t>(i2 - 1) * m + (i1 - 1);
          xv[p] = x[static_cast<std::size_t>(id[p])];
        } else {
          id[p] = -1;
          xv[p] = 0.0;
        }
      }
      for (int p = 0; p < 4; ++p) {
        if (id[p] < 0) continue;
        double acc = 0.0;
        for (int q = 0; q < 4; ++q)
          acc += m1[p & 1][q & 1] * m1[p >> 1][q >> 1] * xv[q];
        y[static_cast<std::size_t>(id[p])] += h2 * acc;
      }
    }
}

std::vector<double> prolong(const MeshLevel& coarse, std::span<const double> xc) {
  const int nc = coarse.n();
  const int nf = 2 * nc;
  const int mc = nc - 1;
  const int mf = nf - 1;
  auto xcv = [&](int I1, int I2) -> double {
    if (I1 < 1 || I1 > mc || I2 < 1 || I2 > mc) return 0.0;
    return xc[static_cast<std::size_t>(I2 - 1) * mc + (I1 - 1)];
  };
  std::vector<double> xf(static_cast<std::size_t>(mf) * mf);
  for (int i2 = 1; i2 <= mf; ++i2)
    for (int i1 = 1; i1 <= mf; ++i1) {
      double v;
      if (i1 % 2 == 0 && i2 % 2 == 0)
        v = xcv(i1 / 2, i2 / 2);
      else if (i1 % 2 == 1 && i2 % 2 == 0)
        v = 0.5 * (xcv((i1 - 1) / 2, i2 / 2) + xcv((i1 + 1) / 2, i2 / 2));
      else if (i1 % 2 == 0)
        v = 0.5 * (xcv(i1 / 2, (i2 - 1) / 2) + xcv(i1 / 2, (i2 + 1) / 2));
      else
        v = 0.25 * (xcv((i1 - 1) / 2, (i2 - 1) / 2) + xcv((i1 + 1) / 2, (i2 - 1) / 2) +
                    xcv((i1 - 1) / 2, (i2 + 1) / 2) + xcv((i1 + 1) / 2, (i2 + 1) / 2));
      xf[static_cast<std::size_t>(i2 - 1) * mf + (i1 - 1)] = v;
    }
  return xf;
}

GridField solution_to_grid(const DiscreteSolution& sol) {
  const int n = sol.mesh.n();
  GridField grid;
  grid.d = 2;
  grid.resolution = sol.mesh.level + 1;
  grid.kind = GridKind::lattice;
  grid.values.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i2 = 1; i2 < n; ++i2)
    for (int i1 = 1; i1 < n; ++i1)
      grid.values[static_cast<std::size_t>(i2) * n + i1] =
          sol.u[static_cast<std::size_t>(i2 - 1) * (n - 1) + (i1 - 1)];
  return grid;
}

}  // namespace btmc
