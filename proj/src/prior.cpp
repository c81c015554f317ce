#include "btmc/prior.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace btmc {

namespace {
constexpr std::uint32_t kRoleCoefficients = 0x434F4546u;  // "COEF"
constexpr double kOverflowGuard = 700.0;
}  // namespace

void validate_prior_params(const PriorParams& params, const WaveletFamily& family) {
  validate_tree_params(params.tree);
  if (!(params.s > 0.0)) throw std::invalid_argument("prior: s must be positive");
  if (!(params.p >= 1.0)) throw std::invalid_argument("prior: p must be >= 1");
  if (!(params.kappa > 0.0)) throw std::invalid_argument("prior: kappa must be positive");
  if (params.truncation < 0) throw std::invalid_argument("prior: truncation must be >= 0");
  if (!(params.s * params.p > params.tree.d))
    throw std::invalid_argument("prior: need s p > d");
  if (params.s > static_cast<double>(family.vanishing_moments))
    throw std::invalid_argument("prior: s exceeds the vanishing moments of the wavelet family");
}

double eta(int j, const PriorParams& params) {
  const double d = params.tree.d;
  return std::exp2(-j * (params.s + d / 2.0 - d / params.p));
}

double sample_p_exponential(double p, double kappa, RngStream& stream) {
  if (!(p >= 1.0) || !(kappa > 0.0))
    throw std::invalid_argument("p-exponential: need p >= 1, kappa > 0");
  if (p == 2.0) return stream.next_gaussian() * std::sqrt(kappa / 2.0);
  if (p == 1.0) {
    const double v = stream.next_u01() - 0.5;
    return -kappa * std::copysign(std::log1p(-2.0 * std::abs(v)), v);
  }
  // Laplace envelope with scale b = kappa^{1/p}: the log acceptance ratio
  // y - y^p (y = |x|/b) is maximized at y* = p^{-1/(p-1)}.
  const double b = std::pow(kappa, 1.0 / p);
  const double ystar = std::pow(p, -1.0 / (p - 1.0));
  const double cstar = ystar - std::pow(ystar, p);
  for (;;) {
    const double v = stream.next_u01() - 0.5;
    const double x = -b * std::copysign(std::log1p(-2.0 * std::abs(v)), v);
    const double y = std::abs(x) / b;
    if (std::log(stream.next_u01()) <= y - std::pow(y, p) - cstar) return x;
  }
}

std::size_t FieldRealization::coefficient_count() const {
  std::size_t c = 0;
  for (const auto& s : coefficients) c += s.size();
  return c;
}

double FieldRealization::coefficient(int j, std::size_t node_pos, unsigned l) const {
  const std::size_t types = (j == 0) ? (std::size_t{1} << params.tree.d)
                                     : (std::size_t{1} << params.tree.d) - 1;
  const std::size_t slot = (j == 0) ? l : l - 1;
  return coefficients[static_cast<std::size_t>(j)][node_pos * types + slot];
}

namespace {

// Coefficient draws are addressed by the wavelet index (scale, node label,
// type), not by draw order, so a realization restricted to fewer scales or a
// tree coupled across beta values sees identical values.
double coefficient_draw(const RngStream& stream, double p, double kappa, int j, std::uint64_t n,
                        unsigned l) {
  const std::uint32_t c0 = static_cast<std::uint32_t>(j) | (l << 16);
  const std::uint32_t c1 = static_cast<std::uint32_t>(n);
  const std::uint32_t c2 = static_cast<std::uint32_t>(n >> 32);
  if (p == 2.0) {
    for (std::uint32_t attempt = 0;; ++attempt) {
      const auto u = stream.u01x2_at(c0, c1, c2, attempt);
      const double x = 2.0 * u[0] - 1.0;
      const double y = 2.0 * u[1] - 1.0;
      const double s2 = x * x + y * y;
      if (s2 > 0.0 && s2 < 1.0)
        return x * std::sqrt(-2.0 * std::log(s2) / s2) * std::sqrt(kappa / 2.0);
    }
  }
  if (p == 1.0) {
    const double v = stream.u01_at(c0, c1, c2, 0) - 0.5;
    return -kappa * std::copysign(std::log1p(-2.0 * std::abs(v)), v);
  }
  const double b = std::pow(kappa, 1.0 / p);
  const double ystar = std::pow(p, -1.0 / (p - 1.0));
  const double cstar = ystar - std::pow(ystar, p);
  for (std::uint32_t attempt = 0;; ++attempt) {
    const auto u = stream.u01x2_at(c0, c1, c2, attempt);
    const double v = u[0] - 0.5;
    const double x = -b * std::copysign(std::log1p(-2.0 * std::abs(v)), v);
    const double y = std::abs(x) / b;
    if (std::log(u[1]) <= y - std::pow(y, p) - cstar) return x;
  }
}

}  // namespace

FieldRealization sample_field(const PriorParams& params, const SampleKey& key) {
  FieldRealization field;
  field.params = params;
  field.active = sample_tree(params.tree, params.truncation, gate_source(key));

  const RngStream coeff_stream(key, kRoleCoefficients);
  const int d = params.tree.d;
  const unsigned arity = 1u << d;
  field.coefficients.resize(static_cast<std::size_t>(params.truncation) + 1);
  for (int j = 0; j <= params.truncation; ++j) {
    const auto& nodes = field.active.scales[static_cast<std::size_t>(j)];
    const unsigned l_first = (j == 0) ? 0u : 1u;
    auto& out = field.coefficients[static_cast<std::size_t>(j)];
    out.reserve(nodes.size() * (arity - l_first));
    for (std::uint64_t n : nodes)
      for (unsigned l = l_first; l < arity; ++l)
        out.push_back(coefficient_draw(coeff_stream, params.p, params.kappa, j, n, l));
  }
  return field;
}

namespace {

void accumulate_scale(const FieldRealization& field, int j, int R, GridKind kind,
                      const WaveletTable& table, std::vector<double>& out, EvalStats* stats) {
  const int d = field.params.tree.d;
  const unsigned arity = 1u << d;
  const unsigned l_first = (j == 0) ? 0u : 1u;
  const double weight = eta(j, field.params);
  const auto& nodes = field.active.scales[static_cast<std::size_t>(j)];
  const std::int64_t npts = std::int64_t{1} << R;

  for (std::size_t pos = 0; pos < nodes.size(); ++pos) {
    const auto k = linear_to_shift(d, j, nodes[pos]);
    // both type variants per axis, shared across the l loop
    std::vector<SparseVec> phi_axis(static_cast<std::size_t>(d)), psi_axis(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      phi_axis[static_cast<std::size_t>(i)] =
          evaluate_periodized_1d(table, j, k[static_cast<std::size_t>(i)], 0, R, kind);
      psi_axis[static_cast<std::size_t>(i)] =
          evaluate_periodized_1d(table, j, k[static_cast<std::size_t>(i)], 1, R, kind);
    }
    for (unsigned l = l_first; l < arity; ++l) {
      const double c = weight * field.coefficient(j, pos, l);
      if (d == 1) {
        const SparseVec& ax = (l & 1u) ? psi_axis[0] : phi_axis[0];
        for (std::size_t a = 0; a < ax.nnz(); ++a)
          out[static_cast<std::size_t>(ax.idx[a])] += c * ax.val[a];
        if (stats) stats->touched_points += ax.nnz();
      } else if (d == 2) {
        const SparseVec& ax = (l & 1u) ? psi_axis[0] : phi_axis[0];
        const SparseVec& ay = (l & 2u) ? psi_axis[1] : phi_axis[1];
        for (std::size_t b = 0; b < ay.nnz(); ++b) {
          double* row = out.data() + static_cast<std::size_t>(ay.idx[b]) * static_cast<std::size_t>(npts);
          const double cy = c * ay.val[b];
          for (std::size_t a = 0; a < ax.nnz(); ++a) row[ax.idx[a]] += cy * ax.val[a];
        }
        if (stats) stats->touched_points += ax.nnz() * ay.nnz();
      } else {
        const SparseVec& ax = (l & 1u) ? psi_axis[0] : phi_axis[0];
        const SparseVec& ay = (l & 2u) ? psi_axis[1] : phi_axis[1];
        const SparseVec& az = (l & 4u) ? psi_axis[2] : phi_axis[2];
        for (std::size_t cz = 0; cz < az.nnz(); ++cz)
          for (std::size_t b = 0; b < ay.nnz(); ++b) {
            double* row = out.data() +
                          (static_cast<std::size_t>(az.idx[cz]) * static_cast<std::size_t>(npts) +
                           static_cast<std::size_t>(ay.idx[b])) *
                              static_cast<std::size_t>(npts);
            const double cyz = c * az.val[cz] * ay.val[b];
            for (std::size_t a = 0; a < ax.nnz(); ++a) row[ax.idx[a]] += cyz * ax.val[a];
          }
        if (stats) stats->touched_points += ax.nnz() * ay.nnz() * az.nnz();
      }
    }
  }
}

std::size_t grid_size(int d, int R) {
  std::size_t s = 1;
  for (int i = 0; i < d; ++i) s *= static_cast<std::size_t>(std::int64_t{1} << R);
  return s;
}

}  // namespace

GridField evaluate_field(const FieldRealization& field, int grid_resolution, GridKind kind,
                         const WaveletTable& table, int max_scale, EvalStats* stats) {
  GridField grid;
  grid.d = field.params.tree.d;
  grid.resolution = grid_resolution;
  grid.kind = kind;
  grid.values.assign(grid_size(grid.d, grid_resolution), 0.0);
  const int top = std::min(max_scale, field.params.truncation);
  for (int j = 0; j <= top; ++j)
    accumulate_scale(field, j, grid_resolution, kind, table, grid.values, stats);
  return grid;
}

GridField evaluate_field_scale(const FieldRealization& field, int j, int grid_resolution,
                               GridKind kind, const WaveletTable& table, EvalStats* stats) {
  GridField grid;
  grid.d = field.params.tree.d;
  grid.resolution = grid_resolution;
  grid.kind = kind;
  grid.values.assign(grid_size(grid.d, grid_resolution), 0.0);
  accumulate_scale(field, j, grid_resolution, kind, table, grid.values, stats);
  return grid;
}

GridField coefficient_at_midpoints(const FieldRealization& field, int mesh_level,
                                   const WaveletTable& table, int max_scale, EvalStats* stats) {
  // mesh level ell has width 2^-(ell+1); its midpoint grid has that step
  GridField grid = evaluate_field(field, mesh_level + 1, GridKind::midpoint, table, max_scale, stats);
  for (double& v : grid.values) {
    if (std::abs(v) > kOverflowGuard) throw DegenerateSample(std::abs(v));
    v = std::exp(v);
  }
  return grid;
}

double besov_norm(const FieldRealization& field, double t, double q, int max_scale) {
  if (!(q >= 1.0)) throw std::invalid_argument("besov_norm: q must be in [1, inf]");
  const double d = field.params.tree.d;
  const int top = std::min(max_scale, field.params.truncation);
  const bool sup_form = std::isinf(q);
  double acc = 0.0;
  for (int j = 0; j <= top; ++j) {
    const double w = sup_form ? std::exp2(j * (t + d / 2.0)) * eta(j, field.params)
                              : std::exp2(j * (t + d / 2.0 - d / q)) * eta(j, field.params);
    for (double x : field.coefficients[static_cast<std::size_t>(j)]) {
      const double term = w * std::abs(x);
      if (sup_form)
        acc = std::max(acc, term);
      else
        acc += std::pow(term, q);
    }
  }
  return sup_form ? acc : std::pow(acc, 1.0 / q);
}

void write_grid(std::ostream& os, const GridField& grid, const std::string& params_echo) {
  os << "# btmc-grid v1\n";
  os << "# d=" << grid.d << " R=" << grid.resolution
     << " kind=" << (grid.kind == GridKind::midpoint ? "midpoint" : "lattice") << "\n";
  if (!params_echo.empty()) os << "# " << params_echo << "\n";
  const std::size_t per_row = static_cast<std::size_t>(grid.points_per_axis());
  char buf[32];
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", grid.values[i]);
    os << buf;
    os << (((i + 1) % per_row == 0) ? '\n' : ',');
  }
}

GridField read_grid(std::istream& is) {
  GridField grid;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::size_t pos = line.find("d=");
      if (pos != std::string::npos) {
        std::istringstream hs(line.substr(1));
        std::string tok;
        while (hs >> tok) {
          if (tok.rfind("d=", 0) == 0) grid.d = std::stoi(tok.substr(2));
          if (tok.rfind("R=", 0) == 0) grid.resolution = std::stoi(tok.substr(2));
          if (tok.rfind("kind=", 0) == 0)
            grid.kind = (tok.substr(5) == "midpoint") ? GridKind::midpoint : GridKind::lattice;
        }
        header_seen = true;
      }
      continue;
    }
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) grid.values.push_back(std::stod(cell));
  }
  if (!header_seen) throw std::runtime_error("grid file: missing header");
  return grid;
}

}  // namespace btmc
