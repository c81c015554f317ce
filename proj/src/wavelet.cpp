#include "btmc/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace btmc {

namespace {

// Orthonormal Daubechies low-pass filters h_0..h_{2M-1}, normalized so that
// sum h = sqrt(2). Computed by spectral factorization of the Daubechies
// polynomial (extremal-phase choice) and rounded to double.
const std::vector<double>& daub_filter(int M) {
  static const std::vector<std::vector<double>> tables = {
      // M = 1 (Haar)
      {0.7071067811865476, 0.7071067811865476},
      // M = 2
      {0.48296291314453414, 0.8365163037378079, 0.22414386804201338, -0.12940952255126038},
      // M = 3
      {0.33267055295008262, 0.80689150931109258, 0.45987750211849157, -0.13501102001025459,
       -0.08544127388202666, 0.03522629188570954},
      // M = 4
      {0.23037781330889650, 0.71484657055291565, 0.63088076792985891, -0.02798376941685985,
       -0.18703481171909308, 0.03084138183556076, 0.03288301166688520, -0.01059740178506903},
      // M = 5
      {0.16010239797419291, 0.60382926979718967, 0.72430852843777293, 0.13842814590132073,
       -0.24229488706638203, -0.03224486958463837, 0.07757149384004571, -0.00624149021279827,
       -0.01258075199908200, 0.00333572528547377},
      // M = 6
      {0.11154074335010946, 0.49462389039845309, 0.75113390802109535, 0.31525035170919763,
       -0.22626469396543982, -0.12976686756726194, 0.09750160558732305, 0.02752286553030573,
       -0.03158203931748603, 0.00055384220116150, 0.00477725751094551, -0.00107730108530848},
      // M = 7
      {0.07785205408500918, 0.39653931948191731, 0.72913209084623512, 0.46978228740519312,
       -0.14390600392856498, -0.22403618499387498, 0.07130921926683026, 0.08061260915108307,
       -0.03802993693501441, -0.01657454163066688, 0.01255099855609984, 0.00042957797292137,
       -0.00180164070404749, 0.00035371379997452},
      // M = 8
      {0.05441584224310401, 0.31287159091429997, 0.67563073629728981, 0.58535468365420671,
       -0.01582910525634931, -0.28401554296154693, 0.00047248457391328, 0.12874742662047846,
       -0.01736930100180755, -0.04408825393079475, 0.01398102791739828, 0.00874609404740578,
       -0.00487035299345157, -0.00039174037337695, 0.00067544940645057, -0.00011747678412477},
      // M = 9
      {0.03807794736387835, 0.24383467461259035, 0.60482312369011111, 0.65728807805130054,
       0.13319738582500758, -0.29327378327917491, -0.09684078322297646, 0.14854074933810638,
       0.03072568147933338, -0.06763282906132997, 0.00025094711483145, 0.02236166212367910,
       -0.00472320475775140, -0.00428150368246343, 0.00184764688305623, 0.00023038576352320,
       -0.00025196318894271, 0.00003934732031627},
      // M = 10
      {0.02667005790055555, 0.18817680007769149, 0.52720118893172559, 0.68845903945360357,
       0.28117234366057746, -0.24984642432731538, -0.19594627437737704, 0.12736934033579326,
       0.09305736460357235, -0.07139414716639709, -0.02945753682187581, 0.03321267405934100,
       0.00360655356695617, -0.01073317548333058, 0.00139535174705290, 0.00199240529518506,
       -0.00068585669495971, -0.00011646685512929, 0.00009358867032007, -0.00001326420289452},
  };
  if (M < 1 || M > 10) throw std::invalid_argument("daubechies: M must be in [1, 10]");
  return tables[static_cast<std::size_t>(M - 1)];
}

// Smoothness exponents; the DB(5) value is the one used for the cascade
// accuracy bookkeeping in the experiments.
double daub_alpha(int M) {
  switch (M) {
    case 1: return 1.0;
    case 2: return 0.550;
    case 3: return 1.088;
    case 4: return 1.618;
    default: return 1.177;
  }
}

}  // namespace

WaveletFamily WaveletFamily::haar() { return daubechies(1); }

WaveletFamily WaveletFamily::daubechies(int M) {
  WaveletFamily f;
  f.vanishing_moments = M;
  f.filter = daub_filter(M);
  f.hoelder_alpha = daub_alpha(M);
  validate_family(f);
  return f;
}

void validate_family(const WaveletFamily& family) {
  const int M = family.vanishing_moments;
  if (M < 1) throw std::invalid_argument("wavelet family: vanishing_moments must be positive");
  if (family.filter.size() != static_cast<std::size_t>(2 * M))
    throw std::invalid_argument("wavelet family: filter length must be 2M");
  if (!(family.hoelder_alpha > 0.0))
    throw std::invalid_argument("wavelet family: hoelder_alpha must be positive");
  double s = 0.0, s2 = 0.0;
  for (double c : family.filter) {
    s += c;
    s2 += c * c;
  }
  if (std::abs(s - std::sqrt(2.0)) > 1e-12)
    throw std::invalid_argument("wavelet family: filter sum must be sqrt(2)");
  if (std::abs(s2 - 1.0) > 1e-12)
    throw std::invalid_argument("wavelet family: filter energy must be 1");
}

WaveletTable::WaveletTable(WaveletFamily family, int cascade_depth)
    : family_(std::move(family)), depth_(cascade_depth) {
  validate_family(family_);
  if (depth_ < 1) throw std::invalid_argument("cascade: depth must be >= 1");

  const int M = family_.vanishing_moments;
  const int S = family_.support_length();
  const auto& g = family_.filter;

  // Refinement mask sqrt(2) g_k, computed as 2 g_k / sum(g): identical in
  // exact arithmetic (sum g = sqrt(2)) and exact in floating point for Haar.
  double sum_g = 0.0;
  for (double c : g) sum_g += c;
  std::vector<double> refine(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) refine[k] = 2.0 * g[k] / sum_g;

  // Cascade iteration for phi on [0, 2M-1]: start from the indicator of
  // [0,1) and refine; after i steps the iterate lives on the step-2^-i grid.
  std::vector<double> v(static_cast<std::size_t>(S) + 1, 0.0);
  v[0] = 1.0;
  for (int i = 0; i < depth_; ++i) {
    const std::int64_t fine = (static_cast<std::int64_t>(S) << (i + 1)) + 1;
    const std::int64_t shift = std::int64_t{1} << i;
    std::vector<double> next(static_cast<std::size_t>(fine), 0.0);
    for (std::int64_t m = 0; m < fine; ++m) {
      double acc = 0.0;
      for (int k = 0; k < 2 * M; ++k) {
        const std::int64_t src = m - k * shift;
        if (src >= 0 && src < static_cast<std::int64_t>(v.size())) acc += refine[static_cast<std::size_t>(k)] * v[static_cast<std::size_t>(src)];
      }
      next[static_cast<std::size_t>(m)] = acc;
    }
    v = std::move(next);
  }
  phi_ = std::move(v);

  // psi(x) = sqrt(2) sum_n (-1)^n g_{1-n} phi(2x - n), n = -2M+2 .. 1,
  // sampled on [-M+1, M]; the argument lands exactly on the phi lattice.
  const std::int64_t npts = (static_cast<std::int64_t>(S) << depth_) + 1;
  psi_.assign(static_cast<std::size_t>(npts), 0.0);
  for (std::int64_t m = 0; m < npts; ++m) {
    double acc = 0.0;
    for (int t = 0; t < 2 * M; ++t) {
      const int n = t - 2 * M + 2;
      const double h = ((t % 2 == 0) ? 1.0 : -1.0) * refine[static_cast<std::size_t>(2 * M - 1 - t)];
      // phi index of 2 x_m - n with x_m = psi_lo + m 2^-J
      const std::int64_t idx = (static_cast<std::int64_t>(2 * family_.psi_lo() - n) << depth_) + 2 * m;
      if (idx >= 0 && idx < static_cast<std::int64_t>(phi_.size())) acc += h * phi_[static_cast<std::size_t>(idx)];
    }
    psi_[static_cast<std::size_t>(m)] = acc;
  }
  for (double x : psi_) psi_sup_ = std::max(psi_sup_, std::abs(x));
}

namespace {
inline double lookup(std::span<const double> tab, double pos, bool piecewise_constant) {
  // pos is the fractional lattice coordinate (units of 2^-J from support_lo)
  if (pos < 0.0 || pos >= static_cast<double>(tab.size() - 1)) {
    if (pos == 0.0) return tab[0];
    return 0.0;
  }
  const double fl = std::floor(pos);
  const auto i = static_cast<std::size_t>(fl);
  const double frac = pos - fl;
  if (piecewise_constant || frac == 0.0) return tab[i];
  return tab[i] + frac * (tab[i + 1] - tab[i]);
}
}  // namespace

double WaveletTable::phi(double x) const {
  const double pos = (x - family_.phi_lo()) * std::ldexp(1.0, depth_);
  // the Haar pair is exactly piecewise constant; interpolation across its
  // jumps would be wrong
  return lookup(phi_, pos, family_.vanishing_moments == 1);
}

double WaveletTable::psi(double x) const {
  const double pos = (x - family_.psi_lo()) * std::ldexp(1.0, depth_);
  return lookup(psi_, pos, family_.vanishing_moments == 1);
}

int minimal_scaling_shift(const WaveletFamily& family, int d) {
  if (d < 1 || d > 3) throw std::invalid_argument("minimal_scaling_shift: d must be in {1,2,3}");
  const double half_extent = 0.5 * family.support_length();
  int w = 0;
  while (!(std::ldexp(half_extent, -w) * std::sqrt(static_cast<double>(d)) < 0.5)) ++w;
  return w;
}

SparseVec evaluate_periodized_1d(const WaveletTable& table, int j, std::int64_t k, int type_bit,
                                 int grid_resolution, GridKind kind) {
  const WaveletFamily& fam = table.family();
  const int R = grid_resolution;
  const std::int64_t n = std::int64_t{1} << R;
  const double off = (kind == GridKind::midpoint) ? 0.5 : 0.0;
  const int lo = type_bit ? fam.psi_lo() : fam.phi_lo();
  const int hi = type_bit ? fam.psi_hi() : fam.phi_hi();

  // Grid points (t + off) 2^-R falling inside the unwrapped support
  // [(lo+k) 2^-j, (hi+k) 2^-j]; all quantities are exact dyadics in double.
  const double scale_rj = std::ldexp(1.0, R - j);
  const auto t_min = static_cast<std::int64_t>(std::ceil((lo + static_cast<double>(k)) * scale_rj - off));
  const auto t_max = static_cast<std::int64_t>(std::floor((hi + static_cast<double>(k)) * scale_rj - off));

  SparseVec out;
  if (t_max < t_min) return out;

  const double amp = std::sqrt(std::ldexp(1.0, j));
  const double scale_jr = std::ldexp(1.0, j - R);
  auto sample = [&](std::int64_t t) {
    const double u = (static_cast<double>(t) + off) * scale_jr - static_cast<double>(k);
    return amp * table.value(u, type_bit);
  };

  if (t_max - t_min + 1 >= n) {
    // support wraps at least once around the torus: accumulate densely
    std::vector<double> dense(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t t = t_min; t <= t_max; ++t) {
      const std::int64_t w = ((t % n) + n) % n;
      dense[static_cast<std::size_t>(w)] += sample(t);
    }
    for (std::int64_t i = 0; i < n; ++i) {
      if (dense[static_cast<std::size_t>(i)] != 0.0) {
        out.idx.push_back(static_cast<std::int32_t>(i));
        out.val.push_back(dense[static_cast<std::size_t>(i)]);
      }
    }
    return out;
  }

  // shorter than one period: wrapped indices are distinct
  std::vector<std::pair<std::int32_t, double>> entries;
  entries.reserve(static_cast<std::size_t>(t_max - t_min + 1));
  for (std::int64_t t = t_min; t <= t_max; ++t) {
    const double v = sample(t);
    if (v != 0.0) {
      const std::int64_t w = ((t % n) + n) % n;
      entries.emplace_back(static_cast<std::int32_t>(w), v);
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  out.idx.reserve(entries.size());
  out.val.reserve(entries.size());
  for (const auto& [i, v] : entries) {
    out.idx.push_back(i);
    out.val.push_back(v);
  }
  return out;
}

void validate_index(const PeriodizedIndex& index) {
  if (index.d < 1 || index.d > 3) throw std::invalid_argument("index: d must be in {1,2,3}");
  if (index.j < 0) throw std::invalid_argument("index: j must be nonnegative");
  if (index.k.size() != static_cast<std::size_t>(index.d))
    throw std::invalid_argument("index: k must have d entries");
  const std::int64_t lim = std::int64_t{1} << index.j;
  for (std::int64_t ki : index.k)
    if (ki < 0 || ki >= lim) throw std::invalid_argument("index: shift out of K_j");
  if (index.l >= (1u << index.d)) throw std::invalid_argument("index: type out of L_0");
  if (index.j >= 1 && index.l == 0)
    throw std::invalid_argument("index: all-scaling type only allowed at j = 0");
}

TensorEvaluation evaluate_tensor(const WaveletTable& table, const PeriodizedIndex& index,
                                 int grid_resolution, GridKind kind) {
  validate_index(index);
  TensorEvaluation ev;
  ev.axes.reserve(static_cast<std::size_t>(index.d));
  for (int i = 0; i < index.d; ++i) {
    const int bit = (index.l >> i) & 1u;
    ev.axes.push_back(
        evaluate_periodized_1d(table, index.j, index.k[static_cast<std::size_t>(i)], bit, grid_resolution, kind));
  }
  return ev;
}

}  // namespace btmc
