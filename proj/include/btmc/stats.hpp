#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace btmc {

// Pairwise summation, independent of how the values were produced. Keeps the
// aggregation deterministic under any worker scheduling and accurate for the
// long sample vectors on coarse Monte Carlo levels.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // unbiased sample variance
  std::size_t n = 0;
};

inline MeanVar mean_var(std::span<const double> v) {
  MeanVar mv;
  mv.n = v.size();
  if (mv.n == 0) return mv;
  bool constant = true;
  for (double x : v)
    if (x != v[0]) {
      constant = false;
      break;
    }
  if (constant) {
    mv.mean = v[0];
    return mv;
  }
  mv.mean = pairwise_sum(v) / static_cast<double>(mv.n);
  if (mv.n == 1) return mv;
  std::vector<double> sq(mv.n);
  for (std::size_t i = 0; i < mv.n; ++i) {
    const double d = v[i] - mv.mean;
    sq[i] = d * d;
  }
  mv.var = pairwise_sum(sq) / static_cast<double>(mv.n - 1);
  return mv;
}

// Least-squares slope of y against x.
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

inline double fit_log2_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx[i] = std::log2(x[i]);
    ly[i] = std::log2(y[i]);
  }
  return fit_slope(lx, ly);
}

}  // namespace btmc
