#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "bandsis/common.hpp"

namespace bandsis {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double hi = std::max(a, b);
  double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

namespace detail {
inline double lse_range(const double* a, std::size_t n) {
  if (n == 0) return kNegInf;
  if (n == 1) return a[0];
  std::size_t h = n / 2;
  return log_add_exp(lse_range(a, h), lse_range(a + h, n - h));
}
}  // namespace detail

// Deterministic pairwise log-sum-exp over an index-ordered vector. The
// reduction tree depends only on the vector length, so the result is
// bit-identical no matter how the entries were produced (e.g. worker count).
inline double log_sum_exp(const std::vector<double>& v) {
  return detail::lse_range(v.data(), v.size());
}

// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// One-sample Kolmogorov-Smirnov statistic against the standard normal:
//   D = sup_x |F_N(x) - Phi(x)|
// computed at the sample points (the sup of the discrepancy of a step
// function against a continuous CDF is attained at a jump).
inline double ks_statistic_normal(std::vector<double> z) {
  if (z.empty()) throw error("ks_statistic_normal requires a nonempty sample");
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    double phi = normal_cdf(z[i]);
    d = std::max(d, (static_cast<double>(i) + 1.0) / n - phi);
    d = std::max(d, phi - static_cast<double>(i) / n);
  }
  return d;
}

// Lattice-aware variant for integer-valued samples: compares Phi against the
// midpoint (F(x-) + F(x))/2 at each distinct value. For a discrete variable
// converging to a normal law, the plain KS statistic has an O(1/sigma) floor
// coming from the jumps themselves; the midpoint statistic removes that floor
// and isolates genuine departure from normality.
inline double ks_statistic_normal_midpoint(std::vector<double> z) {
  if (z.empty()) {
    throw error("ks_statistic_normal_midpoint requires a nonempty sample");
  }
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < z.size()) {
    std::size_t j = i;
    while (j < z.size() && z[j] == z[i]) ++j;
    double f_lo = static_cast<double>(i) / n;
    double f_hi = static_cast<double>(j) / n;
    d = std::max(d, std::fabs(0.5 * (f_lo + f_hi) - normal_cdf(z[i])));
    i = j;
  }
  return d;
}

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // population variance (divide by N)
};

inline MeanVar mean_var(const std::vector<double>& v) {
  if (v.empty()) throw error("mean_var requires a nonempty sample");
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, s / static_cast<double>(v.size())};
}

}  // namespace bandsis
