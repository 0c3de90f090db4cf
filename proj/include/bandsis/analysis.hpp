#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bandsis/chain.hpp"
#include "bandsis/common.hpp"
#include "bandsis/counting.hpp"
#include "bandsis/numeric.hpp"
#include "bandsis/parallel.hpp"
#include "bandsis/rng.hpp"
#include "bandsis/sampler.hpp"

namespace bandsis {

// Exact distribution of theta under the uniform matching law, via a forward
// DP over (state, forced-step count). Entry [theta] of the result is
// P(theta(pi) = theta).
inline std::vector<double> exact_theta_distribution(const Chain& chain) {
  const StateSpace& ss = chain.states();
  const int m = ss.size();
  const int n = chain.spec().n;
  const int tmax = n;  // theta < n always; n slots are plenty
  std::vector<std::vector<double>> cur(
      static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(tmax) + 1, 0.0));
  std::vector<std::vector<double>> nxt = cur;
  cur[static_cast<std::size_t>(ss.start_index())][0] = 1.0;
  for (int k = 0; k < n; ++k) {
    for (auto& row : nxt) std::fill(row.begin(), row.end(), 0.0);
    for (int x = 0; x < m; ++x) {
      const auto& dist = cur[static_cast<std::size_t>(x)];
      for (const KernelEntry& e : chain.row(k, x)) {
        int shift = (k + 1 < n && ss.forced(e.target)) ? 1 : 0;
        auto& out = nxt[static_cast<std::size_t>(e.target)];
        for (int th = 0; th + shift <= tmax; ++th) {
          double p = dist[static_cast<std::size_t>(th)];
          if (p != 0.0) out[static_cast<std::size_t>(th + shift)] += e.p * p;
        }
      }
    }
    cur.swap(nxt);
  }
  std::vector<double> pmf = cur[static_cast<std::size_t>(ss.start_index())];
  while (pmf.size() > 1 && pmf.back() == 0.0) pmf.pop_back();
  return pmf;
}

// KS distance between a standardized lattice law (pmf over integers,
// standardized by the given mean/sd) and the standard normal: the population
// counterpart of the empirical KS statistic, attained at the jumps.
inline double ks_of_lattice_law(const std::vector<double>& pmf, double mean, double sd) {
  if (sd <= 0.0) throw error("ks_of_lattice_law requires positive sd");
  double d = 0.0;
  double cdf = 0.0;
  for (std::size_t th = 0; th < pmf.size(); ++th) {
    double z = (static_cast<double>(th) - mean) / sd;
    double phi = normal_cdf(z);
    d = std::max(d, std::fabs(phi - cdf));  // just below the jump
    cdf += pmf[th];
    d = std::max(d, std::fabs(phi - cdf));  // at the jump
  }
  return d;
}

// Empirical CLT check for theta: N exact uniform draws, standardized by the
// exact DP moments, compared to the standard normal.
//
// ks_statistic is the plain one-sample KS distance. For an integer-valued
// statistic it cannot fall below roughly pmf_max/2 (half the largest CDF
// jump) no matter how normal theta is; ks_lattice_floor reports that exact
// population value, and ks_midpoint measures the genuinely testable
// departure with the jumps removed.
struct CLTReport {
  BandSpec spec;
  std::uint64_t n_samples = 0;
  double e_theta = 0.0;
  double sd_theta = 0.0;
  double sample_mean = 0.0;
  double sample_var = 0.0;
  double ks_statistic = 0.0;
  double ks_midpoint = 0.0;
  double ks_lattice_floor = 0.0;
};

inline CLTReport clt_check(const BandSpec& spec, std::uint64_t n_samples,
                           std::uint64_t seed, int workers = 1) {
  spec.validate();
  if (n_samples < 10000) {
    throw error("clt_check requires N >= 10000");
  }
  Chain chain(spec);
  ThetaMoments tm = exact_theta_moments(chain);
  if (tm.var <= 0.0) {
    throw error("theta is constant for this spec (variance 0); "
                "the standardized distribution is degenerate");
  }
  CLTReport report;
  report.spec = spec;
  report.n_samples = n_samples;
  report.e_theta = tm.mean;
  report.sd_theta = std::sqrt(tm.var);
  std::vector<double> z(n_samples);
  parallel_for(n_samples, workers, [&](std::uint64_t i) {
    CounterRng rng = CounterRng::stream(seed, i);
    z[i] = (static_cast<double>(sample_theta(chain, rng)) - tm.mean) / report.sd_theta;
  });
  MeanVar mv = mean_var(z);
  report.sample_mean = mv.mean;
  report.sample_var = mv.var;
  report.ks_statistic = ks_statistic_normal(z);
  report.ks_midpoint = ks_statistic_normal_midpoint(z);
  report.ks_lattice_floor =
      ks_of_lattice_law(exact_theta_distribution(chain), tm.mean, report.sd_theta);
  return report;
}

// Published growth-constant table: rows of (s, t, c, d) extracted at
// n_big/2*n_big.
struct Table1Row {
  int s = 0;
  int t = 0;
  double c = 0.0;
  double d = 0.0;
};

inline const std::vector<std::pair<int, int>>& table1_pairs() {
  static const std::vector<std::pair<int, int>> pairs = {
      {2, 1}, {3, 1}, {4, 1}, {5, 1}, {6, 1}, {7, 1}, {3, 2}};
  return pairs;
}

inline std::vector<Table1Row> table1(const std::vector<std::pair<int, int>>& pairs,
                                     int n_big) {
  for (auto [s, t] : pairs) {
    bool known = false;
    for (auto [ps, pt] : table1_pairs()) {
      if (ps == s && pt == t) known = true;
    }
    if (!known) {
      throw error("table1 supports only the published (s, t) pairs");
    }
  }
  std::vector<Table1Row> rows;
  rows.reserve(pairs.size());
  for (auto [s, t] : pairs) {
    GrowthConstants gc = extract_constants(s, t, n_big);
    rows.push_back({s, t, gc.c, gc.d});
  }
  return rows;
}

// The MCMC reference curve log(n^7 log n).
inline double mcmc_reference(int n) {
  if (n < 2) throw error("mcmc_reference requires n >= 2");
  return 7.0 * std::log(static_cast<double>(n)) +
         std::log(std::log(static_cast<double>(n)));
}

// Predicted log total sampling cost of the sequential estimator,
// log(N_conv * n) = E_nu[log rho] + sqrt(Var_nu[log rho]) + log n, with the
// moments computed exactly at each n.
struct Table2Row {
  int s = 0;
  int t = 0;
  int n = 0;
  double predicted = 0.0;  // log(N_conv * n)
  double mcmc = 0.0;       // log(n^7 log n)
};

struct SampleSizeTable {
  std::vector<Table2Row> rows;
};

inline SampleSizeTable table2(const std::vector<std::pair<int, int>>& pairs,
                              const std::vector<int>& n_list) {
  SampleSizeTable table;
  for (auto [s, t] : pairs) {
    for (int n : n_list) {
      MomentReport mr = moment_report({s, t, n});
      double predicted = mr.e_log_rho + std::sqrt(mr.var_log_rho) +
                         std::log(static_cast<double>(n));
      table.rows.push_back({s, t, n, predicted, mcmc_reference(n)});
    }
  }
  return table;
}

// Sample-size comparison between the naive chi-square variance bound and the
// KL-based e^L prediction:
//   log_n_naive = log chi^2(nu || mu) with mu the actual uniform-choice
//                 sampler (exact, via the tilted count with actual weights)
//   log_n_el    = E_nu log rho + sqrt(Var_nu log rho)
struct NaiveVarianceComparison {
  BandSpec spec;
  double chi_sq = 0.0;
  double log_n_naive = 0.0;
  double log_n_el = 0.0;
};

inline NaiveVarianceComparison naive_variance_comparison(const BandSpec& spec) {
  spec.validate();
  if (spec.n > kMaxExactN) {
    throw error("naive_variance_comparison supports n <= " +
                std::to_string(kMaxExactN));
  }
  NaiveVarianceComparison out;
  out.spec = spec;
  // chi^2 = sum_pi (1/mu(pi)) / |F|^2 - 1; sum_pi 1/mu is the tilted count
  // with m = 1 under actual per-step choice weights.
  double log_sum_inv_mu = weighted_count(spec, 1.0, WeightMode::kActualChoices);
  double log_count = weighted_count(spec, 0.0, WeightMode::kActualChoices);
  double diff = log_sum_inv_mu - 2.0 * log_count;
  double chi = std::expm1(std::max(diff, 0.0));
  out.chi_sq = chi;
  out.log_n_naive = chi > 0.0 ? std::log(chi) : kNegInf;
  out.log_n_el = required_samples(spec).log_n_conv;
  return out;
}

// Reconstructed crossover size N*: the smallest n at which the predicted
// total SIS cost log(N_conv * n) (affine-in-n model for E log rho and
// Var log rho, fitted from exact moments at two doubling points) exceeds the
// MCMC reference log(n^7 log n).
struct CrossoverReport {
  int s = 0;
  int t = 0;
  long long n_star = 0;
  double predicted_at_star = 0.0;
  double mcmc_at_star = 0.0;
};

inline CrossoverReport crossover_N_star(int s, int t) {
  const int n1 = 1024, n2 = 2048;
  MomentReport a = moment_report({s, t, n1});
  MomentReport b = moment_report({s, t, n2});
  double slope_l = (b.e_log_rho - a.e_log_rho) / static_cast<double>(n2 - n1);
  double icept_l = a.e_log_rho - slope_l * n1;
  double slope_v = (b.var_log_rho - a.var_log_rho) / static_cast<double>(n2 - n1);
  double icept_v = a.var_log_rho - slope_v * n1;
  auto predicted = [&](double n) {
    double variance = std::max(slope_v * n + icept_v, 0.0);
    return slope_l * n + icept_l + std::sqrt(variance) + std::log(n);
  };
  auto diff = [&](double n) { return predicted(n) - mcmc_reference(static_cast<int>(n)); };
  if (slope_l <= 0.0) {
    throw error("no crossover: predicted cost does not grow linearly");
  }
  long long lo = 4;
  if (diff(static_cast<double>(lo)) <= 0.0) {
    long long hi = 8;
    while (diff(static_cast<double>(hi)) <= 0.0) {
      hi *= 2;
      if (hi > (1ll << 40)) throw error("no crossover found below 2^40");
    }
    // first integer n with predicted > mcmc
    while (lo + 1 < hi) {
      long long mid = lo + (hi - lo) / 2;
      if (diff(static_cast<double>(mid)) > 0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    lo = hi;
  }
  CrossoverReport out;
  out.s = s;
  out.t = t;
  out.n_star = lo;
  out.predicted_at_star = predicted(static_cast<double>(lo));
  out.mcmc_at_star = mcmc_reference(static_cast<int>(lo));
  return out;
}

}  // namespace bandsis
