#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "bandsis/chain.hpp"
#include "bandsis/common.hpp"
#include "bandsis/correlation.hpp"
#include "bandsis/rng.hpp"

namespace bandsis {

// Empirical coupling experiment: draw a trajectory X, pick a position I
// uniformly, and run an independent copy X' from the same state X_I under the
// same kernels. tau is the first position after I where the copies meet
// (both end at x0, so tau <= n always). The kernel floor epsilon implies the
// tail bound P(tau - I > m) <= (1-eps)^{floor(m/(s+t))}-ish geometric decay
// and E[(tau - I)^2] <= 4 (s+t)^2 / eps^2.
struct CouplingReport {
  BandSpec spec;
  std::uint64_t trials = 0;
  double mean_sq_gap = 0.0;        // empirical E[(tau - I)^2]
  double epsilon_kernel = 0.0;     // kernel floor used by the bound
  double bound = 0.0;              // 4 (s+t)^2 / epsilon^2
  int max_gap = 0;
  std::vector<double> survival;    // survival[m] = P(tau - I > m)
  std::uint64_t forced_start_trials = 0;     // trials with -s in X_I
  std::uint64_t forced_start_immediate = 0;  // of those, tau = I + 1
};

inline CouplingReport coupling_time_test(const BandSpec& spec, std::uint64_t trials,
                                         std::uint64_t seed) {
  spec.validate();
  if (trials < 1) throw error("coupling_time_test requires trials >= 1");
  Chain chain(spec);
  const StateSpace& ss = chain.states();
  const int n = spec.n;
  CouplingReport report;
  report.spec = spec;
  report.trials = trials;
  report.epsilon_kernel = max_correlation(chain).epsilon_kernel;
  double st = static_cast<double>(spec.s + spec.t);
  report.bound = 4.0 * st * st / (report.epsilon_kernel * report.epsilon_kernel);

  auto step = [&](int k, int x, CounterRng& rng) -> int {
    const auto& row = chain.row(k, x);
    if (row.empty()) throw error("chain walk reached a dead state");
    int pick = static_cast<int>(row.size()) - 1;
    if (row.size() > 1) {
      double u = rng.next_double();
      double cum = 0.0;
      for (std::size_t a = 0; a < row.size(); ++a) {
        cum += row[a].p;
        if (u < cum) {
          pick = static_cast<int>(a);
          break;
        }
      }
    }
    return row[static_cast<std::size_t>(pick)].target;
  };

  std::vector<std::uint64_t> gap_counts;
  double sq_sum = 0.0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    CounterRng rng = CounterRng::stream(seed, trial);
    std::vector<int> path(static_cast<std::size_t>(n) + 1);
    path[0] = ss.start_index();
    for (int k = 0; k < n; ++k) {
      path[static_cast<std::size_t>(k) + 1] = step(k, path[static_cast<std::size_t>(k)], rng);
    }
    int start = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    bool forced_start = ss.forced(path[static_cast<std::size_t>(start)]);
    int x = path[static_cast<std::size_t>(start)];
    int tau = n;  // both trajectories end at x0, so they meet by position n
    for (int k = start; k < n; ++k) {
      x = step(k, x, rng);
      if (x == path[static_cast<std::size_t>(k) + 1]) {
        tau = k + 1;
        break;
      }
    }
    int gap = tau - start;
    sq_sum += static_cast<double>(gap) * static_cast<double>(gap);
    if (gap > report.max_gap) report.max_gap = gap;
    if (static_cast<std::size_t>(gap) >= gap_counts.size()) {
      gap_counts.resize(static_cast<std::size_t>(gap) + 1, 0);
    }
    gap_counts[static_cast<std::size_t>(gap)] += 1;
    if (forced_start) {
      ++report.forced_start_trials;
      if (gap == 1) ++report.forced_start_immediate;
    }
  }
  report.mean_sq_gap = sq_sum / static_cast<double>(trials);
  report.survival.assign(gap_counts.size(), 0.0);
  std::uint64_t above = trials;
  for (std::size_t m = 0; m < gap_counts.size(); ++m) {
    above -= gap_counts[m];
    report.survival[m] = static_cast<double>(above) / static_cast<double>(trials);
  }
  return report;
}

}  // namespace bandsis
