#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "bandsis/common.hpp"
#include "bandsis/counting.hpp"
#include "bandsis/numeric.hpp"
#include "bandsis/rng.hpp"
#include "bandsis/state_space.hpp"

namespace bandsis {

// One transition of the exact uniform-matching chain: move j from the row's
// state to `target`, taken with probability p.
struct KernelEntry {
  int move = 0;
  int target = 0;
  double p = 0.0;
};

// The time-inhomogeneous Markov chain whose trajectories are uniformly
// distributed over band matchings: at path position k the kernel is
//   K_k(x, T_j(x)) = completions[k+1][T_j(x)] / completions[k][x]
// over legal moves. Multiplying the kernel entries along any trajectory
// telescopes to 1/|F|, which is what makes the walk an exact uniform sampler.
//
// Kernels are built from exact big-integer completion counts when
// n <= kMaxExactN and from the log-domain recursion (with row normalization)
// for larger n. Rows exist only for states whose completion count is
// positive; every state reachable from x0 has one.
class Chain {
 public:
  explicit Chain(const BandSpec& spec) : spec_(spec), ss_(spec.s, spec.t) {
    spec.validate();
    const int m = ss_.size();
    const int n = spec_.n;
    rows_.assign(static_cast<std::size_t>(n),
                 std::vector<std::vector<KernelEntry>>(static_cast<std::size_t>(m)));
    if (n <= kMaxExactN) {
      build_exact();
    } else {
      build_log_domain();
    }
    build_marginals();
  }

  const BandSpec& spec() const { return spec_; }
  const StateSpace& states() const { return ss_; }
  double log_count() const { return log_count_; }

  // Kernel row at path position k for state index x, sorted by target state
  // index; empty when x cannot complete (or is never reached).
  const std::vector<KernelEntry>& row(int k, int x) const {
    return rows_[static_cast<std::size_t>(k)][static_cast<std::size_t>(x)];
  }

  // Forward occupation probabilities: marginal(k)[x] = P(X_k = x), k = 0..n.
  const std::vector<double>& marginal(int k) const {
    return marginals_[static_cast<std::size_t>(k)];
  }

 private:
  void build_exact() {
    const int m = ss_.size();
    const int n = spec_.n;
    std::vector<BigInt> next(static_cast<std::size_t>(m), 0);
    std::vector<BigInt> cur(static_cast<std::size_t>(m), 0);
    next[static_cast<std::size_t>(ss_.start_index())] = 1;
    for (int k = n - 1; k >= 0; --k) {
      auto& row_k = rows_[static_cast<std::size_t>(k)];
      for (int x = 0; x < m; ++x) {
        MoveSet ms = legal_moves_at(ss_, x, k, n);
        BigInt total = 0;
        for (int a = 0; a < ms.count; ++a) {
          total += next[static_cast<std::size_t>(ms.target[static_cast<std::size_t>(a)])];
        }
        cur[static_cast<std::size_t>(x)] = total;
        if (total == 0) continue;
        auto& row = row_k[static_cast<std::size_t>(x)];
        row.reserve(static_cast<std::size_t>(ms.count));
        for (int a = 0; a < ms.count; ++a) {
          const BigInt& c =
              next[static_cast<std::size_t>(ms.target[static_cast<std::size_t>(a)])];
          if (c == 0) continue;
          row.push_back({ms.move[static_cast<std::size_t>(a)],
                         ms.target[static_cast<std::size_t>(a)],
                         ratio_of_bigints(c, total)});
        }
      }
      std::swap(cur, next);
    }
    log_count_ = log_of_bigint(next[static_cast<std::size_t>(ss_.start_index())]);
    if (log_count_ == kNegInf) {
      throw error("band graph admits no perfect matching (count is zero)");
    }
  }

  void build_log_domain() {
    const int m = ss_.size();
    const int n = spec_.n;
    std::vector<double> next(static_cast<std::size_t>(m), kNegInf);
    std::vector<double> cur(static_cast<std::size_t>(m), kNegInf);
    next[static_cast<std::size_t>(ss_.start_index())] = 0.0;
    for (int k = n - 1; k >= 0; --k) {
      auto& row_k = rows_[static_cast<std::size_t>(k)];
      for (int x = 0; x < m; ++x) {
        MoveSet ms = legal_moves_at(ss_, x, k, n);
        double total = kNegInf;
        for (int a = 0; a < ms.count; ++a) {
          total = log_add_exp(total, next[static_cast<std::size_t>(
                                         ms.target[static_cast<std::size_t>(a)])]);
        }
        cur[static_cast<std::size_t>(x)] = total;
        if (total == kNegInf) continue;
        auto& row = row_k[static_cast<std::size_t>(x)];
        row.reserve(static_cast<std::size_t>(ms.count));
        double sum = 0.0;
        for (int a = 0; a < ms.count; ++a) {
          double c = next[static_cast<std::size_t>(ms.target[static_cast<std::size_t>(a)])];
          if (c == kNegInf) continue;
          double p = std::exp(c - total);
          sum += p;
          row.push_back({ms.move[static_cast<std::size_t>(a)],
                         ms.target[static_cast<std::size_t>(a)], p});
        }
        for (KernelEntry& e : row) e.p /= sum;  // keep rows exactly stochastic
      }
      std::swap(cur, next);
    }
    log_count_ = next[static_cast<std::size_t>(ss_.start_index())];
    if (log_count_ == kNegInf) {
      throw error("band graph admits no perfect matching (count is zero)");
    }
  }

  void build_marginals() {
    const int m = ss_.size();
    const int n = spec_.n;
    marginals_.assign(static_cast<std::size_t>(n) + 1,
                      std::vector<double>(static_cast<std::size_t>(m), 0.0));
    marginals_[0][static_cast<std::size_t>(ss_.start_index())] = 1.0;
    for (int k = 0; k < n; ++k) {
      const auto& cur = marginals_[static_cast<std::size_t>(k)];
      auto& nxt = marginals_[static_cast<std::size_t>(k) + 1];
      for (int x = 0; x < m; ++x) {
        double mass = cur[static_cast<std::size_t>(x)];
        if (mass == 0.0) continue;
        for (const KernelEntry& e : row(k, x)) {
          nxt[static_cast<std::size_t>(e.target)] += mass * e.p;
        }
      }
    }
  }

  BandSpec spec_;
  StateSpace ss_;
  std::vector<std::vector<std::vector<KernelEntry>>> rows_;  // [k][x] -> entries
  std::vector<std::vector<double>> marginals_;
  double log_count_ = kNegInf;
};

// A draw from the chain: the matching, its trajectory, and the number of
// forced steps along it.
struct UniformSample {
  Permutation pi;
  SequencePath path;
  int theta = 0;
};

// Samples one uniformly distributed band matching by walking the chain.
// Row CDFs are walked in target-state-index order with a single uniform
// variate per step.
inline UniformSample sample_uniform_detail(const Chain& chain, CounterRng& rng) {
  const StateSpace& ss = chain.states();
  const int n = chain.spec().n;
  UniformSample out;
  out.pi.resize(static_cast<std::size_t>(n));
  out.path.s = chain.spec().s;
  out.path.t = chain.spec().t;
  out.path.states.reserve(static_cast<std::size_t>(n) + 1);
  int x = ss.start_index();
  out.path.states.push_back(ss.state(x));
  for (int k = 0; k < n; ++k) {
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
    const KernelEntry& e = row[static_cast<std::size_t>(pick)];
    out.pi[static_cast<std::size_t>(k)] = (k + 1) + ss.offset_of_move(x, e.move);
    x = e.target;
    out.path.states.push_back(ss.state(x));
    if (k + 1 < n && ss.forced(x)) ++out.theta;
  }
  return out;
}

inline Permutation sample_uniform(const Chain& chain, CounterRng& rng) {
  return sample_uniform_detail(chain, rng).pi;
}

// Fast path for CLT experiments: walks states only and returns theta.
inline int sample_theta(const Chain& chain, CounterRng& rng) {
  const StateSpace& ss = chain.states();
  const int n = chain.spec().n;
  int x = ss.start_index();
  int theta = 0;
  for (int k = 0; k < n; ++k) {
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
    x = row[static_cast<std::size_t>(pick)].target;
    if (k + 1 < n && ss.forced(x)) ++theta;
  }
  return theta;
}

struct ThetaMoments {
  double mean = 0.0;
  double var = 0.0;
};

// Exact mean and variance of theta under the uniform distribution on band
// matchings, by pushing (mass, E[theta], E[theta^2]) marginals forward
// through the kernels.
inline ThetaMoments exact_theta_moments(const Chain& chain) {
  const StateSpace& ss = chain.states();
  const int m = ss.size();
  const int n = chain.spec().n;
  std::vector<double> mass(static_cast<std::size_t>(m), 0.0);
  std::vector<double> m1(static_cast<std::size_t>(m), 0.0);
  std::vector<double> m2(static_cast<std::size_t>(m), 0.0);
  std::vector<double> nmass(static_cast<std::size_t>(m));
  std::vector<double> nm1(static_cast<std::size_t>(m));
  std::vector<double> nm2(static_cast<std::size_t>(m));
  mass[static_cast<std::size_t>(ss.start_index())] = 1.0;
  for (int k = 0; k < n; ++k) {
    std::fill(nmass.begin(), nmass.end(), 0.0);
    std::fill(nm1.begin(), nm1.end(), 0.0);
    std::fill(nm2.begin(), nm2.end(), 0.0);
    for (int x = 0; x < m; ++x) {
      double p = mass[static_cast<std::size_t>(x)];
      if (p == 0.0) continue;
      double a1 = m1[static_cast<std::size_t>(x)];
      double a2 = m2[static_cast<std::size_t>(x)];
      for (const KernelEntry& e : chain.row(k, x)) {
        std::size_t y = static_cast<std::size_t>(e.target);
        double f = (k + 1 < n && ss.forced(e.target)) ? 1.0 : 0.0;
        nmass[y] += e.p * p;
        nm1[y] += e.p * (a1 + f * p);
        nm2[y] += e.p * (a2 + 2.0 * f * a1 + f * p);
      }
    }
    mass.swap(nmass);
    m1.swap(nm1);
    m2.swap(nm2);
  }
  std::size_t x0 = static_cast<std::size_t>(ss.start_index());
  double mean = m1[x0];
  double var = m2[x0] - mean * mean;
  return {mean, std::max(var, 0.0)};
}

inline ThetaMoments exact_theta_moments(const BandSpec& spec) {
  return exact_theta_moments(Chain(spec));
}

// Moment summary of the log importance ratio log rho = log(nu/mu) under the
// ideal proposal mu = (t+1)^{theta - n}:
//   E log rho   = (n - E theta) log(t+1) - log|F|
//   Var log rho = log(t+1)^2 Var theta
// c_n and d_n are the per-step normalizations whose limits drive sample-size
// predictions.
struct MomentReport {
  BandSpec spec;
  double e_theta = 0.0;
  double var_theta = 0.0;
  double log_count = 0.0;
  double e_log_rho = 0.0;
  double var_log_rho = 0.0;
  double c_n = 0.0;
  double d_n = 0.0;
};

inline MomentReport moment_report(const BandSpec& spec) {
  Chain chain(spec);
  ThetaMoments tm = exact_theta_moments(chain);
  MomentReport r;
  r.spec = spec;
  r.e_theta = tm.mean;
  r.var_theta = tm.var;
  r.log_count = chain.log_count();
  double log_t1 = std::log(static_cast<double>(spec.t + 1));
  r.e_log_rho = (spec.n - tm.mean) * log_t1 - chain.log_count();
  r.var_log_rho = log_t1 * log_t1 * tm.var;
  r.c_n = (spec.n - tm.mean) * log_t1 / spec.n;
  r.d_n = r.var_log_rho / spec.n;
  return r;
}

// Asymptotic growth constants extracted by first differences at a large
// doubling point: with g(n) = (n - E theta(n)) log(t+1) and
// V(n) = Var(log rho)(n),
//   c = (g(2n) - g(n)) / n,   d = (V(2n) - V(n)) / n.
// Differencing cancels the O(1) terms of g and V, so the estimates converge
// geometrically in n.
struct GrowthConstants {
  double c = 0.0;
  double d = 0.0;
};

inline GrowthConstants extract_constants(int s, int t, int n_big) {
  if (n_big < 1024 || (n_big & (n_big - 1)) != 0) {
    throw error("extract_constants requires n_big to be a power of two >= 1024");
  }
  MomentReport a = moment_report({s, t, n_big});
  MomentReport b = moment_report({s, t, 2 * n_big});
  double log_t1 = std::log(static_cast<double>(t + 1));
  double ga = (n_big - a.e_theta) * log_t1;
  double gb = (2 * n_big - b.e_theta) * log_t1;
  GrowthConstants out;
  out.c = (gb - ga) / n_big;
  out.d = (b.var_log_rho - a.var_log_rho) / n_big;
  return out;
}

}  // namespace bandsis
