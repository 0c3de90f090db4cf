#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bandsis/common.hpp"
#include "bandsis/counting.hpp"
#include "bandsis/graph.hpp"
#include "bandsis/state_space.hpp"

namespace bandsis {

// High-precision scalar for the probability recursion. The forward
// substitution p_k = 1 - (1-p_1)^k / (p_1 ... p_{k-1}) roughly doubles any
// input error per step, so ~2^t amplification must stay far below the
// smallest meaningful gaps (p_t - 1/3 is of order 2^-t); 100 decimal digits
// leave ample headroom for t <= 64.
using HighFloat = boost::multiprecision::cpp_bin_float_100;

// Solution of the variance-optimality system for the t+1-choice sampler:
//   p_1^2 = (1-p_1)^2 - (1-p_1)^{t+2}
//   (1-p_1)^k = p_1 ... p_{k-1} (1-p_k)      for k = 2..t
// p_k is the probability of taking the newest window vertex when the oldest
// unmatched one lags k-1 behind; 1/2 > p_1 > ... > p_t > 1/3 always.
struct OptProbs {
  int t = 0;
  std::vector<double> p;         // double view of p_1..p_t
  std::vector<HighFloat> p_hi;   // full-precision values
  double residual_recurrence = 0.0;  // max_k |(1-p1)^k - p1..p_{k-1}(1-p_k)|
  double residual_terminal = 0.0;    // |(1-p1)^{t+1} - p1..p_t|
};

namespace detail {
inline HighFloat pow_int(HighFloat base, int e) {
  HighFloat acc = 1;
  while (e > 0) {
    if (e & 1) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}
}  // namespace detail

inline OptProbs solve_opt_probs(int t) {
  if (t < 1 || t > 64) throw error("solve_opt_probs supports 1 <= t <= 64");
  // Root of f(p) = p^2 - (1-p)^2 + (1-p)^{t+2} in (1/3, 1/2):
  // f(1/3) < 0, f(1/2) > 0, and f is increasing on the bracket.
  auto f = [&](const HighFloat& p) {
    HighFloat q = 1 - p;
    return p * p - q * q + detail::pow_int(q, t + 2);
  };
  auto fprime = [&](const HighFloat& p) {
    HighFloat q = 1 - p;
    return 2 * p + 2 * q - HighFloat(t + 2) * detail::pow_int(q, t + 1);
  };
  HighFloat lo = HighFloat(1) / 3, hi = HighFloat(1) / 2;
  // Bisection down to 1e-6, then Newton.
  while (hi - lo > HighFloat("1e-6")) {
    HighFloat mid = (lo + hi) / 2;
    if (f(mid) > 0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  HighFloat p1 = (lo + hi) / 2;
  for (int it = 0; it < 200; ++it) {
    HighFloat delta = f(p1) / fprime(p1);
    p1 -= delta;
    if (abs(delta) < HighFloat("1e-90")) break;
  }

  OptProbs out;
  out.t = t;
  out.p_hi.resize(static_cast<std::size_t>(t));
  out.p_hi[0] = p1;
  HighFloat q = 1 - p1;
  HighFloat prod = p1;  // p_1 ... p_{k-1} while computing p_k
  HighFloat qk = q;
  for (int k = 2; k <= t; ++k) {
    qk *= q;  // (1-p_1)^k
    HighFloat pk = 1 - qk / prod;
    out.p_hi[static_cast<std::size_t>(k - 1)] = pk;
    prod *= pk;
  }
  HighFloat third = HighFloat(1) / 3, half = HighFloat(1) / 2;
  for (int k = 0; k < t; ++k) {
    const HighFloat& cur = out.p_hi[static_cast<std::size_t>(k)];
    if (!(cur > third && cur < half)) {
      throw error("opt-probability solver left (1/3, 1/2) at k=" + std::to_string(k + 1));
    }
    if (k > 0 && !(cur < out.p_hi[static_cast<std::size_t>(k - 1)])) {
      throw error("opt-probability solver lost strict monotonicity at k=" +
                  std::to_string(k + 1));
    }
  }
  out.p.resize(static_cast<std::size_t>(t));
  for (int k = 0; k < t; ++k) {
    out.p[static_cast<std::size_t>(k)] =
        static_cast<double>(out.p_hi[static_cast<std::size_t>(k)]);
  }
  // Residuals of the defining system, evaluated in high precision.
  HighFloat rec_res = 0;
  HighFloat run = 1;  // p_1 ... p_{k-1}
  for (int k = 1; k <= t; ++k) {
    HighFloat lhs = detail::pow_int(q, k);
    HighFloat rhs = run * (1 - out.p_hi[static_cast<std::size_t>(k - 1)]);
    HighFloat res = abs(lhs - rhs);
    if (res > rec_res) rec_res = res;
    run *= out.p_hi[static_cast<std::size_t>(k - 1)];
  }
  out.residual_recurrence = static_cast<double>(rec_res);
  out.residual_terminal =
      static_cast<double>(abs(detail::pow_int(q, t + 1) - run));
  return out;
}

// Limiting value of p_{t-k} as t grows: (2^{k+1} - 1) / (2^{k+2} - 1).
struct Rational {
  long long num = 0;
  long long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline Rational limiting_prob(int k) {
  if (k < 0 || k > 60) throw error("limiting_prob supports 0 <= k <= 60");
  return {(1ll << (k + 1)) - 1, (1ll << (k + 2)) - 1};
}

// Deviation of the solved tail probabilities from their limits, scaled by the
// conjectured geometric rate: e(t, k) = |p_{t-k} - p*_{t-k}| ~ C_k 2^{-(t+k)}.
struct RateRow {
  int t = 0;
  int k = 0;
  double e = 0.0;       // |p_{t-k} - p*_{t-k}|
  double scaled = 0.0;  // e * 2^{t+k}
};

inline std::vector<RateRow> convergence_rate_check(int t_lo, int t_hi,
                                                   const std::vector<int>& ks) {
  if (t_lo < 1 || t_hi < t_lo || t_hi > 64) {
    throw error("convergence_rate_check requires 1 <= t_lo <= t_hi <= 64");
  }
  std::vector<RateRow> rows;
  for (int t = t_lo; t <= t_hi; ++t) {
    OptProbs probs = solve_opt_probs(t);
    for (int k : ks) {
      if (k < 0 || k >= t) {
        throw error("convergence_rate_check requires 0 <= k < t");
      }
      Rational star = limiting_prob(k);
      HighFloat diff = probs.p_hi[static_cast<std::size_t>(t - k - 1)] -
                       HighFloat(star.num) / HighFloat(star.den);
      double e = static_cast<double>(abs(diff));
      rows.push_back({t, k, e, std::ldexp(e, t + k)});
    }
  }
  return rows;
}

// Log-probability that the weighted sampler for bands of type (s, 1) draws
// the permutation pi. The state is the single lag offset y <= 0; a free step
// with lag d = -y takes the newest vertex (offset +1) with probability
// p_{d+1} and the lagging vertex with probability 1 - p_{d+1}; forced steps
// and the final step have a single choice.
inline double log_mu_weighted_t1(const Permutation& pi, const BandSpec& spec,
                                 const OptProbs& probs) {
  spec.validate();
  if (spec.t != 1) {
    throw error("weighted t=1 sampler requires band t = 1 (got t=" +
                std::to_string(spec.t) + ")");
  }
  if (probs.t != spec.s) {
    throw error("weighted t=1 sampler requires probability vector of length s=" +
                std::to_string(spec.s) + " (got " + std::to_string(probs.t) + ")");
  }
  const int n = spec.n, s = spec.s;
  if (static_cast<int>(pi.size()) != n) {
    throw error("permutation length does not match n");
  }
  double log_mu = 0.0;
  int y = 0;  // current window state (single entry, in [-s, 0])
  for (int i = 1; i <= n; ++i) {
    int o = pi[static_cast<std::size_t>(i - 1)] - i;
    if (o < -s || o > 1) throw error("permutation leaves the (s, 1) band");
    bool forced = (y == -s);
    bool up_legal = !forced && (i + 1 <= n);
    if (o == 1) {
      if (!up_legal) throw error("permutation is not reachable by the sampler");
      double pu = probs.p[static_cast<std::size_t>(-y)];  // lag d = -y uses p_{d+1}
      log_mu += std::log(pu);
      y -= 1;
    } else {
      if (o != y) throw error("permutation is not reachable by the sampler");
      if (up_legal) {
        double pu = probs.p[static_cast<std::size_t>(-y)];
        log_mu += std::log1p(-pu);
      }
      y = 0;  // matched the lagging vertex; window restarts at offset 0
    }
  }
  return log_mu;
}

// Max log-mu spread over all matchings of the (t, 1, n) band under the
// weighted sampler with the solved probabilities; the optimality theorem
// bounds it by 2 log 2.
inline double verify_bounded_ratio(int t, int n) {
  if (t < 1 || t > 3) throw error("verify_bounded_ratio supports 1 <= t <= 3");
  if (n < 1 || n > 10) throw error("verify_bounded_ratio supports 1 <= n <= 10");
  BandSpec spec{t, 1, n};
  OptProbs probs = solve_opt_probs(t);
  std::vector<Permutation> all = enumerate_matchings(band_graph(spec));
  if (all.empty()) throw error("band graph admits no matchings");
  double lo = kPosInf, hi = kNegInf;
  for (const Permutation& pi : all) {
    double lm = log_mu_weighted_t1(pi, spec, probs);
    lo = std::min(lo, lm);
    hi = std::max(hi, lm);
  }
  return hi - lo;
}

// The n-free limit of the uniform-matching chain kernels: from state x, move
// j is taken with probability v(T_j(x)) / sum_legal v(T_k(x)), where v is the
// right Perron vector of the structural state graph. Forced states keep their
// single unit move.
struct LimitingKernel {
  int s = 0;
  int t = 0;
  double lambda = 0.0;
  // p[x][j]: probability of structural move j from state x (0 when illegal).
  std::vector<std::array<double, kMaxStateT + 1>> p;
};

inline LimitingKernel limiting_kernel(int s, int t) {
  StateSpace ss(s, t);
  SpectralData sd = perron(s, t);
  LimitingKernel lk;
  lk.s = s;
  lk.t = t;
  lk.lambda = sd.lambda;
  lk.p.assign(static_cast<std::size_t>(ss.size()), {});
  for (int x = 0; x < ss.size(); ++x) {
    int j_lo = ss.forced(x) ? 1 : 0;
    int j_hi = ss.forced(x) ? 1 : t;
    double total = 0.0;
    for (int j = j_lo; j <= j_hi; ++j) {
      total += sd.v[static_cast<std::size_t>(ss.target(x, j))];
    }
    for (int j = j_lo; j <= j_hi; ++j) {
      lk.p[static_cast<std::size_t>(x)][static_cast<std::size_t>(j)] =
          sd.v[static_cast<std::size_t>(ss.target(x, j))] / total;
    }
  }
  return lk;
}

// Log-probability that the limiting-kernel sampler draws pi: at each step the
// limiting probabilities are restricted to the label-legal moves and
// renormalized, which keeps the proposal a genuine distribution on matchings.
inline double log_mu_limiting(const Permutation& pi, const BandSpec& spec,
                              const LimitingKernel& lk) {
  spec.validate();
  if (lk.s != spec.s || lk.t != spec.t) {
    throw error("limiting kernel band parameters do not match the requested band");
  }
  StateSpace ss(spec.s, spec.t);
  SequencePath path = encode_permutation(pi, spec);
  double log_mu = 0.0;
  for (int i = 1; i <= spec.n; ++i) {
    int x = ss.index_of(path.states[static_cast<std::size_t>(i - 1)]);
    int o = pi[static_cast<std::size_t>(i - 1)] - i;
    int move = -1;
    if (o == spec.t) {
      move = 0;
    } else {
      for (int j = 1; j <= spec.t; ++j) {
        if (ss.offset_of_move(x, j) == o) {
          move = j;
          break;
        }
      }
    }
    if (move < 0) throw error("permutation is not reachable by the sampler");
    MoveSet ms = legal_moves_at(ss, x, i - 1, spec.n);
    double total = 0.0;
    double chosen = -1.0;
    for (int a = 0; a < ms.count; ++a) {
      int j = ms.move[static_cast<std::size_t>(a)];
      double w = lk.p[static_cast<std::size_t>(x)][static_cast<std::size_t>(j)];
      total += w;
      if (j == move) chosen = w;
    }
    if (chosen <= 0.0 || total <= 0.0) {
      throw error("permutation is not reachable by the sampler");
    }
    log_mu += std::log(chosen / total);
  }
  return log_mu;
}

// Per-n extremes of the ratio nu(pi) / mu*(pi) = 1 / (|F| mu*(pi)) between
// the uniform law and the limiting-kernel proposal, by exhaustive enumeration.
// The working conjecture is that max_ratio stays bounded in n.
struct ConjectureRow {
  int n = 0;
  double max_ratio = 0.0;
  double min_ratio = 0.0;
};

inline std::vector<ConjectureRow> conjecture_experiment(int s, int t, int n_max) {
  if (n_max < 1 || n_max > 12) {
    throw error("conjecture_experiment supports 1 <= n_max <= 12");
  }
  LimitingKernel lk = limiting_kernel(s, t);
  std::vector<ConjectureRow> rows;
  for (int n = 1; n <= n_max; ++n) {
    BandSpec spec{s, t, n};
    StateSpace ss(s, t);
    Chain chain(spec);
    // DFS over chain-supported trajectories enumerates all matchings.
    double log_count = chain.log_count();
    double worst = kNegInf, best = kPosInf;
    auto dfs = [&](auto&& self, int k, int x, double log_mu) -> void {
      if (k == n) {
        double log_ratio = -log_count - log_mu;
        worst = std::max(worst, log_ratio);
        best = std::min(best, log_ratio);
        return;
      }
      const auto& completable = chain.row(k, x);  // nonzero-completion moves
      if (completable.empty()) return;
      MoveSet ms = legal_moves_at(ss, x, k, n);
      double total = 0.0;
      for (int a = 0; a < ms.count; ++a) {
        total += lk.p[static_cast<std::size_t>(x)][static_cast<std::size_t>(
            ms.move[static_cast<std::size_t>(a)])];
      }
      for (const KernelEntry& e : completable) {
        double w =
            lk.p[static_cast<std::size_t>(x)][static_cast<std::size_t>(e.move)];
        self(self, k + 1, e.target, log_mu + std::log(w / total));
      }
    };
    dfs(dfs, 0, ss.start_index(), 0.0);
    rows.push_back({n, std::exp(worst), std::exp(best)});
  }
  return rows;
}

}  // namespace bandsis
