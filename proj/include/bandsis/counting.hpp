#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bandsis/common.hpp"
#include "bandsis/graph.hpp"
#include "bandsis/numeric.hpp"
#include "bandsis/state_space.hpp"

namespace bandsis {

// Largest n for which exact big-integer tables are built; beyond this the
// log-domain code paths take over.
inline constexpr int kMaxExactN = 4096;

// The set of legal moves out of state x at path position k (left vertex
// i = k+1) in a size-n problem: structural legality (forced states move only
// by T_1) plus both label bounds 1 <= i + offset <= n. Entries are sorted by
// target state index, the canonical order for CDF walks.
struct MoveSet {
  int count = 0;
  std::array<int, kMaxStateT + 1> move{};    // move index j
  std::array<int, kMaxStateT + 1> target{};  // target state index
};

inline MoveSet legal_moves_at(const StateSpace& ss, int idx, int k, int n) {
  MoveSet ms;
  const int i = k + 1;
  const int j_lo = ss.forced(idx) ? 1 : 0;
  const int j_hi = ss.forced(idx) ? 1 : ss.t();
  for (int j = j_lo; j <= j_hi; ++j) {
    int label = i + ss.offset_of_move(idx, j);
    if (label < 1 || label > n) continue;
    int tgt = ss.target(idx, j);
    int pos = ms.count++;
    while (pos > 0 && ms.target[static_cast<std::size_t>(pos - 1)] > tgt) {
      ms.move[static_cast<std::size_t>(pos)] = ms.move[static_cast<std::size_t>(pos - 1)];
      ms.target[static_cast<std::size_t>(pos)] = ms.target[static_cast<std::size_t>(pos - 1)];
      --pos;
    }
    ms.move[static_cast<std::size_t>(pos)] = j;
    ms.target[static_cast<std::size_t>(pos)] = tgt;
  }
  return ms;
}

// Exact completion-count table. completions[k][x] is the number of ways to
// finish a trajectory from state x at path position k to x0 at position n
// (equivalently, the number of endgame-consistent matchings of the remaining
// vertices k+1..n given window state x).
struct CountTable {
  BandSpec spec;
  std::vector<std::vector<BigInt>> completions;  // (n+1) rows, |X| columns
};

inline CountTable completion_table(const BandSpec& spec) {
  spec.validate();
  if (spec.n > kMaxExactN) {
    throw error("completion_table supports n <= " + std::to_string(kMaxExactN) +
                "; use the log-domain routines for larger n");
  }
  StateSpace ss(spec.s, spec.t);
  const int m = ss.size();
  const int x0 = ss.start_index();
  CountTable table;
  table.spec = spec;
  table.completions.assign(static_cast<std::size_t>(spec.n) + 1,
                           std::vector<BigInt>(static_cast<std::size_t>(m), 0));
  table.completions[static_cast<std::size_t>(spec.n)][static_cast<std::size_t>(x0)] = 1;
  for (int k = spec.n - 1; k >= 0; --k) {
    auto& cur = table.completions[static_cast<std::size_t>(k)];
    const auto& next = table.completions[static_cast<std::size_t>(k) + 1];
    for (int x = 0; x < m; ++x) {
      MoveSet ms = legal_moves_at(ss, x, k, spec.n);
      BigInt total = 0;
      for (int a = 0; a < ms.count; ++a) {
        total += next[static_cast<std::size_t>(ms.target[static_cast<std::size_t>(a)])];
      }
      cur[static_cast<std::size_t>(x)] = total;
    }
  }
  return table;
}

// Exact number of perfect matchings of the (s, t, n) band graph, i.e. the
// number of permutations with -s <= pi(i) - i <= t. Streams the completion
// recursion two levels at a time.
inline BigInt count_matchings(const BandSpec& spec) {
  spec.validate();
  if (spec.n > kMaxExactN) {
    throw error("count_matchings supports n <= " + std::to_string(kMaxExactN) +
                "; use log_count_matchings for larger n");
  }
  StateSpace ss(spec.s, spec.t);
  const int m = ss.size();
  std::vector<BigInt> next(static_cast<std::size_t>(m), 0);
  std::vector<BigInt> cur(static_cast<std::size_t>(m), 0);
  next[static_cast<std::size_t>(ss.start_index())] = 1;
  for (int k = spec.n - 1; k >= 0; --k) {
    for (int x = 0; x < m; ++x) {
      MoveSet ms = legal_moves_at(ss, x, k, spec.n);
      BigInt total = 0;
      for (int a = 0; a < ms.count; ++a) {
        total += next[static_cast<std::size_t>(ms.target[static_cast<std::size_t>(a)])];
      }
      cur[static_cast<std::size_t>(x)] = total;
    }
    std::swap(cur, next);
  }
  return next[static_cast<std::size_t>(ss.start_index())];
}

inline double log_of_bigint(const BigInt& v) {
  if (v <= 0) return kNegInf;
  signed long exp2;
  double mant = mpz_get_d_2exp(&exp2, v.get_mpz_t());
  return std::log(mant) + static_cast<double>(exp2) * M_LN2;
}

// Ratio of two positive big integers as a double (a few ulp of error).
inline double ratio_of_bigints(const BigInt& num, const BigInt& den) {
  signed long en, ed;
  double dn = mpz_get_d_2exp(&en, num.get_mpz_t());
  double dd = mpz_get_d_2exp(&ed, den.get_mpz_t());
  return std::ldexp(dn / dd, static_cast<int>(en - ed));
}

// log |F_{n,s,t}| via the completion recursion in the log domain; works for
// any n the machine can iterate.
inline double log_count_matchings(const BandSpec& spec) {
  spec.validate();
  StateSpace ss(spec.s, spec.t);
  const int m = ss.size();
  std::vector<double> next(static_cast<std::size_t>(m), kNegInf);
  std::vector<double> cur(static_cast<std::size_t>(m), kNegInf);
  next[static_cast<std::size_t>(ss.start_index())] = 0.0;
  for (int k = spec.n - 1; k >= 0; --k) {
    for (int x = 0; x < m; ++x) {
      MoveSet ms = legal_moves_at(ss, x, k, spec.n);
      double total = kNegInf;
      for (int a = 0; a < ms.count; ++a) {
        total = log_add_exp(total, next[static_cast<std::size_t>(
                                       ms.target[static_cast<std::size_t>(a)])]);
      }
      cur[static_cast<std::size_t>(x)] = total;
    }
    std::swap(cur, next);
  }
  return next[static_cast<std::size_t>(ss.start_index())];
}

// How free steps are weighted in the tilted counts below.
enum class WeightMode {
  kIdealChoices,   // every free step weighs (t+1)^m, the in-band choice count
  kActualChoices,  // each step weighs (#legal moves)^m at that step
};

// Log of the tilted matching count sum_pi prod_steps w_step^m, where w_step
// is the free-step choice count under the selected mode (forced steps always
// weigh 1 under kIdealChoices; under kActualChoices their single legal move
// gives weight 1^m = 1 as well). m = 0 recovers log |F|; under kIdealChoices
// the sum equals sum_pi (t+1)^{m (n - theta(pi))}.
inline double weighted_count(const BandSpec& spec, double m, WeightMode mode) {
  spec.validate();
  if (std::fabs(m) > 4.0) {
    throw error("weighted_count supports |m| <= 4");
  }
  StateSpace ss(spec.s, spec.t);
  const int msize = ss.size();
  const double log_ideal = static_cast<double>(m) * std::log(static_cast<double>(spec.t + 1));
  std::vector<double> next(static_cast<std::size_t>(msize), kNegInf);
  std::vector<double> cur(static_cast<std::size_t>(msize), kNegInf);
  next[static_cast<std::size_t>(ss.start_index())] = 0.0;
  for (int k = spec.n - 1; k >= 0; --k) {
    for (int x = 0; x < msize; ++x) {
      MoveSet ms = legal_moves_at(ss, x, k, spec.n);
      double total = kNegInf;
      for (int a = 0; a < ms.count; ++a) {
        total = log_add_exp(total, next[static_cast<std::size_t>(
                                       ms.target[static_cast<std::size_t>(a)])]);
      }
      if (ms.count > 0 && !ss.forced(x)) {
        total += (mode == WeightMode::kIdealChoices)
                     ? log_ideal
                     : m * std::log(static_cast<double>(ms.count));
      }
      cur[static_cast<std::size_t>(x)] = total;
    }
    std::swap(cur, next);
  }
  return next[static_cast<std::size_t>(ss.start_index())];
}

// Number of length-L walks in the structural state graph starting from
// `from` (no label bounds; forced states still move only by T_1). P_0 = 1.
inline BigInt path_counts(int s, int t, int L, const StateTuple& from) {
  if (L < 0) throw error("path_counts requires L >= 0");
  StateSpace ss(s, t);
  int from_idx = ss.index_of(from);
  if (from_idx < 0) {
    throw error("path_counts: " + from.to_string() + " is not a state of X_{" +
                std::to_string(s) + "," + std::to_string(t) + "}");
  }
  const int m = ss.size();
  std::vector<BigInt> cur(static_cast<std::size_t>(m), 1);  // P_0 = 1
  std::vector<BigInt> next(static_cast<std::size_t>(m));
  for (int step = 0; step < L; ++step) {
    for (int x = 0; x < m; ++x) {
      BigInt total = 0;
      int j_lo = ss.forced(x) ? 1 : 0;
      int j_hi = ss.forced(x) ? 1 : t;
      for (int j = j_lo; j <= j_hi; ++j) {
        total += cur[static_cast<std::size_t>(ss.target(x, j))];
      }
      next[static_cast<std::size_t>(x)] = total;
    }
    std::swap(cur, next);
  }
  return cur[static_cast<std::size_t>(from_idx)];
}

// Perron data of the structural state graph's adjacency matrix H_{s,t}:
// dominant eigenvalue lambda (the growth factor of band matching counts),
// the right Perron vector (normalized to sum 1), the fixed-point residual,
// and a spectral-gap estimate from deflated power iteration.
struct SpectralData {
  double lambda = 0.0;
  std::vector<double> v;     // right Perron vector, sum 1
  double residual = 0.0;     // max_x |(Hv)_x - lambda v_x|
  double gap = 0.0;          // lambda - |second eigenvalue| estimate
  long iterations = 0;
};

namespace detail {

inline std::vector<double> matvec(const std::vector<std::vector<int>>& a,
                                  const std::vector<double>& x) {
  std::size_t m = a.size();
  std::vector<double> y(m, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      if (a[r][c]) acc += x[c];
    }
    y[r] = acc;
  }
  return y;
}

inline std::vector<double> power_iterate(const std::vector<std::vector<int>>& a,
                                         double tol, long cap, double& lambda_out,
                                         long& iters_out) {
  std::size_t m = a.size();
  std::vector<double> v(m, 1.0 / static_cast<double>(m));
  double lambda = 0.0;
  for (long it = 1; it <= cap; ++it) {
    std::vector<double> w = matvec(a, v);
    double total = 0.0;
    for (double x : w) total += x;
    if (total <= 0.0) throw error("power iteration degenerated to zero vector");
    lambda = total;  // v sums to 1, so sum(Hv) estimates lambda
    double delta = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      w[r] /= total;
      delta = std::max(delta, std::fabs(w[r] - v[r]));
    }
    v = std::move(w);
    if (delta < tol) {
      lambda_out = lambda;
      iters_out = it;
      return v;
    }
  }
  throw error("power iteration did not converge within the iteration cap");
}

}  // namespace detail

inline SpectralData perron(int s, int t) {
  StateSpace ss(s, t);
  auto adj = state_graph(ss);
  const std::size_t m = adj.size();
  SpectralData out;
  out.v = detail::power_iterate(adj, 1e-13, 1000000, out.lambda, out.iterations);
  std::vector<double> hv = detail::matvec(adj, out.v);
  out.residual = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    out.residual = std::max(out.residual, std::fabs(hv[r] - out.lambda * out.v[r]));
  }
  // Left Perron vector for deflation.
  std::vector<std::vector<int>> adj_t(m, std::vector<int>(m, 0));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) adj_t[c][r] = adj[r][c];
  }
  double lambda_left = 0.0;
  long left_iters = 0;
  std::vector<double> u =
      detail::power_iterate(adj_t, 1e-13, 1000000, lambda_left, left_iters);
  double uv = 0.0;
  for (std::size_t r = 0; r < m; ++r) uv += u[r] * out.v[r];
  // Deflated iteration on B = H - lambda v u^T / (u^T v); the growth rate of
  // ||B^k z|| estimates |lambda_2|. Use norm ratios over a trailing window so
  // complex pairs do not bias the estimate.
  std::vector<double> z(m);
  for (std::size_t r = 0; r < m; ++r) {
    z[r] = (r % 2 == 0) ? 1.0 : -0.5;  // fixed, deterministic start
  }
  auto apply_deflated = [&](const std::vector<double>& x) {
    std::vector<double> y = detail::matvec(adj, x);
    double ux = 0.0;
    for (std::size_t r = 0; r < m; ++r) ux += u[r] * x[r];
    double coef = out.lambda * ux / uv;
    for (std::size_t r = 0; r < m; ++r) y[r] -= coef * out.v[r];
    return y;
  };
  const int warmup = 200, window = 200;
  double log_norm_sum = 0.0;
  double second = 0.0;
  bool collapsed = false;
  for (int it = 0; it < warmup + window; ++it) {
    z = apply_deflated(z);
    double norm = 0.0;
    for (double x : z) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      collapsed = true;  // deflated operator annihilated z: no second mode
      break;
    }
    for (double& x : z) x /= norm;
    if (it >= warmup) log_norm_sum += std::log(norm);
  }
  if (!collapsed) {
    second = std::exp(log_norm_sum / static_cast<double>(window));
  }
  out.gap = out.lambda - second;
  return out;
}

}  // namespace bandsis
