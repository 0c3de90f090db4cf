#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "bandsis/chain.hpp"
#include "bandsis/common.hpp"
#include "bandsis/counting.hpp"
#include "bandsis/graph.hpp"
#include "bandsis/numeric.hpp"
#include "bandsis/optprob.hpp"
#include "bandsis/parallel.hpp"
#include "bandsis/rng.hpp"
#include "bandsis/state_space.hpp"

namespace bandsis {

// One sequential-importance-sampling draw: a perfect matching, the log of the
// probability the sampler assigned to it, and the forced-step count theta
// (-1 for general-graph draws, where theta is not defined).
struct WeightedSample {
  Permutation pi;
  SequencePath path;     // band samplers only; empty for general graphs
  double log_mu = 0.0;   // always <= 0
  int theta = -1;
};

namespace detail {

// Uniform choice among the legal moves; the workhorse of Algorithm-1-style
// sampling on band graphs (choice sets match the general algorithm's J_i).
struct UniformRule {
  void operator()(const StateSpace&, const MoveSet& ms, int, std::vector<double>& p) const {
    double w = 1.0 / static_cast<double>(ms.count);
    p.assign(static_cast<std::size_t>(ms.count), w);
  }
};

// Lag-weighted rule for t = 1: with the window lagging d behind, take the
// newest vertex with probability p_{d+1}.
struct WeightedT1Rule {
  const OptProbs* probs;
  void operator()(const StateSpace& ss, const MoveSet& ms, int x,
                  std::vector<double>& p) const {
    p.resize(static_cast<std::size_t>(ms.count));
    if (ms.count == 1) {
      p[0] = 1.0;
      return;
    }
    // two moves: T_0 (offset +1) and T_1 (the lagging vertex)
    int lag = -ss.state(x).entry(0);
    double up = probs->p[static_cast<std::size_t>(lag)];
    for (int a = 0; a < ms.count; ++a) {
      p[static_cast<std::size_t>(a)] =
          (ms.move[static_cast<std::size_t>(a)] == 0) ? up : 1.0 - up;
    }
  }
};

// Limiting-kernel rule: Perron-vector proportions restricted to the legal
// moves and renormalized.
struct LimitingRule {
  const LimitingKernel* lk;
  void operator()(const StateSpace&, const MoveSet& ms, int x,
                  std::vector<double>& p) const {
    p.resize(static_cast<std::size_t>(ms.count));
    double total = 0.0;
    for (int a = 0; a < ms.count; ++a) {
      double w = lk->p[static_cast<std::size_t>(x)]
                     [static_cast<std::size_t>(ms.move[static_cast<std::size_t>(a)])];
      p[static_cast<std::size_t>(a)] = w;
      total += w;
    }
    for (int a = 0; a < ms.count; ++a) p[static_cast<std::size_t>(a)] /= total;
  }
};

}  // namespace detail

// Reusable sequential sampler over the band state machine. Holding the state
// space (and any rule data) once lets estimators draw millions of samples
// without re-deriving structure; sample() is const and thread-safe.
class BandSampler {
 public:
  enum class Rule { kUniform, kWeightedT1, kLimiting };

  static BandSampler uniform(const BandSpec& spec) {
    return BandSampler(spec, Rule::kUniform, {}, {});
  }

  static BandSampler weighted_t1(const BandSpec& spec, OptProbs probs) {
    if (spec.t != 1) {
      throw error("weighted t=1 sampler requires band t = 1 (got t=" +
                  std::to_string(spec.t) + ")");
    }
    if (probs.t != spec.s) {
      throw error("weighted t=1 sampler requires probability vector of length s=" +
                  std::to_string(spec.s) + " (got " + std::to_string(probs.t) + ")");
    }
    return BandSampler(spec, Rule::kWeightedT1, std::move(probs), {});
  }

  static BandSampler limiting(const BandSpec& spec, LimitingKernel lk) {
    if (lk.s != spec.s || lk.t != spec.t) {
      throw error("limiting kernel band parameters do not match the requested band");
    }
    return BandSampler(spec, Rule::kLimiting, {}, std::move(lk));
  }

  const BandSpec& spec() const { return spec_; }

  WeightedSample sample(CounterRng& rng) const {
    const int n = spec_.n;
    WeightedSample out;
    out.pi.resize(static_cast<std::size_t>(n));
    out.path.s = spec_.s;
    out.path.t = spec_.t;
    out.path.states.reserve(static_cast<std::size_t>(n) + 1);
    out.log_mu = 0.0;
    out.theta = 0;
    int x = ss_.start_index();
    out.path.states.push_back(ss_.state(x));
    std::vector<double> probs;
    for (int k = 0; k < n; ++k) {
      if (k >= 1 && ss_.forced(x)) ++out.theta;
      MoveSet ms = legal_moves_at(ss_, x, k, spec_.n);
      if (ms.count == 0) {
        throw error("sampler reached a dead state (no legal moves)");
      }
      fill_probs(ms, x, probs);
      int pick = ms.count - 1;
      if (ms.count > 1) {
        double u = rng.next_double();
        double cum = 0.0;
        for (int a = 0; a < ms.count; ++a) {
          cum += probs[static_cast<std::size_t>(a)];
          if (u < cum) {
            pick = a;
            break;
          }
        }
      }
      out.log_mu += std::log(probs[static_cast<std::size_t>(pick)]);
      int move = ms.move[static_cast<std::size_t>(pick)];
      out.pi[static_cast<std::size_t>(k)] = (k + 1) + ss_.offset_of_move(x, move);
      x = ms.target[static_cast<std::size_t>(pick)];
      out.path.states.push_back(ss_.state(x));
    }
    return out;
  }

 private:
  BandSampler(const BandSpec& spec, Rule rule, OptProbs probs, LimitingKernel lk)
      : spec_(spec), ss_(spec.s, spec.t), rule_(rule), probs_(std::move(probs)),
        lk_(std::move(lk)) {
    spec.validate();
  }

  void fill_probs(const MoveSet& ms, int x, std::vector<double>& p) const {
    switch (rule_) {
      case Rule::kUniform:
        detail::UniformRule{}(ss_, ms, x, p);
        break;
      case Rule::kWeightedT1:
        detail::WeightedT1Rule{&probs_}(ss_, ms, x, p);
        break;
      case Rule::kLimiting:
        detail::LimitingRule{&lk_}(ss_, ms, x, p);
        break;
    }
  }

  BandSpec spec_;
  StateSpace ss_;
  Rule rule_;
  OptProbs probs_;
  LimitingKernel lk_;
};

// Algorithm-1 sequential sampling on an arbitrary balanced bipartite graph:
// at each left vertex choose uniformly among the unmatched neighbors whose
// removal keeps the rest of the graph perfectly matchable. Every perfect
// matching has positive probability, and mu is the product of the uniform
// choice weights. Raises a no-perfect-matching error on infeasible graphs.
inline WeightedSample sis_uniform(const BipartiteGraph& g, CounterRng& rng) {
  const int n = g.n();
  if (!has_perfect_matching(g)) {
    throw error("graph has no perfect matching");
  }
  WeightedSample out;
  out.pi.resize(static_cast<std::size_t>(n));
  out.log_mu = 0.0;
  out.theta = -1;
  std::vector<char> left_done(static_cast<std::size_t>(n) + 1, 0);
  std::vector<char> right_done(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> feasible;
  for (int i = 1; i <= n; ++i) {
    left_done[static_cast<std::size_t>(i)] = 1;
    feasible.clear();
    for (int j : g.neighbors(i)) {
      if (right_done[static_cast<std::size_t>(j)]) continue;
      right_done[static_cast<std::size_t>(j)] = 1;
      if (has_perfect_matching(g, &left_done, &right_done)) feasible.push_back(j);
      right_done[static_cast<std::size_t>(j)] = 0;
    }
    if (feasible.empty()) {
      throw error("sampler reached an infeasible partial matching");
    }
    std::size_t pick = 0;
    if (feasible.size() > 1) {
      pick = static_cast<std::size_t>(rng.next_below(feasible.size()));
    }
    int j = feasible[pick];
    right_done[static_cast<std::size_t>(j)] = 1;
    out.pi[static_cast<std::size_t>(i - 1)] = j;
    out.log_mu -= std::log(static_cast<double>(feasible.size()));
  }
  return out;
}

// State-machine form of the uniform sequential sampler for band graphs; the
// choice sets coincide with Algorithm 1's J_i, so the distributions match.
inline WeightedSample sis_sequence(const BandSpec& spec, CounterRng& rng) {
  return BandSampler::uniform(spec).sample(rng);
}

inline WeightedSample sis_weighted_t1(const BandSpec& spec, const OptProbs& probs,
                                      CounterRng& rng) {
  return BandSampler::weighted_t1(spec, probs).sample(rng);
}

inline WeightedSample sis_limiting(const BandSpec& spec, const LimitingKernel& lk,
                                   CounterRng& rng) {
  return BandSampler::limiting(spec, lk).sample(rng);
}

// Probability that Algorithm 1 assigns to a given matching of g, by
// replaying its choice sets.
inline double log_mu_uniform_graph(const BipartiteGraph& g, const Permutation& pi) {
  const int n = g.n();
  if (!is_matching_of(g, pi)) {
    throw error("permutation is not a perfect matching of the graph");
  }
  double log_mu = 0.0;
  std::vector<char> left_done(static_cast<std::size_t>(n) + 1, 0);
  std::vector<char> right_done(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    left_done[static_cast<std::size_t>(i)] = 1;
    int feasible = 0;
    for (int j : g.neighbors(i)) {
      if (right_done[static_cast<std::size_t>(j)]) continue;
      right_done[static_cast<std::size_t>(j)] = 1;
      if (has_perfect_matching(g, &left_done, &right_done)) ++feasible;
      right_done[static_cast<std::size_t>(j)] = 0;
    }
    right_done[static_cast<std::size_t>(pi[static_cast<std::size_t>(i - 1)])] = 1;
    log_mu -= std::log(static_cast<double>(feasible));
  }
  return log_mu;
}

// Probability that the uniform band sampler assigns to a given matching, by
// replaying its trajectory through the state machine.
inline double log_mu_sequence(const BandSpec& spec, const Permutation& pi) {
  StateSpace ss(spec.s, spec.t);
  SequencePath path = encode_permutation(pi, spec);
  double log_mu = 0.0;
  for (int k = 0; k < spec.n; ++k) {
    int x = ss.index_of(path.states[static_cast<std::size_t>(k)]);
    MoveSet ms = legal_moves_at(ss, x, k, spec.n);
    log_mu -= std::log(static_cast<double>(ms.count));
  }
  return log_mu;
}

// Importance-sampling estimate of log |F| from per-sample log weights
// log(1/mu): log_estimate = LSE(weights) - log N, with a 32-block jackknife
// standard error and the effective sample size (sum w)^2 / sum w^2.
struct ISEstimate {
  double log_estimate = kNegInf;
  std::uint64_t n_samples = 0;
  double stderr_log = 0.0;
  double ess = 0.0;
};

inline ISEstimate estimate_from_log_weights(const std::vector<double>& lw) {
  const std::uint64_t n = lw.size();
  if (n == 0) throw error("estimator requires at least one sample");
  ISEstimate out;
  out.n_samples = n;
  double lse_all = log_sum_exp(lw);
  out.log_estimate = lse_all - std::log(static_cast<double>(n));
  std::vector<double> doubled(lw.size());
  for (std::size_t i = 0; i < lw.size(); ++i) doubled[i] = 2.0 * lw[i];
  out.ess = std::exp(2.0 * lse_all - log_sum_exp(doubled));
  if (n == 1) {
    out.stderr_log = kPosInf;  // degenerate: no spread information
    return out;
  }
  // Delete-block jackknife over B contiguous blocks (B = 32, or N when
  // smaller); the remainder folds into the last block.
  const std::uint64_t b_count = n < 32 ? n : 32;
  const std::uint64_t base = n / b_count;
  std::vector<double> block_lse(b_count);
  std::vector<std::uint64_t> block_size(b_count);
  for (std::uint64_t b = 0; b < b_count; ++b) {
    std::uint64_t lo = b * base;
    std::uint64_t hi = (b == b_count - 1) ? n : lo + base;
    block_size[b] = hi - lo;
    block_lse[b] = detail::lse_range(lw.data() + lo, hi - lo);
  }
  std::vector<double> others;
  others.reserve(b_count - 1);
  std::vector<double> theta_del(b_count);
  double theta_bar = 0.0;
  for (std::uint64_t b = 0; b < b_count; ++b) {
    others.clear();
    for (std::uint64_t c = 0; c < b_count; ++c) {
      if (c != b) others.push_back(block_lse[c]);
    }
    theta_del[b] = log_sum_exp(others) -
                   std::log(static_cast<double>(n - block_size[b]));
    theta_bar += theta_del[b];
  }
  theta_bar /= static_cast<double>(b_count);
  double ssq = 0.0;
  for (double th : theta_del) ssq += (th - theta_bar) * (th - theta_bar);
  double bf = static_cast<double>(b_count);
  out.stderr_log = std::sqrt((bf - 1.0) / bf * ssq);
  return out;
}

enum class SamplerKind { kUniform, kSequence, kWeightedT1, kLimiting };

inline const char* sampler_name(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kUniform: return "uniform";
    case SamplerKind::kSequence: return "sequence";
    case SamplerKind::kWeightedT1: return "weighted-t1";
    case SamplerKind::kLimiting: return "limiting";
  }
  return "?";
}

// Estimates log |F_{n,s,t}| with n_samples independent draws of the chosen
// sampler. Sample i uses RNG stream (seed, i), so results are identical for
// every worker count. For band specs the uniform kind coincides with the
// sequence sampler (same choice sets) and runs on the fast state machine.
inline ISEstimate estimate_count(const BandSpec& spec, SamplerKind kind,
                                 std::uint64_t n_samples, std::uint64_t seed,
                                 int workers = 1) {
  spec.validate();
  if (n_samples < 1) throw error("estimate_count requires n_samples >= 1");
  BandSampler sampler = [&]() {
    switch (kind) {
      case SamplerKind::kWeightedT1:
        return BandSampler::weighted_t1(spec, solve_opt_probs(spec.s));
      case SamplerKind::kLimiting:
        return BandSampler::limiting(spec, limiting_kernel(spec.s, spec.t));
      case SamplerKind::kUniform:
      case SamplerKind::kSequence:
      default:
        return BandSampler::uniform(spec);
    }
  }();
  std::vector<double> lw(n_samples);
  parallel_for(n_samples, workers, [&](std::uint64_t i) {
    CounterRng rng = CounterRng::stream(seed, i);
    lw[i] = -sampler.sample(rng).log_mu;
  });
  return estimate_from_log_weights(lw);
}

// General-graph estimate with the Algorithm-1 uniform sampler.
inline ISEstimate estimate_count_graph(const BipartiteGraph& g,
                                       std::uint64_t n_samples, std::uint64_t seed,
                                       int workers = 1) {
  if (n_samples < 1) throw error("estimate_count requires n_samples >= 1");
  if (!has_perfect_matching(g)) {
    throw error("graph has no perfect matching");
  }
  std::vector<double> lw(n_samples);
  parallel_for(n_samples, workers, [&](std::uint64_t i) {
    CounterRng rng = CounterRng::stream(seed, i);
    lw[i] = -sis_uniform(g, rng).log_mu;
  });
  return estimate_from_log_weights(lw);
}

// Predicted log sample size for the ideal proposal to reach unit relative
// error: log N_conv = E_nu[log rho] + sqrt(Var_nu[log rho]).
struct RequiredSamples {
  BandSpec spec;
  double e_log_rho = 0.0;
  double sd_log_rho = 0.0;
  double log_n_conv = 0.0;
};

inline RequiredSamples required_samples(const BandSpec& spec) {
  MomentReport mr = moment_report(spec);
  RequiredSamples out;
  out.spec = spec;
  out.e_log_rho = mr.e_log_rho;
  out.sd_log_rho = std::sqrt(mr.var_log_rho);
  out.log_n_conv = out.e_log_rho + out.sd_log_rho;
  return out;
}

}  // namespace bandsis
