#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "bandsis/common.hpp"

namespace bandsis {

// Maximum supported band width above the diagonal for state-space machinery.
// The state space has binomial(s+t, t) elements, so small t keeps it compact.
inline constexpr int kMaxStateT = 8;

// A window state: a strictly increasing tuple of t offsets in [-s, t-1].
// Entry y_j is the offset (relative to the current left vertex) of an
// unmatched right vertex in the sliding window; offsets beyond the right end
// of the problem appear as padding values t-1, t-2, ... so every state has
// exactly t entries.
struct StateTuple {
  std::array<std::int16_t, kMaxStateT> v{};  // first `len` entries valid
  std::int8_t len = 0;

  int size() const { return len; }
  int entry(int k) const { return v[static_cast<std::size_t>(k)]; }  // 0-based

  bool contains(int value) const {
    for (int k = 0; k < len; ++k) {
      if (v[static_cast<std::size_t>(k)] == value) return true;
    }
    return false;
  }

  friend auto operator<=>(const StateTuple&, const StateTuple&) = default;

  std::string to_string() const {
    std::string out = "(";
    for (int k = 0; k < len; ++k) {
      if (k > 0) out += ",";
      out += std::to_string(v[static_cast<std::size_t>(k)]);
    }
    out += ")";
    return out;
  }
};

// The start (and end) state x0 = (0, 1, ..., t-1).
inline StateTuple start_state(int t) {
  if (t < 1 || t > kMaxStateT) {
    throw error("state tuples support 1 <= t <= " + std::to_string(kMaxStateT));
  }
  StateTuple x;
  x.len = static_cast<std::int8_t>(t);
  for (int k = 0; k < t; ++k) x.v[static_cast<std::size_t>(k)] = static_cast<std::int16_t>(k);
  return x;
}

namespace detail {
inline void check_tuple(const StateTuple& x, int s, int t) {
  if (x.size() != t) {
    throw error("state tuple must have exactly t=" + std::to_string(t) +
                " entries, got " + x.to_string());
  }
  for (int k = 0; k < t; ++k) {
    int e = x.entry(k);
    if (e < -s || e > t - 1) {
      throw error("state tuple entry out of [-s, t-1]: " + x.to_string());
    }
    if (k > 0 && x.entry(k - 1) >= e) {
      throw error("state tuple entries must be strictly increasing: " + x.to_string());
    }
  }
}
}  // namespace detail

// Whether the state is forced: -s in x means the window's oldest vertex must
// be matched now (by the T_1 move) or it can never be matched at all.
inline bool is_forced(const StateTuple& x, int s) { return x.contains(-s); }

// Structural transition T_j applied to x:
//   T_0(y) = y - 1 componentwise (slide the window, matching offset t);
//   T_j(y), j >= 1: drop entry y_j, decrement the rest, append t-1
//                   (match offset y_j, slide the window).
// From a forced state only j = 1 is legal; T_0 from a forced state would push
// the oldest offset below -s. Violations raise an illegal-transition error.
inline StateTuple transition(const StateTuple& x, int j, int s, int t) {
  detail::check_tuple(x, s, t);
  if (j < 0 || j > t) {
    throw error("illegal transition: move index " + std::to_string(j) +
                " outside [0, " + std::to_string(t) + "]");
  }
  bool forced = is_forced(x, s);
  if (forced && j != 1) {
    throw error("illegal transition: state " + x.to_string() +
                " is forced, only the T_1 move is legal");
  }
  StateTuple y;
  y.len = static_cast<std::int8_t>(t);
  if (j == 0) {
    for (int k = 0; k < t; ++k) {
      y.v[static_cast<std::size_t>(k)] = static_cast<std::int16_t>(x.entry(k) - 1);
    }
  } else {
    int w = 0;
    for (int k = 0; k < t; ++k) {
      if (k == j - 1) continue;  // drop entry y_j (1-based index j)
      y.v[static_cast<std::size_t>(w++)] = static_cast<std::int16_t>(x.entry(k) - 1);
    }
    y.v[static_cast<std::size_t>(w)] = static_cast<std::int16_t>(t - 1);
  }
  return y;
}

// Offset of the right vertex matched by move j out of state x: T_0 matches
// the newest window vertex (offset t); T_j matches the stored entry y_j.
inline int move_offset(const StateTuple& x, int j, int t) {
  if (j == 0) return t;
  return x.entry(j - 1);
}

// The full state space X_{s,t}: all binomial(s+t, t) strictly increasing
// t-tuples over [-s, t-1], indexed in ascending lexicographic order.
class StateSpace {
 public:
  StateSpace(int s, int t) : s_(s), t_(t) {
    if (s < 1 || t < 1) throw error("state space requires s >= 1, t >= 1");
    if (t > kMaxStateT) {
      throw error("state space supports t <= " + std::to_string(kMaxStateT));
    }
    double size_estimate = 1.0;
    for (int k = 1; k <= t; ++k) {
      size_estimate *= static_cast<double>(s + k) / static_cast<double>(k);
    }
    if (size_estimate > 2e6) throw error("state space too large (> 2e6 states)");
    StateTuple cur;
    cur.len = static_cast<std::int8_t>(t);
    enumerate(cur, 0, -s);
    targets_.assign(states_.size(), {});
    forced_.assign(states_.size(), 0);
    for (std::size_t idx = 0; idx < states_.size(); ++idx) {
      const StateTuple& x = states_[idx];
      forced_[idx] = is_forced(x, s_) ? 1 : 0;
      for (int j = 0; j <= t_; ++j) {
        bool legal = forced_[idx] ? (j == 1) : true;
        targets_[idx][static_cast<std::size_t>(j)] =
            legal ? index_of(transition(x, j, s_, t_)) : -1;
      }
    }
  }

  int s() const { return s_; }
  int t() const { return t_; }
  int size() const { return static_cast<int>(states_.size()); }
  const StateTuple& state(int idx) const { return states_[static_cast<std::size_t>(idx)]; }

  // Index of x in lexicographic order; -1 if x is not a valid state.
  int index_of(const StateTuple& x) const {
    auto it = std::lower_bound(states_.begin(), states_.end(), x);
    if (it == states_.end() || !(*it == x)) return -1;
    return static_cast<int>(it - states_.begin());
  }

  int start_index() const { return index_of(start_state(t_)); }
  bool forced(int idx) const { return forced_[static_cast<std::size_t>(idx)] != 0; }

  // Index of T_j(state(idx)), or -1 when the move is structurally illegal.
  int target(int idx, int j) const {
    return targets_[static_cast<std::size_t>(idx)][static_cast<std::size_t>(j)];
  }

  // Offset matched by move j out of state(idx).
  int offset_of_move(int idx, int j) const {
    return move_offset(states_[static_cast<std::size_t>(idx)], j, t_);
  }

 private:
  void enumerate(StateTuple& cur, int pos, int min_value) {
    if (pos == t_) {
      states_.push_back(cur);
      return;
    }
    // entry at position pos is at most pos: t-1-pos strictly larger entries
    // must still fit below t-1
    for (int v = min_value; v <= pos; ++v) {
      cur.v[static_cast<std::size_t>(pos)] = static_cast<std::int16_t>(v);
      enumerate(cur, pos + 1, v + 1);
    }
  }

  int s_;
  int t_;
  std::vector<StateTuple> states_;
  std::vector<std::array<int, kMaxStateT + 1>> targets_;
  std::vector<char> forced_;
};

// Directed adjacency matrix H over the state space: H[x][y] = 1 iff some
// structurally legal move takes x to y (forced states have a single T_1 edge,
// free states t+1 edges — one per move, all targets distinct).
inline std::vector<std::vector<int>> state_graph(const StateSpace& ss) {
  int m = ss.size();
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(m),
                                    std::vector<int>(static_cast<std::size_t>(m), 0));
  for (int x = 0; x < m; ++x) {
    for (int j = 0; j <= ss.t(); ++j) {
      int y = ss.target(x, j);
      if (y >= 0) adj[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = 1;
    }
  }
  return adj;
}

// A trajectory x_0, ..., x_n through the state space. Valid paths start and
// end at x0, move by transitions respecting the forced rule, and keep every
// matched vertex label inside [1, n].
struct SequencePath {
  int s = 1;
  int t = 1;
  std::vector<StateTuple> states;

  int n() const { return static_cast<int>(states.size()) - 1; }
};

// Number of forced states along the path (states containing -s). The start
// and end states never contain -s, so this equals the number of forced steps.
inline int theta(const SequencePath& path) {
  int count = 0;
  for (const StateTuple& x : path.states) {
    if (x.contains(-path.s)) ++count;
  }
  return count;
}

// Encodes a band permutation as its window-state trajectory. For each left
// vertex i, the state x_{i-1} records the offsets of unmatched right vertices
// in the window [i-s, i+t], with offset t dropped (the newest vertex) and
// out-of-range labels > n appearing as padding t-1, t-2, ...; the final state
// x_n is x0. Inputs that are not band permutations raise a band-violation
// error.
inline SequencePath encode_permutation(const Permutation& pi, const BandSpec& spec) {
  spec.validate();
  const int n = spec.n, s = spec.s, t = spec.t;
  if (t > kMaxStateT) {
    throw error("encode_permutation supports t <= " + std::to_string(kMaxStateT));
  }
  if (static_cast<int>(pi.size()) != n) {
    throw error("band violation: permutation length " + std::to_string(pi.size()) +
                " does not match n=" + std::to_string(n));
  }
  std::vector<char> image_seen(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    int j = pi[static_cast<std::size_t>(i - 1)];
    if (j < 1 || j > n || image_seen[static_cast<std::size_t>(j)]) {
      throw error("band violation: input is not a permutation of {1..n}");
    }
    image_seen[static_cast<std::size_t>(j)] = 1;
    if (j - i < -s || j - i > t) {
      throw error("band violation: pi(" + std::to_string(i) + ") = " +
                  std::to_string(j) + " lies outside the band [-s, t]");
    }
  }

  SequencePath path;
  path.s = s;
  path.t = t;
  path.states.reserve(static_cast<std::size_t>(n) + 1);
  std::vector<char> matched(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    StateTuple x;
    x.len = static_cast<std::int8_t>(t);
    int w = 0;
    for (int v = std::max(1, i - s); v <= std::min(n, i + t); ++v) {
      if (matched[static_cast<std::size_t>(v)]) continue;
      int offset = v - i;
      if (offset == t) continue;  // the newest window vertex is implicit
      x.v[static_cast<std::size_t>(w++)] = static_cast<std::int16_t>(offset);
    }
    for (int pad = n - i + 1; pad <= t - 1; ++pad) {
      // labels beyond n enter the window as padding offsets
      x.v[static_cast<std::size_t>(w++)] = static_cast<std::int16_t>(pad);
    }
    if (w != t) {
      throw error("band violation: permutation admits no window encoding");
    }
    path.states.push_back(x);
    matched[static_cast<std::size_t>(pi[static_cast<std::size_t>(i - 1)])] = 1;
  }
  path.states.push_back(start_state(t));
  return path;
}

// Decodes a state trajectory back to the band permutation it encodes.
// Checks, in order: the path has n+1 states starting and ending at x0; each
// consecutive pair is related by a structurally legal move respecting the
// forced rule; and each matched label i + offset stays in [1, n] (the endgame
// constraint). Any violation raises a not-in-image error.
inline Permutation decode_sequence(const SequencePath& path, const BandSpec& spec) {
  spec.validate();
  const int n = spec.n, s = spec.s, t = spec.t;
  if (path.s != s || path.t != t) {
    throw error("not in image: path band parameters (s=" + std::to_string(path.s) +
                ", t=" + std::to_string(path.t) + ") do not match the requested band");
  }
  if (path.n() != n) {
    throw error("not in image: path has " + std::to_string(path.states.size()) +
                " states, expected n+1 = " + std::to_string(n + 1));
  }
  const StateTuple x0 = start_state(t);
  if (!(path.states.front() == x0)) {
    throw error("not in image: path must start at x0 = " + x0.to_string());
  }
  if (!(path.states.back() == x0)) {
    throw error("not in image: path must end at x0 = " + x0.to_string() +
                " (endgame constraint)");
  }
  Permutation pi(static_cast<std::size_t>(n), 0);
  std::vector<char> image_seen(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    const StateTuple& x = path.states[static_cast<std::size_t>(i - 1)];
    const StateTuple& y = path.states[static_cast<std::size_t>(i)];
    detail::check_tuple(x, s, t);
    bool forced = is_forced(x, s);
    int move = -1;
    for (int j = forced ? 1 : 0; j <= (forced ? 1 : t); ++j) {
      if (transition(x, j, s, t) == y) {
        move = j;
        break;
      }
    }
    if (move < 0) {
      throw error("not in image: step " + std::to_string(i) + " from " +
                  x.to_string() + " to " + y.to_string() +
                  " is not a legal transition");
    }
    int label = i + move_offset(x, move, t);
    if (label < 1 || label > n) {
      throw error("not in image: step " + std::to_string(i) + " matches label " +
                  std::to_string(label) + " outside [1, n] (endgame constraint)");
    }
    if (image_seen[static_cast<std::size_t>(label)]) {
      throw error("not in image: label " + std::to_string(label) +
                  " matched twice");
    }
    image_seen[static_cast<std::size_t>(label)] = 1;
    pi[static_cast<std::size_t>(i - 1)] = label;
  }
  return pi;
}

}  // namespace bandsis
