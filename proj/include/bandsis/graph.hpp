#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "bandsis/common.hpp"

namespace bandsis {

// Exact integer type for counts (GMP).
using BigInt = mpz_class;

// Balanced bipartite graph on left vertices {1..n} and right vertices
// {1'..n'}, stored as dense bitset adjacency rows. API vertices are 1-based.
class BipartiteGraph {
 public:
  explicit BipartiteGraph(int n)
      : n_(n),
        words_((n + 63) / 64),
        rows_(static_cast<std::size_t>(n) * static_cast<std::size_t>((n + 63) / 64), 0) {
    if (n < 1) throw error("bipartite graph requires n >= 1");
  }

  int n() const { return n_; }

  void add_edge(int i, int j) {
    check_vertex(i, j);
    rows_[word_index(i - 1, j - 1)] |= bit(j - 1);
  }

  bool has_edge(int i, int j) const {
    check_vertex(i, j);
    return (rows_[word_index(i - 1, j - 1)] & bit(j - 1)) != 0;
  }

  int degree(int i) const {
    check_vertex(i, 1);
    int d = 0;
    for (int w = 0; w < words_; ++w) {
      d += std::popcount(rows_[static_cast<std::size_t>(i - 1) * words_ + w]);
    }
    return d;
  }

  // Right neighbors of left vertex i, ascending.
  std::vector<int> neighbors(int i) const {
    check_vertex(i, 1);
    std::vector<int> out;
    for (int w = 0; w < words_; ++w) {
      std::uint64_t bits = rows_[static_cast<std::size_t>(i - 1) * words_ + w];
      while (bits) {
        int b = std::countr_zero(bits);
        out.push_back(w * 64 + b + 1);
        bits &= bits - 1;
      }
    }
    return out;
  }

  std::size_t edge_count() const {
    std::size_t e = 0;
    for (std::uint64_t w : rows_) e += static_cast<std::size_t>(std::popcount(w));
    return e;
  }

  bool operator==(const BipartiteGraph& other) const {
    return n_ == other.n_ && rows_ == other.rows_;
  }

  // Reads the adjacency-matrix text format:
  //   line 1: "n n"
  //   lines 2..n+1: n characters from {0,1}, row i listing edges of vertex i.
  // Malformed input raises parse_error with 1-based line/column coordinates.
  static BipartiteGraph parse(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) {
      throw parse_error("missing header line \"n n\"", 1, 1);
    }
    long rows = 0, cols = 0;
    {
      std::size_t pos = 0;
      auto read_int = [&](long& out) {
        while (pos < header.size() && header[pos] == ' ') ++pos;
        std::size_t start = pos;
        while (pos < header.size() && header[pos] >= '0' && header[pos] <= '9') ++pos;
        if (pos == start) {
          throw parse_error("expected a positive integer", 1,
                            static_cast<int>(start) + 1);
        }
        out = std::stol(header.substr(start, pos - start));
      };
      read_int(rows);
      read_int(cols);
      while (pos < header.size() && (header[pos] == ' ' || header[pos] == '\r')) ++pos;
      if (pos != header.size()) {
        throw parse_error("trailing characters after dimensions", 1,
                          static_cast<int>(pos) + 1);
      }
    }
    if (rows != cols) {
      throw parse_error("graph must be balanced (got " + std::to_string(rows) +
                            " x " + std::to_string(cols) + ")",
                        1, 1);
    }
    if (rows < 1 || rows > 1'000'000) {
      throw parse_error("side length out of range", 1, 1);
    }
    int n = static_cast<int>(rows);
    BipartiteGraph g(n);
    for (int i = 1; i <= n; ++i) {
      std::string line;
      if (!std::getline(in, line)) {
        throw parse_error("expected " + std::to_string(n) + " matrix rows, got " +
                              std::to_string(i - 1),
                          i + 1, 1);
      }
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (static_cast<int>(line.size()) != n) {
        throw parse_error("row must contain exactly " + std::to_string(n) +
                              " characters, got " + std::to_string(line.size()),
                          i + 1, static_cast<int>(line.size()) + 1);
      }
      for (int j = 1; j <= n; ++j) {
        char c = line[static_cast<std::size_t>(j - 1)];
        if (c == '1') {
          g.add_edge(i, j);
        } else if (c != '0') {
          throw parse_error(std::string("expected '0' or '1', got '") + c + "'",
                            i + 1, j);
        }
      }
    }
    return g;
  }

  static BipartiteGraph load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("cannot open graph file: " + path);
    return parse(in);
  }

  void print(std::ostream& out) const {
    out << n_ << ' ' << n_ << '\n';
    for (int i = 1; i <= n_; ++i) {
      for (int j = 1; j <= n_; ++j) out << (has_edge(i, j) ? '1' : '0');
      out << '\n';
    }
  }

 private:
  std::uint64_t bit(int j0) const { return 1ull << (j0 & 63); }
  std::size_t word_index(int i0, int j0) const {
    return static_cast<std::size_t>(i0) * words_ + static_cast<std::size_t>(j0 >> 6);
  }
  void check_vertex(int i, int j) const {
    if (i < 1 || i > n_ || j < 1 || j > n_) {
      throw error("vertex out of range: (" + std::to_string(i) + ", " +
                  std::to_string(j) + ") for n=" + std::to_string(n_));
    }
  }

  int n_;
  int words_;
  std::vector<std::uint64_t> rows_;
};

// The band graph of a (s, t, n) specification: edge (i, j) iff -s <= j-i <= t.
inline BipartiteGraph band_graph(const BandSpec& spec) {
  spec.validate();
  BipartiteGraph g(spec.n);
  for (int i = 1; i <= spec.n; ++i) {
    int lo = std::max(1, i - spec.s);
    int hi = std::min(spec.n, i + spec.t);
    for (int j = lo; j <= hi; ++j) g.add_edge(i, j);
  }
  return g;
}

// True iff pi is a perfect matching of g (a permutation using only edges).
inline bool is_matching_of(const BipartiteGraph& g, const Permutation& pi) {
  if (static_cast<int>(pi.size()) != g.n()) return false;
  std::vector<char> seen(static_cast<std::size_t>(g.n()) + 1, 0);
  for (int i = 1; i <= g.n(); ++i) {
    int j = pi[static_cast<std::size_t>(i - 1)];
    if (j < 1 || j > g.n() || seen[static_cast<std::size_t>(j)]) return false;
    if (!g.has_edge(i, j)) return false;
    seen[static_cast<std::size_t>(j)] = 1;
  }
  return true;
}

namespace detail {

// One phase of Kuhn's augmenting-path algorithm.
inline bool kuhn_augment(const BipartiteGraph& g, int i, std::vector<int>& match_right,
                         std::vector<char>& visited) {
  for (int j : g.neighbors(i)) {
    if (visited[static_cast<std::size_t>(j)]) continue;
    visited[static_cast<std::size_t>(j)] = 1;
    int owner = match_right[static_cast<std::size_t>(j)];
    if (owner == 0 || kuhn_augment(g, owner, match_right, visited)) {
      match_right[static_cast<std::size_t>(j)] = i;
      return true;
    }
  }
  return false;
}

}  // namespace detail

// Whether g admits a perfect matching (Kuhn's augmenting paths, O(V*E)).
// `skip_left` / `skip_right` mark vertices to exclude (0 = keep), used by the
// sequential sampler to test feasibility of partially matched graphs.
inline bool has_perfect_matching(const BipartiteGraph& g,
                                 const std::vector<char>* skip_left = nullptr,
                                 const std::vector<char>* skip_right = nullptr) {
  int n = g.n();
  std::vector<int> match_right(static_cast<std::size_t>(n) + 1, 0);
  if (skip_right != nullptr) {
    for (int j = 1; j <= n; ++j) {
      if ((*skip_right)[static_cast<std::size_t>(j)]) {
        match_right[static_cast<std::size_t>(j)] = -1;  // blocked
      }
    }
  }
  std::vector<char> visited(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    if (skip_left != nullptr && (*skip_left)[static_cast<std::size_t>(i)]) continue;
    std::fill(visited.begin(), visited.end(), 0);
    if (skip_right != nullptr) {
      for (int j = 1; j <= n; ++j) {
        if ((*skip_right)[static_cast<std::size_t>(j)]) {
          visited[static_cast<std::size_t>(j)] = 1;
        }
      }
    }
    if (!detail::kuhn_augment(g, i, match_right, visited)) return false;
  }
  return true;
}

// Exact permanent of the adjacency matrix via Ryser's formula with Gray-code
// subset enumeration:
//   perm(A) = (-1)^n * sum_{S subset of columns, S nonempty}
//             (-1)^{|S|} prod_i (sum_{j in S} a_ij).
// Row sums are updated incrementally (one column flips per step) and the
// product of nonzero row sums is maintained with a zero counter, so each step
// costs O(column degree) big-integer work. Capped at n <= 30 (2^n subsets).
inline BigInt permanent_ryser(const BipartiteGraph& g) {
  int n = g.n();
  if (n > 30) {
    throw error("permanent_ryser supports n <= 30 (got n=" + std::to_string(n) +
                ")");
  }
  // col_rows[j] = bitmask of rows adjacent to column j.
  std::vector<std::uint32_t> col_rows(static_cast<std::size_t>(n), 0);
  for (int i = 1; i <= n; ++i) {
    for (int j : g.neighbors(i)) {
      col_rows[static_cast<std::size_t>(j - 1)] |= 1u << (i - 1);
    }
  }
  std::vector<int> row_sum(static_cast<std::size_t>(n), 0);
  int zero_count = n;
  BigInt product = 1;  // product of nonzero row sums
  BigInt acc = 0;
  const std::uint64_t subsets = 1ull << n;
  for (std::uint64_t k = 1; k < subsets; ++k) {
    // Gray code g(k) = k ^ (k >> 1); the bit changing between consecutive
    // codes is bit ctz(k), and its new value is read off g(k) itself.
    int j = std::countr_zero(k);
    std::uint32_t rows = col_rows[static_cast<std::size_t>(j)];
    bool now_in = ((((k ^ (k >> 1)) >> j) & 1ull) != 0);
    int delta = now_in ? 1 : -1;
    std::uint32_t m = rows;
    while (m) {
      int i = std::countr_zero(m);
      m &= m - 1;
      int& rs = row_sum[static_cast<std::size_t>(i)];
      if (rs > 0) {
        product /= rs;
      } else {
        --zero_count;
      }
      rs += delta;
      if (rs > 0) {
        product *= rs;
      } else {
        ++zero_count;
      }
    }
    if (zero_count == 0) {
      // |S| = popcount of the Gray code of k.
      if (std::popcount(k ^ (k >> 1)) & 1) {
        acc -= product;
      } else {
        acc += product;
      }
    }
  }
  if (n & 1) acc = -acc;
  return acc;
}

// All perfect matchings of g in lexicographic order of the one-line notation.
// Depth-first over left vertices with ascending column choice; n <= 10.
inline std::vector<Permutation> enumerate_matchings(const BipartiteGraph& g) {
  int n = g.n();
  if (n > 10) {
    throw error("enumerate_matchings supports n <= 10 (got n=" +
                std::to_string(n) + ")");
  }
  std::vector<Permutation> out;
  Permutation current(static_cast<std::size_t>(n), 0);
  std::uint32_t used = 0;
  auto dfs = [&](auto&& self, int i) -> void {
    if (i > n) {
      out.push_back(current);
      return;
    }
    for (int j : g.neighbors(i)) {
      std::uint32_t bit = 1u << (j - 1);
      if (used & bit) continue;
      used |= bit;
      current[static_cast<std::size_t>(i - 1)] = j;
      self(self, i + 1);
      used &= ~bit;
    }
  };
  dfs(dfs, 1);
  return out;
}

}  // namespace bandsis
