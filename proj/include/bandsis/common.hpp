#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bandsis {

// Base error type for all computational failures (infeasible inputs, size
// limits, convergence failures). CLI maps these to exit code 1.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// Raised when a text input (graph file) is malformed; carries line/column.
class parse_error : public error {
 public:
  parse_error(const std::string& what_arg, int line, int column)
      : error("parse error at line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + what_arg),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// A permutation of {1..n} in one-line notation. API values are 1-based to
// match the mathematical convention: pi[i-1] is the image of i.
using Permutation = std::vector<int>;

// Band specification: the bipartite graph on [n] x [n'] with an edge (i, j)
// iff -s <= j - i <= t. Perfect matchings of this graph are exactly the
// permutations with -s <= pi(i) - i <= t for all i.
struct BandSpec {
  int s = 1;  // band width below the diagonal (s >= 1)
  int t = 1;  // band width above the diagonal (t >= 1)
  int n = 1;  // side length (n >= 1)

  void validate() const {
    if (s < 1 || t < 1 || n < 1) {
      throw error("BandSpec requires s >= 1, t >= 1, n >= 1 (got s=" +
                  std::to_string(s) + ", t=" + std::to_string(t) +
                  ", n=" + std::to_string(n) + ")");
    }
  }
};

}  // namespace bandsis
