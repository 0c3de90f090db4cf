#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <vector>

#include "bandsis/chain.hpp"
#include "bandsis/common.hpp"

namespace bandsis {

// Maximal correlation of a bivariate distribution given as a joint-probability
// matrix (rows: first variable, columns: second). Equals the second singular
// value of D_r^{-1/2} J D_c^{-1/2}; the first singular value is always 1.
// Rows/columns with zero mass must be removed by the caller.
inline double correlation_from_joint(const Eigen::MatrixXd& joint) {
  const Eigen::Index r = joint.rows(), c = joint.cols();
  if (r < 1 || c < 1) throw error("correlation_from_joint requires a nonempty matrix");
  Eigen::VectorXd row_mass = joint.rowwise().sum();
  Eigen::VectorXd col_mass = joint.colwise().sum();
  for (Eigen::Index i = 0; i < r; ++i) {
    if (row_mass(i) <= 0.0) throw error("correlation_from_joint: zero-mass row");
  }
  for (Eigen::Index j = 0; j < c; ++j) {
    if (col_mass(j) <= 0.0) throw error("correlation_from_joint: zero-mass column");
  }
  if (r == 1 || c == 1) return 0.0;  // a point mass on either side: no correlation
  Eigen::MatrixXd normalized = joint;
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      normalized(i, j) /= std::sqrt(row_mass(i) * col_mass(j));
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(normalized);
  return svd.singularValues()(1);
}

// Step-by-step chain correlations: rho[k] is the maximal correlation between
// X_k and X_{k+1} under the joint law pi_k(x) K_k(x, y). The uniform-sampler
// CLT argument needs every rho[k] < 1 and the gap 1 - max rho bounded away
// from zero; epsilon_kernel (the smallest positive kernel entry away from the
// endgame) is the quantity driving the coupling bound.
struct CorrelationReport {
  BandSpec spec;
  std::vector<double> rho;  // one entry per step k = 0..n-1
  double max_rho = 0.0;
  double min_gap = 1.0;          // 1 - max_rho
  double epsilon_kernel = 1.0;   // min positive entry over steps k+1 <= n-(s+t)
};

inline CorrelationReport max_correlation(const Chain& chain) {
  const StateSpace& ss = chain.states();
  const int m = ss.size();
  const int n = chain.spec().n;
  CorrelationReport out;
  out.spec = chain.spec();
  out.rho.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const auto& cur = chain.marginal(k);
    const auto& nxt = chain.marginal(k + 1);
    std::vector<int> live_rows, live_cols;
    std::vector<int> col_pos(static_cast<std::size_t>(m), -1);
    for (int x = 0; x < m; ++x) {
      if (cur[static_cast<std::size_t>(x)] > 0.0) live_rows.push_back(x);
    }
    for (int y = 0; y < m; ++y) {
      if (nxt[static_cast<std::size_t>(y)] > 0.0) {
        col_pos[static_cast<std::size_t>(y)] = static_cast<int>(live_cols.size());
        live_cols.push_back(y);
      }
    }
    Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(live_rows.size()),
        static_cast<Eigen::Index>(live_cols.size()));
    for (std::size_t a = 0; a < live_rows.size(); ++a) {
      int x = live_rows[a];
      double mass = cur[static_cast<std::size_t>(x)];
      for (const KernelEntry& e : chain.row(k, x)) {
        joint(static_cast<Eigen::Index>(a),
              static_cast<Eigen::Index>(col_pos[static_cast<std::size_t>(e.target)])) +=
            mass * e.p;
      }
    }
    out.rho.push_back(correlation_from_joint(joint));
  }
  out.max_rho = 0.0;
  for (double r : out.rho) out.max_rho = std::max(out.max_rho, r);
  out.min_gap = 1.0 - out.max_rho;
  // Kernel floor away from the endgame: steps with left vertex
  // i = k+1 <= n - (s+t). If the problem is too short, use all steps.
  int k_hi = n - (chain.spec().s + chain.spec().t) - 1;
  if (k_hi < 0) k_hi = n - 1;
  double eps = 1.0;
  for (int k = 0; k <= k_hi; ++k) {
    const auto& cur = chain.marginal(k);
    for (int x = 0; x < m; ++x) {
      if (cur[static_cast<std::size_t>(x)] <= 0.0) continue;
      for (const KernelEntry& e : chain.row(k, x)) {
        if (e.p > 0.0) eps = std::min(eps, e.p);
      }
    }
  }
  out.epsilon_kernel = eps;
  return out;
}

inline CorrelationReport max_correlation(const BandSpec& spec) {
  return max_correlation(Chain(spec));
}

}  // namespace bandsis
