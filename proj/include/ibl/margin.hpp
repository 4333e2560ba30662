#pragma once

// Max-margin solvers for separable data:
//   * P_Adam(c): min 1/2 w^T M(c) w  s.t.  x_i . w >= 1, with the diagonal
//     preconditioner M(c) = diag(sqrt(sum_j c_j^2 x_j^2)). M = I gives the
//     l2 max-margin SVM.
//   * the l_inf max-margin LP  min |w|_inf  s.t.  x_i . w >= 1.
// Both are built from scratch; no external solver is involved.

#include <cstddef>
#include <vector>

#include "ibl/problem.hpp"

namespace ibl {

/// Point of the probability simplex in R^N.
class SimplexVector {
 public:
  static constexpr double kTolerance = 1e-12;

  /// Throws ConfigError unless c >= 0 and |sum c - 1| <= kTolerance.
  explicit SimplexVector(Vector c);

  static SimplexVector uniform(std::size_t n);
  /// Rescales a nonnegative, nonzero vector onto the simplex.
  static SimplexVector normalized(const Vector& weights);

  const Vector& values() const { return c_; }
  std::size_t size() const { return static_cast<std::size_t>(c_.size()); }
  double operator[](std::size_t i) const { return c_[static_cast<Eigen::Index>(i)]; }

 private:
  Vector c_;
};

/// Diagonal of M(c); throws NumericError if an entry is not positive.
Vector preconditioner_diag(const Dataset& data, const SimplexVector& c);

struct KktResiduals {
  double stationarity = 0.0;  // |M w - X^T lambda|_inf
  double primal_feas = 0.0;   // max(0, max_i 1 - x_i . w)
  double dual_feas = 0.0;     // max(0, max_i -lambda_i)
  double comp_slack = 0.0;    // max_i |lambda_i (x_i . w - 1)|

  double max() const;
};

struct MarginSolution {
  Vector w;
  Vector lambda;
  std::vector<std::size_t> support;
  double objective = 0.0;
  KktResiduals kkt;
  bool licq_violated = false;
  bool non_unique = false;
  std::size_t iterations = 0;
};

struct QpOptions {
  /// Stop once every KKT residual is at most tol * max(1, |lambda|_inf).
  double tol = 1e-12;
  std::size_t max_iter = 1'000'000;
  /// Every this many projected-gradient iterations, the current positive set
  /// is tried as the active set of an exact equality-constrained solve.
  std::size_t polish_every = 25;
};

/// Solves P_Adam(c) through its dual  max_{lambda >= 0} 1^T lambda -
/// 1/2 lambda^T X M^-1 X^T lambda  by projected gradient ascent.
/// Throws InfeasibleError for non-separable data and NumericError if the
/// KKT residual does not reach the tolerance within max_iter iterations.
MarginSolution solve_p_adam(const Dataset& data, const SimplexVector& c, const QpOptions& opts = {});

/// The same solver with an explicit positive diagonal metric.
MarginSolution solve_diag_qp(const Dataset& data, const Vector& metric, const QpOptions& opts = {});

/// l2 max-margin solution (M = I).
MarginSolution solve_l2_margin(const Dataset& data, const QpOptions& opts = {});

/// w / |w|_2.
Vector unit_direction(const Vector& w);

/// KKT residuals of (w, lambda) for P_Adam(c).
KktResiduals kkt_residual(const MarginSolution& sol, const Dataset& data, const SimplexVector& c);
KktResiduals kkt_residual_metric(const Vector& w, const Vector& lambda, const Dataset& data,
                                 const Vector& metric);

/// {i : |x_i . w - 1| <= 1e-6 (1 + |w|_inf)}.
std::vector<std::size_t> support_set(const Vector& w, const Dataset& data);

/// True when the listed points are linearly dependent (rank threshold 1e-8).
bool licq_violated(const Dataset& data, const std::vector<std::size_t>& support);

/// Independent check of P_Adam(c) for N <= 12: enumerates every active set,
/// solves the equality-constrained KKT system for it and keeps the feasible,
/// dual-nonnegative candidate of least objective.
MarginSolution brute_force_qp_oracle(const Dataset& data, const SimplexVector& c);
MarginSolution brute_force_qp_oracle_metric(const Dataset& data, const Vector& metric);

struct LinfMargin {
  Vector w;                // minimiser of |w|_inf subject to x_i . w >= 1
  double gamma_inf = 0.0;  // 1 / |w|_inf
  bool non_unique = false;
};

/// Epigraph LP  min t  s.t.  x_i . w >= 1,  -t <= w_k <= t  by the simplex
/// method. Throws InfeasibleError for non-separable data.
LinfMargin solve_linf_margin(const Dataset& data);

/// Whether some w has x_i . w >= 1 for every i.
bool is_separable(const Dataset& data);

}  // namespace ibl
