#pragma once

// Dense two-phase tableau simplex with Bland's rule for tiny LPs in
// standard form:  min c^T x  s.t.  A x = b,  x >= 0.

#include <vector>

#include <Eigen/Dense>

namespace ibl::lp {

enum class Status { optimal, infeasible, unbounded };

struct Result {
  Status status = Status::infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  std::vector<int> basis;  // basic column per row
  /// True when some nonbasic column has a zero reduced cost at the optimum,
  /// i.e. the optimal vertex may not be the only optimum.
  bool alternative_optima = false;
};

struct Options {
  double pivot_tol = 1e-11;
  double feas_tol = 1e-9;
  double reduced_cost_tol = 1e-10;
};

/// Rows with negative b are negated internally. After termination the basic
/// solution is recomputed from the final basis with an LU solve.
Result solve_standard_form(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& c, const Options& opts = {});

}  // namespace ibl::lp
