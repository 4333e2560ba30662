#include "ibl/simplex.hpp"

#include <cmath>
#include <limits>

#include "ibl/error.hpp"

namespace ibl::lp {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Tableau layout: rows 0..m-1 are constraints with the rhs in the last
// column; row m holds reduced costs (objective row), with -z in the rhs slot.
struct Tableau {
  MatrixXd t;
  std::vector<int> basis;
  Index m;
  Index cols;  // number of structural + artificial columns

  void pivot(Index row, Index col) {
    t.row(row) /= t(row, col);
    for (Index r = 0; r < t.rows(); ++r) {
      if (r != row && t(r, col) != 0.0) t.row(r) -= t(r, col) * t.row(row);
    }
    basis[static_cast<std::size_t>(row)] = static_cast<int>(col);
  }

  // Bland's rule: entering = lowest index with negative reduced cost,
  // leaving = min ratio with ties broken by lowest basic index.
  Status iterate(Index allowed_cols, const Options& opts) {
    const Index rhs = t.cols() - 1;
    for (std::size_t guard = 0; guard < 1'000'000; ++guard) {
      Index enter = -1;
      for (Index j = 0; j < allowed_cols; ++j) {
        if (t(m, j) < -opts.reduced_cost_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::optimal;
      Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index r = 0; r < m; ++r) {
        if (t(r, enter) > opts.pivot_tol) {
          const double ratio = t(r, rhs) / t(r, enter);
          if (ratio < best - 1e-15 ||
              (std::abs(ratio - best) <= 1e-15 && leave >= 0 &&
               basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return Status::unbounded;
      pivot(leave, enter);
    }
    throw NumericError("simplex: iteration limit reached");
  }
};

}  // namespace

Result solve_standard_form(const MatrixXd& a_in, const VectorXd& b_in, const VectorXd& c,
                           const Options& opts) {
  const Index m = a_in.rows();
  const Index n = a_in.cols();
  if (b_in.size() != m || c.size() != n) throw ConfigError("simplex: inconsistent dimensions");

  MatrixXd a = a_in;
  VectorXd b = b_in;
  for (Index r = 0; r < m; ++r) {
    if (b[r] < 0.0) {
      a.row(r) *= -1.0;
      b[r] = -b[r];
    }
  }

  // Reuse a slack-like unit column as the initial basic variable of a row
  // when one exists; otherwise add an artificial.
  std::vector<int> basis(static_cast<std::size_t>(m), -1);
  for (Index j = 0; j < n; ++j) {
    Index unit_row = -1;
    bool is_unit = true;
    for (Index r = 0; r < m && is_unit; ++r) {
      const double v = a(r, j);
      if (v == 1.0 && unit_row < 0) {
        unit_row = r;
      } else if (v != 0.0) {
        is_unit = false;
      }
    }
    if (is_unit && unit_row >= 0 && basis[static_cast<std::size_t>(unit_row)] < 0) {
      basis[static_cast<std::size_t>(unit_row)] = static_cast<int>(j);
    }
  }
  Index n_art = 0;
  for (int bcol : basis) n_art += (bcol < 0);

  Tableau tab;
  tab.m = m;
  tab.cols = n + n_art;
  tab.t = MatrixXd::Zero(m + 1, tab.cols + 1);
  tab.t.topLeftCorner(m, n) = a;
  tab.t.topRightCorner(m, 1) = b;
  {
    Index next_art = n;
    for (Index r = 0; r < m; ++r) {
      if (basis[static_cast<std::size_t>(r)] < 0) {
        tab.t(r, next_art) = 1.0;
        basis[static_cast<std::size_t>(r)] = static_cast<int>(next_art++);
      }
    }
  }
  tab.basis = basis;

  Result out;

  // Phase 1: minimise the sum of artificials.
  if (n_art > 0) {
    tab.t.row(m).setZero();
    for (Index j = n; j < tab.cols; ++j) tab.t(m, j) = 1.0;
    for (Index r = 0; r < m; ++r) {
      if (tab.basis[static_cast<std::size_t>(r)] >= n) tab.t.row(m) -= tab.t.row(r);
    }
    tab.iterate(tab.cols, opts);
    if (-tab.t(m, tab.cols) > opts.feas_tol * (1.0 + b.lpNorm<Eigen::Infinity>())) {
      out.status = Status::infeasible;
      return out;
    }
    // Drive remaining (zero-level) artificials out of the basis.
    for (Index r = 0; r < m; ++r) {
      if (tab.basis[static_cast<std::size_t>(r)] < n) continue;
      for (Index j = 0; j < n; ++j) {
        if (std::abs(tab.t(r, j)) > opts.pivot_tol) {
          tab.pivot(r, j);
          break;
        }
      }
    }
  }

  // Phase 2 on structural columns only; redundant rows keep an artificial
  // at zero level, which never re-enters.
  tab.t.row(m).setZero();
  tab.t.row(m).head(n) = c.transpose();
  for (Index r = 0; r < m; ++r) {
    const int bc = tab.basis[static_cast<std::size_t>(r)];
    if (bc < n && c[bc] != 0.0) tab.t.row(m) -= c[bc] * tab.t.row(r);
  }
  const Status st = tab.iterate(n, opts);
  if (st == Status::unbounded) {
    out.status = Status::unbounded;
    return out;
  }

  // Recompute the basic solution from the original data for accuracy.
  std::vector<Index> cols, rows;
  for (Index r = 0; r < m; ++r) {
    const int bc = tab.basis[static_cast<std::size_t>(r)];
    if (bc < n) cols.push_back(bc);
  }
  VectorXd x = VectorXd::Zero(n);
  if (!cols.empty()) {
    MatrixXd bmat(m, static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) bmat.col(static_cast<Index>(k)) = a.col(cols[k]);
    const VectorXd xb = bmat.colPivHouseholderQr().solve(b);
    for (std::size_t k = 0; k < cols.size(); ++k) x[cols[k]] = xb[static_cast<Index>(k)];
  }
  for (Index j = 0; j < n; ++j) {
    if (x[j] < 0.0 && x[j] > -opts.feas_tol) x[j] = 0.0;
  }

  out.status = Status::optimal;
  out.x = x;
  out.objective = c.dot(x);
  out.basis = tab.basis;
  for (Index j = 0; j < n; ++j) {
    bool basic = false;
    for (int bc : tab.basis) basic = basic || (bc == j);
    if (!basic && std::abs(tab.t(m, j)) <= opts.reduced_cost_tol) {
      out.alternative_optima = true;
      break;
    }
  }
  return out;
}

}  // namespace ibl::lp
