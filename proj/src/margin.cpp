#include "ibl/margin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ibl/simplex.hpp"

namespace ibl {

using Eigen::Index;

// ---------------------------------------------------------------------------
// SimplexVector

SimplexVector::SimplexVector(Vector c) : c_(std::move(c)) {
  if (c_.size() == 0) throw ConfigError("simplex vector must be nonempty");
  if (!c_.allFinite() || c_.minCoeff() < 0.0) {
    throw ConfigError("simplex vector entries must be finite and nonnegative");
  }
  if (std::abs(c_.sum() - 1.0) > kTolerance) {
    std::ostringstream msg;
    msg << "simplex vector must sum to 1 (got " << c_.sum() << ")";
    throw ConfigError(msg.str());
  }
}

SimplexVector SimplexVector::uniform(std::size_t n) {
  return SimplexVector(Vector::Constant(static_cast<Index>(n), 1.0 / static_cast<double>(n)));
}

SimplexVector SimplexVector::normalized(const Vector& weights) {
  if (weights.size() == 0 || weights.minCoeff() < 0.0) {
    throw ConfigError("cannot normalize: weights must be nonnegative");
  }
  const double total = weights.sum();
  if (!(total > 0.0)) throw NumericError("cannot normalize an all-zero weight vector");
  Vector c = weights / total;
  // Absorb the rounding of the division into the largest entry.
  Index imax = 0;
  c.maxCoeff(&imax);
  c[imax] += 1.0 - c.sum();
  return SimplexVector(std::move(c));
}

Vector preconditioner_diag(const Dataset& data, const SimplexVector& c) {
  if (c.size() != data.n()) throw ConfigError("simplex vector length must equal N");
  const Vector c2 = c.values().array().square();
  Vector diag = (data.x.array().square().colwise() * c2.array()).colwise().sum().sqrt().transpose();
  for (Index k = 0; k < diag.size(); ++k) {
    if (!(diag[k] > 0.0)) {
      std::ostringstream msg;
      msg << "preconditioner M(c) has a zero diagonal entry at coordinate " << k;
      throw NumericError(msg.str());
    }
  }
  return diag;
}

double KktResiduals::max() const {
  return std::max({stationarity, primal_feas, dual_feas, comp_slack});
}

KktResiduals kkt_residual_metric(const Vector& w, const Vector& lambda, const Dataset& data,
                                 const Vector& metric) {
  require_dim(w, data);
  if (static_cast<std::size_t>(lambda.size()) != data.n()) {
    throw ConfigError("dual vector length must equal N");
  }
  const Vector slack = data.x * w - Vector::Ones(static_cast<Index>(data.n()));
  KktResiduals r;
  r.stationarity = (metric.cwiseProduct(w) - data.x.transpose() * lambda).lpNorm<Eigen::Infinity>();
  r.primal_feas = std::max(0.0, -slack.minCoeff());
  r.dual_feas = std::max(0.0, -lambda.minCoeff());
  r.comp_slack = lambda.cwiseProduct(slack).lpNorm<Eigen::Infinity>();
  return r;
}

KktResiduals kkt_residual(const MarginSolution& sol, const Dataset& data, const SimplexVector& c) {
  return kkt_residual_metric(sol.w, sol.lambda, data, preconditioner_diag(data, c));
}

std::vector<std::size_t> support_set(const Vector& w, const Dataset& data) {
  const Vector z = margins(w, data);
  const double tol = 1e-6 * (1.0 + w.lpNorm<Eigen::Infinity>());
  std::vector<std::size_t> s;
  for (Index i = 0; i < z.size(); ++i) {
    if (std::abs(z[i] - 1.0) <= tol) s.push_back(static_cast<std::size_t>(i));
  }
  return s;
}

bool licq_violated(const Dataset& data, const std::vector<std::size_t>& support) {
  if (support.empty()) return false;
  if (support.size() > data.d()) return true;
  Matrix xs(static_cast<Index>(data.d()), static_cast<Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) xs.col(static_cast<Index>(k)) = data.point(support[k]).transpose();
  Eigen::ColPivHouseholderQR<Matrix> qr(xs);
  qr.setThreshold(1e-8);
  return static_cast<std::size_t>(qr.rank()) < support.size();
}

Vector unit_direction(const Vector& w) {
  const double n = w.norm();
  if (!(n > 0.0)) throw NumericError("cannot normalise a zero vector");
  return w / n;
}

// ---------------------------------------------------------------------------
// Diagonal-metric QP through its dual

namespace {

// Complementary slackness and stationarity carry a factor lambda, so their
// rounding floor grows with the duals.
double kkt_scale(const Vector& lambda) { return std::max(1.0, lambda.lpNorm<Eigen::Infinity>()); }

void finish_solution(MarginSolution& sol, const Dataset& data, const Vector& metric) {
  sol.objective = 0.5 * sol.w.dot(metric.cwiseProduct(sol.w));
  sol.kkt = kkt_residual_metric(sol.w, sol.lambda, data, metric);
  sol.support = support_set(sol.w, data);
  sol.licq_violated = licq_violated(data, sol.support);
  sol.non_unique = sol.licq_violated;
}

}  // namespace

MarginSolution solve_diag_qp(const Dataset& data, const Vector& metric, const QpOptions& opts) {
  if (static_cast<std::size_t>(metric.size()) != data.d() || !(metric.minCoeff() > 0.0)) {
    throw ConfigError("metric must be a positive vector of length d");
  }
  if (!is_separable(data)) {
    throw InfeasibleError("linear-separability assumption violated: no w with x_i . w >= 1 for all i");
  }
  const Index n = static_cast<Index>(data.n());
  const Matrix xs = data.x * metric.cwiseInverse().asDiagonal();  // X M^-1
  const Matrix q = xs * data.x.transpose();
  const double lipschitz = q.cwiseAbs().rowwise().sum().maxCoeff();
  if (!(lipschitz > 0.0)) throw NumericError("dual Hessian is zero");
  const Vector ones = Vector::Ones(n);

  auto primal_of = [&](const Vector& lambda) -> Vector {
    return xs.transpose() * lambda;  // M^-1 X^T lambda
  };

  MarginSolution sol;
  Vector lambda = Vector::Zero(n);
  Vector grad(n);
  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    grad.noalias() = ones - q * lambda;
    lambda = (lambda + grad / lipschitz).cwiseMax(0.0);

    if (it % opts.polish_every != 0 && it != opts.max_iter) continue;

    // Exact solve on the current positive set.
    std::vector<Index> free;
    for (Index i = 0; i < n; ++i) {
      if (lambda[i] > 0.0) free.push_back(i);
    }
    if (!free.empty()) {
      const Index f = static_cast<Index>(free.size());
      Matrix qff(f, f);
      for (Index a = 0; a < f; ++a) {
        for (Index b = 0; b < f; ++b) qff(a, b) = q(free[a], free[b]);
      }
      const Vector mu = qff.completeOrthogonalDecomposition().solve(Vector::Ones(f));
      if (mu.allFinite() && mu.minCoeff() >= -1e-14) {
        Vector cand = Vector::Zero(n);
        for (Index a = 0; a < f; ++a) cand[free[a]] = std::max(0.0, mu[a]);
        const Vector w = primal_of(cand);
        const KktResiduals r = kkt_residual_metric(w, cand, data, metric);
        if (r.max() <= opts.tol * kkt_scale(cand)) {
          sol.w = w;
          sol.lambda = cand;
          sol.iterations = it;
          finish_solution(sol, data, metric);
          return sol;
        }
      }
    }
    const Vector w = primal_of(lambda);
    if (kkt_residual_metric(w, lambda, data, metric).max() <= opts.tol * kkt_scale(lambda)) {
      sol.w = w;
      sol.lambda = lambda;
      sol.iterations = it;
      finish_solution(sol, data, metric);
      return sol;
    }
  }
  std::ostringstream msg;
  msg << "margin QP did not reach KKT tolerance " << opts.tol << " in " << opts.max_iter
      << " iterations";
  throw NumericError(msg.str());
}

MarginSolution solve_p_adam(const Dataset& data, const SimplexVector& c, const QpOptions& opts) {
  return solve_diag_qp(data, preconditioner_diag(data, c), opts);
}

MarginSolution solve_l2_margin(const Dataset& data, const QpOptions& opts) {
  return solve_diag_qp(data, Vector::Ones(static_cast<Index>(data.d())), opts);
}

// ---------------------------------------------------------------------------
// Brute-force active-set enumeration

MarginSolution brute_force_qp_oracle_metric(const Dataset& data, const Vector& metric) {
  const std::size_t n = data.n();
  const Index d = static_cast<Index>(data.d());
  if (n > 12) throw ConfigError("brute_force_qp_oracle: N must be at most 12");
  if (static_cast<Index>(metric.size()) != d || !(metric.minCoeff() > 0.0)) {
    throw ConfigError("metric must be a positive vector of length d");
  }
  constexpr double kFeasTol = 1e-10;

  MarginSolution best;
  double best_obj = std::numeric_limits<double>::infinity();
  // The empty set gives w = 0, which violates every constraint.
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) s.push_back(i);
    }
    const Index k = static_cast<Index>(s.size());
    if (k > d) continue;
    // [ M   -X_S^T ] [w]   [0]
    // [ X_S   0    ] [l] = [1]
    Matrix kkt = Matrix::Zero(d + k, d + k);
    kkt.topLeftCorner(d, d) = metric.asDiagonal();
    for (Index a = 0; a < k; ++a) {
      kkt.block(0, d + a, d, 1) = -data.point(s[static_cast<std::size_t>(a)]).transpose();
      kkt.block(d + a, 0, 1, d) = data.point(s[static_cast<std::size_t>(a)]);
    }
    Vector rhs = Vector::Zero(d + k);
    rhs.tail(k).setOnes();
    Eigen::FullPivLU<Matrix> lu(kkt);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) continue;
    const Vector sol = lu.solve(rhs);
    const Vector w = sol.head(d);
    const Vector ls = sol.tail(k);
    if (ls.minCoeff() < -kFeasTol) continue;
    if ((data.x * w).minCoeff() < 1.0 - kFeasTol) continue;
    const double obj = 0.5 * w.dot(metric.cwiseProduct(w));
    if (obj < best_obj - 1e-14) {
      best_obj = obj;
      best.w = w;
      best.lambda = Vector::Zero(static_cast<Index>(n));
      for (Index a = 0; a < k; ++a) best.lambda[static_cast<Index>(s[static_cast<std::size_t>(a)])] = std::max(0.0, ls[a]);
    }
  }
  if (!std::isfinite(best_obj)) {
    throw InfeasibleError("brute_force_qp_oracle: no active set yields a KKT point");
  }
  finish_solution(best, data, metric);
  return best;
}

MarginSolution brute_force_qp_oracle(const Dataset& data, const SimplexVector& c) {
  return brute_force_qp_oracle_metric(data, preconditioner_diag(data, c));
}

// ---------------------------------------------------------------------------
// l_inf max-margin LP

namespace {

// Standard-form layout: [w+ (d) | w- (d) | t | s (N) | p (d) | q (d)].
struct LinfLp {
  Matrix a;
  Vector b;
  Index d;
  Index n;
  Index t_col() const { return 2 * d; }
};

LinfLp build_linf_lp(const Dataset& data, bool cap_t, double t_cap) {
  LinfLp lp;
  lp.d = static_cast<Index>(data.d());
  lp.n = static_cast<Index>(data.n());
  const Index d = lp.d, n = lp.n;
  const Index cols = 2 * d + 1 + n + 2 * d + (cap_t ? 1 : 0);
  const Index rows = n + 2 * d + (cap_t ? 1 : 0);
  lp.a = Matrix::Zero(rows, cols);
  lp.b = Vector::Zero(rows);
  const Index tc = 2 * d;
  for (Index i = 0; i < n; ++i) {
    lp.a.block(i, 0, 1, d) = data.x.row(i);
    lp.a.block(i, d, 1, d) = -data.x.row(i);
    lp.a(i, 2 * d + 1 + i) = -1.0;
    lp.b[i] = 1.0;
  }
  const Index p0 = 2 * d + 1 + n;
  for (Index k = 0; k < d; ++k) {
    const Index r1 = n + k, r2 = n + d + k;
    lp.a(r1, k) = 1.0;
    lp.a(r1, d + k) = -1.0;
    lp.a(r1, tc) = -1.0;
    lp.a(r1, p0 + k) = 1.0;
    lp.a(r2, k) = -1.0;
    lp.a(r2, d + k) = 1.0;
    lp.a(r2, tc) = -1.0;
    lp.a(r2, p0 + d + k) = 1.0;
  }
  if (cap_t) {
    lp.a(rows - 1, tc) = 1.0;
    lp.a(rows - 1, cols - 1) = 1.0;
    lp.b[rows - 1] = t_cap;
  }
  return lp;
}

Vector extract_w(const LinfLp& lp, const Vector& x) {
  return x.head(lp.d) - x.segment(lp.d, lp.d);
}

}  // namespace

LinfMargin solve_linf_margin(const Dataset& data) {
  const LinfLp lp = build_linf_lp(data, false, 0.0);
  Vector cost = Vector::Zero(lp.a.cols());
  cost[lp.t_col()] = 1.0;
  const lp::Result res = lp::solve_standard_form(lp.a, lp.b, cost);
  if (res.status == lp::Status::infeasible) {
    throw InfeasibleError("linear-separability assumption violated: l_inf margin LP is infeasible");
  }
  if (res.status != lp::Status::optimal) throw NumericError("l_inf margin LP is unbounded");

  LinfMargin out;
  out.w = extract_w(lp, res.x);
  const double t = out.w.lpNorm<Eigen::Infinity>();
  if (!(t > 0.0)) throw NumericError("l_inf margin LP returned w = 0");
  out.gamma_inf = 1.0 / t;

  if (res.alternative_optima) {
    // Probe the optimal face with a fixed generic functional: a face wider
    // than a point gives different minimum and maximum.
    const LinfLp face = build_linf_lp(data, true, t * (1.0 + 1e-10) + 1e-14);
    Vector probe = Vector::Zero(face.a.cols());
    for (Index k = 0; k < face.d; ++k) {
      const double r = 1.0 + std::fmod(0.6180339887498949 * static_cast<double>(k + 1), 1.0);
      probe[k] = r;
      probe[face.d + k] = -r;
    }
    const lp::Result lo = lp::solve_standard_form(face.a, face.b, probe);
    const lp::Result hi = lp::solve_standard_form(face.a, face.b, -probe);
    if (lo.status == lp::Status::optimal && hi.status == lp::Status::optimal) {
      const double spread = (extract_w(face, hi.x) - extract_w(face, lo.x)).lpNorm<Eigen::Infinity>();
      out.non_unique = spread > 1e-7 * (1.0 + t);
    }
  }
  return out;
}

bool is_separable(const Dataset& data) {
  const LinfLp lp = build_linf_lp(data, false, 0.0);
  // Feasibility only: a zero objective stops right after phase 1.
  const lp::Result res = lp::solve_standard_form(lp.a, lp.b, Vector::Zero(lp.a.cols()));
  return res.status == lp::Status::optimal;
}

}  // namespace ibl
