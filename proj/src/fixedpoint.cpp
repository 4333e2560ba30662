#include "ibl/fixedpoint.hpp"

namespace ibl {

namespace {

SimplexVector normalized_dual(const MarginSolution& sol) {
  if (!(sol.lambda.sum() > 0.0)) {
    throw NumericError("fixed-point map: P_Adam(c) returned an all-zero dual");
  }
  return SimplexVector::normalized(sol.lambda);
}

}  // namespace

SimplexVector t_map(const SimplexVector& c, const Dataset& data, const QpOptions& qp) {
  return normalized_dual(solve_p_adam(data, c, qp));
}

FixedPointResult fixed_point_iterate(const Dataset& data, const SimplexVector& c0,
                                     const FixedPointOptions& opts) {
  if (!(opts.thr > 0.0)) throw ConfigError("fixed-point threshold must be positive");
  if (opts.max_iter == 0) throw ConfigError("fixed-point max_iter must be positive");
  if (c0.size() != data.n()) throw ConfigError("initial simplex vector length must equal N");

  FixedPointResult res;
  SimplexVector c = c0;
  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    const MarginSolution sol = solve_p_adam(data, c, opts.qp);
    if (sol.licq_violated) ++res.licq_warnings;
    SimplexVector next = normalized_dual(sol);
    res.iterations = it;
    res.final_delta = (next.values() - c.values()).norm();
    res.w_star = sol.w;
    c = std::move(next);
    if (res.final_delta <= opts.thr) {
      res.converged = true;
      break;
    }
  }
  res.c_star = c;
  return res;
}

}  // namespace ibl
