#pragma once

// Dual fixed-point map of the parametric margin problem and its plain
// (undamped) iteration. A fixed point c* of T(c) = d(c)/|d(c)|_1, where d(c)
// is the dual of P_Adam(c), gives the limit direction p(c*) of AdamProxy.

#include <cstddef>

#include "ibl/margin.hpp"

namespace ibl {

struct FixedPointResult {
  SimplexVector c_star = SimplexVector::uniform(1);
  Vector w_star;             // primal of the last solve, p(c_star)
  std::size_t iterations = 0;
  double final_delta = 0.0;  // |c_1 - c_0|_2 of the last iteration
  bool converged = false;
  std::size_t licq_warnings = 0;
};

struct FixedPointOptions {
  double thr = 1e-8;
  std::size_t max_iter = 100;
  QpOptions qp;
};

/// T(c). Throws NumericError if the dual vanishes.
SimplexVector t_map(const SimplexVector& c, const Dataset& data, const QpOptions& qp = {});

/// Iterates c <- T(c) from c0 until |T(c) - c|_2 <= thr or max_iter maps.
/// Running out of iterations is reported through `converged`, not thrown.
FixedPointResult fixed_point_iterate(const Dataset& data, const SimplexVector& c0,
                                     const FixedPointOptions& opts = {});

}  // namespace ibl
