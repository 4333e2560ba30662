#include "ibl/datagen.hpp"

#include <cmath>
#include <sstream>

#include "ibl/margin.hpp"
#include "ibl/rng.hpp"

namespace ibl {

using Eigen::Index;

Dataset gen_gaussian(std::size_t n, std::size_t d, std::uint64_t seed, const GaussianOptions& opts) {
  if (n == 0 || d == 0) throw ConfigError("gen_gaussian: n and d must be positive");
  if (!(opts.min_margin > 0.0)) throw ConfigError("gen_gaussian: min_margin must be positive");
  Rng rng = Rng::stream(seed, kDatasetStream);
  const Index total = static_cast<Index>(n * d);
  for (std::size_t attempt = 0; attempt < opts.max_attempts; ++attempt) {
    Matrix x(static_cast<Index>(n), static_cast<Index>(d));
    // Row-major fill so the draw order does not depend on the storage order.
    for (Index k = 0; k < total; k += 2) {
      const auto [a, b] = rng.normal_pair();
      x(k / x.cols(), k % x.cols()) = a;
      if (k + 1 < total) x((k + 1) / x.cols(), (k + 1) % x.cols()) = b;
    }
    if ((x.array().abs() <= kNonzeroTolerance).any()) continue;
    Dataset data = make_dataset(std::move(x), DatasetKind::gaussian, seed);
    if (!is_separable(data)) continue;
    if (solve_linf_margin(data).gamma_inf >= opts.min_margin) return data;
  }
  std::ostringstream msg;
  msg << "gen_gaussian: no draw with l_inf margin >= " << opts.min_margin << " in "
      << opts.max_attempts << " attempts; try a larger d relative to n";
  throw NumericError(msg.str());
}

Dataset gen_gr(const std::vector<double>& magnitudes, const Matrix& signs) {
  if (magnitudes.empty()) throw ConfigError("gen_gr: magnitudes must be nonempty");
  if (static_cast<std::size_t>(signs.rows()) != magnitudes.size() || signs.cols() == 0) {
    throw ConfigError("gen_gr: signs must be an N x d matrix with one row per magnitude");
  }
  Matrix x(signs.rows(), signs.cols());
  for (Index i = 0; i < signs.rows(); ++i) {
    const double mag = magnitudes[static_cast<std::size_t>(i)];
    if (!(mag > 0.0) || !std::isfinite(mag)) throw ConfigError("gen_gr: magnitudes must be positive");
    for (Index k = 0; k < signs.cols(); ++k) {
      const double s = signs(i, k);
      if (s != 1.0 && s != -1.0) throw ConfigError("gen_gr: signs must be +1 or -1");
      x(i, k) = mag * s;
    }
  }
  Dataset data = make_dataset(std::move(x), DatasetKind::gr);
  if (!is_separable(data)) {
    throw AssumptionError("linear-separability assumption violated by the GR sign pattern");
  }
  return data;
}

Dataset gen_shifted_diagonal(const std::vector<double>& values, double delta) {
  if (values.empty()) throw ConfigError("gen_shifted_diagonal: values must be nonempty");
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw ConfigError("gen_shifted_diagonal: delta must be positive");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw ConfigError("gen_shifted_diagonal: values must be positive");
    }
    if (i > 0 && !(values[i] > values[i - 1])) {
      throw ConfigError("gen_shifted_diagonal: values must be strictly increasing");
    }
  }
  const Index n = static_cast<Index>(values.size());
  Matrix x = Matrix::Constant(n, n, delta);
  for (Index i = 0; i < n; ++i) x(i, i) = values[static_cast<std::size_t>(i)];
  return make_dataset(std::move(x), DatasetKind::shifted_diagonal);
}

Dataset gr_reference_dataset() {
  Matrix signs(4, 4);
  signs << 1, 1, 1, 1,
           1, 1, 1, -1,
           1, 1, -1, -1,
           1, -1, 1, -1;
  return gen_gr({1.0, 2.0, 3.0, 4.0}, signs);
}

Dataset shifted_diagonal_reference_dataset() {
  return gen_shifted_diagonal({1.0, 2.0, 4.0, 8.0}, 0.1);
}

Dataset gaussian_reference_dataset() { return gen_gaussian(10, 50, kCanonicalGaussianSeed); }

bool has_gr_structure(const Matrix& x, double rel_tol) {
  for (Index i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i).cwiseAbs();
    if (row.maxCoeff() - row.minCoeff() > rel_tol * row.maxCoeff()) return false;
  }
  return true;
}

ValidationReport validate(const Dataset& data) {
  ValidationReport rep;
  rep.nonzero = data.x.size() > 0 && !(data.x.array().abs() <= kNonzeroTolerance).any() &&
                data.x.allFinite();
  if (data.x.size() > 0 && data.x.allFinite()) {
    try {
      const LinfMargin lm = solve_linf_margin(data);
      rep.separable = lm.gamma_inf > 0.0;
      rep.gamma_inf = lm.gamma_inf;
    } catch (const InfeasibleError&) {
      rep.separable = false;
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(data.x.transpose());
    qr.setThreshold(1e-8);
    rep.licq = static_cast<std::size_t>(qr.rank()) == data.n();
  }
  if (data.kind == DatasetKind::gr) rep.gr_structure = has_gr_structure(data.x);
  return rep;
}

}  // namespace ibl
