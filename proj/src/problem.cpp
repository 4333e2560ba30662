#include "ibl/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ibl {

namespace {

// exp(arg) with the flush-to-zero rule shared by l and l'.
inline double flushed_exp(double arg) {
  return arg < -745.0 ? 0.0 : std::exp(arg);
}

}  // namespace

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::gaussian: return "gaussian";
    case DatasetKind::gr: return "gr";
    case DatasetKind::shifted_diagonal: return "shifted_diagonal";
    case DatasetKind::custom: return "custom";
  }
  return "custom";
}

DatasetKind dataset_kind_from_string(std::string_view name) {
  if (name == "gaussian") return DatasetKind::gaussian;
  if (name == "gr") return DatasetKind::gr;
  if (name == "shifted_diagonal") return DatasetKind::shifted_diagonal;
  if (name == "custom") return DatasetKind::custom;
  throw ConfigError("unknown dataset kind '" + std::string(name) + "'");
}

std::string_view to_string(LossKind kind) {
  return kind == LossKind::exponential ? "exponential" : "logistic";
}

LossKind loss_kind_from_string(std::string_view name) {
  if (name == "exponential" || name == "exp") return LossKind::exponential;
  if (name == "logistic" || name == "log") return LossKind::logistic;
  throw ConfigError("unknown loss '" + std::string(name) + "'");
}

void require_nonzero_entries(const Matrix& points) {
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index k = 0; k < points.cols(); ++k) {
      if (!std::isfinite(points(i, k))) {
        std::ostringstream msg;
        msg << "non-finite entry x_" << i << "[" << k << "]";
        throw ConfigError(msg.str());
      }
      if (std::abs(points(i, k)) <= kNonzeroTolerance) {
        std::ostringstream msg;
        msg << "nonzero-entries assumption violated: |x_" << i << "[" << k
            << "]| = " << std::abs(points(i, k)) << " <= " << kNonzeroTolerance;
        throw AssumptionError(msg.str());
      }
    }
  }
}

Dataset make_dataset(Matrix points, DatasetKind kind, std::optional<std::uint64_t> seed) {
  if (points.rows() == 0 || points.cols() == 0) {
    throw ConfigError("dataset must have at least one point and one dimension");
  }
  require_nonzero_entries(points);
  return Dataset{std::move(points), kind, seed};
}

double loss_value(LossKind kind, double z) {
  if (kind == LossKind::exponential) return flushed_exp(-z);
  // log(1 + e^{-z}) without overflow for z << 0.
  if (z >= 0.0) return std::log1p(flushed_exp(-z));
  return -z + std::log1p(flushed_exp(z));
}

double loss_deriv(LossKind kind, double z) {
  if (kind == LossKind::exponential) return -flushed_exp(-z);
  if (z >= 0.0) {
    const double e = flushed_exp(-z);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + flushed_exp(z));
}

double loss_deriv2(LossKind kind, double z) {
  if (kind == LossKind::exponential) return flushed_exp(-z);
  const double e = flushed_exp(-std::abs(z));
  return e / ((1.0 + e) * (1.0 + e));
}

void require_dim(const Vector& w, const Dataset& data) {
  if (static_cast<std::size_t>(w.size()) != data.d()) {
    std::ostringstream msg;
    msg << "dimension mismatch: w has " << w.size() << " entries, data has d = " << data.d();
    throw ConfigError(msg.str());
  }
}

Vector margins(const Vector& w, const Dataset& data) {
  require_dim(w, data);
  return data.x * w;
}

double loss_full(const Vector& w, const Dataset& data, LossKind kind) {
  const Vector z = margins(w, data);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) sum += loss_value(kind, z[i]);
  return sum / static_cast<double>(data.n());
}

Vector grad_sample(const Vector& w, const Dataset& data, std::size_t i, LossKind kind) {
  require_dim(w, data);
  if (i >= data.n()) {
    std::ostringstream msg;
    msg << "sample index " << i << " out of range [0, " << data.n() << ")";
    throw ConfigError(msg.str());
  }
  const auto x = data.point(i);
  return (loss_deriv(kind, x.dot(w.transpose())) * x).transpose();
}

Matrix grad_samples(const Vector& w, const Dataset& data, LossKind kind) {
  const Vector z = margins(w, data);
  Matrix g = data.x;
  for (Eigen::Index i = 0; i < z.size(); ++i) g.row(i) *= loss_deriv(kind, z[i]);
  return g;
}

Vector grad_full(const Vector& w, const Dataset& data, LossKind kind) {
  const Vector z = margins(w, data);
  Vector coeff(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) coeff[i] = loss_deriv(kind, z[i]);
  return data.x.transpose() * coeff / static_cast<double>(data.n());
}

double proxy_g(const Vector& w, const Dataset& data, LossKind kind) {
  const Vector z = margins(w, data);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) sum -= loss_deriv(kind, z[i]);
  return sum / static_cast<double>(data.n());
}

double cosine_similarity(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) throw ConfigError("cosine_similarity: size mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu > 0.0) || !(nv > 0.0)) throw ConfigError("cosine_similarity: zero vector");
  const double c = u.dot(v) / (nu * nv);
  return std::clamp(c, -1.0, 1.0);
}

double max_l1_norm(const Dataset& data) {
  return data.x.rowwise().lpNorm<1>().maxCoeff();
}

double normalized_linf_margin(const Vector& w, const Dataset& data) {
  const double scale = w.lpNorm<Eigen::Infinity>();
  if (!(scale > 0.0)) throw ConfigError("normalized_linf_margin: zero vector");
  return margins(w, data).minCoeff() / scale;
}

}  // namespace ibl
