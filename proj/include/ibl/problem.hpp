#pragma once

// Datasets, losses and gradients for linear classification on separable
// data. Labels are absorbed into the points (every y_i = +1), so the model
// output on point i is simply w . x_i.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "ibl/error.hpp"

namespace ibl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class DatasetKind { gaussian, gr, shifted_diagonal, custom };

std::string_view to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(std::string_view name);

/// Entries with magnitude at or below this are treated as zero.
inline constexpr double kNonzeroTolerance = 1e-12;

/// N points in R^d stored row-wise.
struct Dataset {
  Matrix x;  // N x d
  DatasetKind kind = DatasetKind::custom;
  std::optional<std::uint64_t> seed;

  std::size_t n() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(x.cols()); }
  auto point(std::size_t i) const { return x.row(static_cast<Eigen::Index>(i)); }
};

/// Builds a dataset and enforces the nonzero-entry assumption. Separability
/// needs the LP solver and is certified by datagen::validate.
Dataset make_dataset(Matrix points, DatasetKind kind = DatasetKind::custom,
                     std::optional<std::uint64_t> seed = std::nullopt);

/// Throws AssumptionError if any |x_i[k]| <= kNonzeroTolerance.
void require_nonzero_entries(const Matrix& points);

enum class LossKind { exponential, logistic };

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

// Scalar loss l(z) and its derivatives. Exponentials whose argument falls
// below -745 are flushed to zero, identically in l and l'.
double loss_value(LossKind kind, double z);
double loss_deriv(LossKind kind, double z);
double loss_deriv2(LossKind kind, double z);

/// L(w) = (1/N) sum_i l(w . x_i).
double loss_full(const Vector& w, const Dataset& data, LossKind kind);

/// grad L_i(w) = l'(w . x_i) x_i. Negative-signed since l' < 0.
Vector grad_sample(const Vector& w, const Dataset& data, std::size_t i, LossKind kind);

/// Mean of grad_sample over all points.
Vector grad_full(const Vector& w, const Dataset& data, LossKind kind);

/// Per-sample gradients stacked row-wise (N x d).
Matrix grad_samples(const Vector& w, const Dataset& data, LossKind kind);

/// G(w) = -(1/N) sum_i l'(w . x_i). Equals loss_full for the exponential loss.
double proxy_g(const Vector& w, const Dataset& data, LossKind kind);

/// Margins w . x_i for every point.
Vector margins(const Vector& w, const Dataset& data);

/// u . v / (|u|_2 |v|_2); throws ConfigError on a zero vector.
double cosine_similarity(const Vector& u, const Vector& v);

/// D = max_i |x_i|_1.
double max_l1_norm(const Dataset& data);

/// min_i x_i . w / |w|_inf; throws ConfigError when w = 0.
double normalized_linf_margin(const Vector& w, const Dataset& data);

void require_dim(const Vector& w, const Dataset& data);

}  // namespace ibl
