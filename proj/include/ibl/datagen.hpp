#pragma once

// Seeded generators and validators for the three dataset families:
// i.i.d. Gaussian points, generalized Rademacher (GR) points whose
// coordinates share one magnitude per point, and shifted-diagonal points.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ibl/problem.hpp"

namespace ibl {

/// Random stream id used for dataset draws; runs use other ids.
inline constexpr std::uint64_t kDatasetStream = 0;

/// Seed of the canonical Gaussian instance (N = 10, d = 50).
inline constexpr std::uint64_t kCanonicalGaussianSeed = 2025;

struct GaussianOptions {
  double min_margin = 1e-3;
  std::size_t max_attempts = 100;
};

/// N x d standard-normal entries, redrawn as a whole until gamma_inf >=
/// min_margin. Throws NumericError after max_attempts draws.
Dataset gen_gaussian(std::size_t n, std::size_t d, std::uint64_t seed,
                     const GaussianOptions& opts = {});

/// x_i[k] = magnitudes[i] * signs(i, k). Throws ConfigError on malformed
/// input and AssumptionError when the sign pattern is not separable.
Dataset gen_gr(const std::vector<double>& magnitudes, const Matrix& signs);

/// x_i = values[i] e_i + delta * sum_{j != i} e_j; values strictly increasing
/// and positive, delta > 0.
Dataset gen_shifted_diagonal(const std::vector<double>& values, double delta);

/// The four-point GR instance with magnitudes (1,2,3,4).
Dataset gr_reference_dataset();
/// Shifted-diagonal instance with values (1,2,4,8), delta = 0.1.
Dataset shifted_diagonal_reference_dataset();
/// Gaussian N = 10, d = 50 instance at the canonical seed.
Dataset gaussian_reference_dataset();

struct ValidationReport {
  bool nonzero = false;
  bool separable = false;
  double gamma_inf = 0.0;            // 0 when not separable
  std::optional<bool> gr_structure;  // only checked for kind == gr
  bool licq = false;                 // all points linearly independent

  bool ok() const { return nonzero && separable && gr_structure.value_or(true); }
};

/// Report only; never throws for a malformed dataset.
ValidationReport validate(const Dataset& data);

/// Whether every point has equal-magnitude coordinates.
bool has_gr_structure(const Matrix& x, double rel_tol = 1e-12);

}  // namespace ibl
