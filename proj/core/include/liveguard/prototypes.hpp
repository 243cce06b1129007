#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "liveguard/linalg.hpp"

namespace liveguard {

enum class CategoryKind { Live, Attack };

struct CategoryId {
  CategoryKind kind = CategoryKind::Live;
  std::string name;
  std::size_t index = 0;
};

enum class PrototypeShape { Full, Diagonal };

/// Log-diagonal clamp applied to the stored precision factor parameters.
/// Bounds the condition number of the implied precision matrix.
constexpr double kLogDiagMin = -6.0;
constexpr double kLogDiagMax = 6.0;

/// Learnable Gaussian prototype for one category: a mean vector plus the
/// lower-triangular Cholesky factor M of the precision matrix, Σ⁻¹ = M·Mᵀ.
/// The diagonal of M is stored as log-values so the precision stays
/// positive-definite under unconstrained gradient updates; stored
/// log-diagonal values are kept in [kLogDiagMin, kLogDiagMax].
/// Diagonal shape keeps the strict lower triangle pinned at zero.
struct GaussianPrototype {
  CategoryId category;
  PrototypeShape shape = PrototypeShape::Full;
  Vector mean;
  /// Stored parameters of M: strict lower triangle holds raw entries,
  /// diagonal holds log-values. Upper triangle is always zero.
  Matrix factor_params;

  static GaussianPrototype make(CategoryId category, std::size_t dim,
                                PrototypeShape shape);

  std::size_t dim() const { return mean.size(); }

  /// Effective factor M: diagonal exponentiated, everything else verbatim.
  Matrix effective_factor() const;

  /// Re-establishes parameter invariants after an in-place update: clamps
  /// the log-diagonal and zeroes the masked triangle entries.
  void project_params();
};

/// Squared Mahalanobis distance (z−μ)ᵀΣ⁻¹(z−μ), evaluated as ‖Mᵀ(z−μ)‖²
/// so no matrix is ever inverted.
double squared_mahalanobis(const GaussianPrototype& proto, const Vector& z);

struct MahalanobisGrads {
  Vector d_z;
  Vector d_mean;
  /// Gradient w.r.t. the stored parameters of M (log-diagonal chain rule
  /// applied, masked triangle entries zero).
  Matrix d_factor_params;
};

/// Analytic gradients of squared_mahalanobis w.r.t. the feature and both
/// prototype parameter blocks.
MahalanobisGrads squared_mahalanobis_grads(const GaussianPrototype& proto,
                                           const Vector& z);

struct PrototypeSet {
  std::size_t dim = 0;
  std::vector<GaussianPrototype> prototypes;

  /// Checks the dim/index invariants; raises on violation.
  void validate() const;
};

struct NearestResult {
  CategoryId category;
  double distance = 0.0;
};

/// Minimum squared Mahalanobis distance over the set. Ties break toward the
/// lowest category index.
NearestResult nearest_prototype(const PrototypeSet& set, const Vector& z);

}  // namespace liveguard
