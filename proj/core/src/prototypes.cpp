#include "liveguard/prototypes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace liveguard {

GaussianPrototype GaussianPrototype::make(CategoryId category, std::size_t dim,
                                          PrototypeShape shape) {
  GaussianPrototype p;
  p.category = std::move(category);
  p.shape = shape;
  p.mean = Vector(dim, 0.0);
  p.factor_params = Matrix(dim, dim);  // log-diagonal 0 => M = I
  return p;
}

Matrix GaussianPrototype::effective_factor() const {
  Matrix m = factor_params;
  for (std::size_t i = 0; i < m.rows; ++i) m(i, i) = std::exp(factor_params(i, i));
  return m;
}

void GaussianPrototype::project_params() {
  const std::size_t d = factor_params.rows;
  for (std::size_t i = 0; i < d; ++i) {
    factor_params(i, i) = std::clamp(factor_params(i, i), kLogDiagMin, kLogDiagMax);
    for (std::size_t j = i + 1; j < d; ++j) factor_params(i, j) = 0.0;
    if (shape == PrototypeShape::Diagonal) {
      for (std::size_t j = 0; j < i; ++j) factor_params(i, j) = 0.0;
    }
  }
}

namespace {

void check_dim(const GaussianPrototype& proto, const Vector& z, const char* where) {
  if (proto.dim() != z.size()) {
    throw DimensionMismatch(std::string(where) + ": feature dim " +
                            std::to_string(z.size()) + " vs prototype dim " +
                            std::to_string(proto.dim()));
  }
}

// v = Mᵀ·(z−μ) straight from the stored parameters; v_j = M_jj·u_j + Σ_{i>j} M_ij·u_i.
Vector factor_t_times_residual(const GaussianPrototype& proto, const Vector& z) {
  const std::size_t d = proto.dim();
  Vector u(d);
  for (std::size_t i = 0; i < d; ++i) u[i] = z[i] - proto.mean[i];
  Vector v(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double sum = std::exp(proto.factor_params(j, j)) * u[j];
    for (std::size_t i = j + 1; i < d; ++i) sum += proto.factor_params(i, j) * u[i];
    v[j] = sum;
  }
  return v;
}

}  // namespace

double squared_mahalanobis(const GaussianPrototype& proto, const Vector& z) {
  check_dim(proto, z, "squared_mahalanobis");
  const Vector v = factor_t_times_residual(proto, z);
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return sum;
}

MahalanobisGrads squared_mahalanobis_grads(const GaussianPrototype& proto,
                                           const Vector& z) {
  check_dim(proto, z, "squared_mahalanobis_grads");
  const std::size_t d = proto.dim();
  Vector u(d);
  for (std::size_t i = 0; i < d; ++i) u[i] = z[i] - proto.mean[i];
  const Vector v = factor_t_times_residual(proto, z);

  MahalanobisGrads g;
  // d_z = 2·M·v, computed against the stored parameterization.
  g.d_z = Vector(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    double sum = std::exp(proto.factor_params(i, i)) * v[i];
    for (std::size_t j = 0; j < i; ++j) sum += proto.factor_params(i, j) * v[j];
    g.d_z[i] = 2.0 * sum;
  }
  g.d_mean = Vector(d);
  for (std::size_t i = 0; i < d; ++i) g.d_mean[i] = -g.d_z[i];

  // Raw factor gradient 2·u·vᵀ, masked to the trainable triangle; diagonal
  // entries chain through the log storage (multiply by M_ii = exp(s_ii)).
  g.d_factor_params = Matrix(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t lo = proto.shape == PrototypeShape::Diagonal ? i : 0;
    for (std::size_t j = lo; j <= i; ++j) {
      double raw = 2.0 * u[i] * v[j];
      if (i == j) raw *= std::exp(proto.factor_params(i, i));
      g.d_factor_params(i, j) = raw;
    }
  }
  return g;
}

void PrototypeSet::validate() const {
  for (std::size_t i = 0; i < prototypes.size(); ++i) {
    const auto& p = prototypes[i];
    if (p.dim() != dim) {
      throw DimensionMismatch("prototype " + std::to_string(i) + " has dim " +
                              std::to_string(p.dim()) + ", set dim is " +
                              std::to_string(dim));
    }
    if (p.category.index != i) {
      throw Error("prototype category index " + std::to_string(p.category.index) +
                  " does not match position " + std::to_string(i));
    }
    if (p.factor_params.rows != dim || p.factor_params.cols != dim) {
      throw ShapeMismatch("prototype factor shape mismatch");
    }
  }
}

NearestResult nearest_prototype(const PrototypeSet& set, const Vector& z) {
  if (set.prototypes.empty()) {
    throw EmptySet("nearest_prototype: prototype set is empty");
  }
  NearestResult best;
  best.distance = squared_mahalanobis(set.prototypes[0], z);
  best.category = set.prototypes[0].category;
  for (std::size_t i = 1; i < set.prototypes.size(); ++i) {
    const double dist = squared_mahalanobis(set.prototypes[i], z);
    if (dist < best.distance) {
      best.distance = dist;
      best.category = set.prototypes[i].category;
    }
  }
  return best;
}

}  // namespace liveguard
