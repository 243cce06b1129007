#pragma once

#include <cstddef>
#include <vector>

#include "liveguard/errors.hpp"

namespace liveguard {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Row-major is the single storage
/// convention used everywhere, including serialization.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool same_shape(const Matrix& other) const {
    return rows == other.rows && cols == other.cols;
  }

  static Matrix identity(std::size_t n);
};

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

/// Largest absolute entry (0 for empty input).
double max_abs(const Matrix& m);
double max_abs(const Vector& v);

/// Cholesky factorization a = L·Lᵀ of a symmetric positive-definite matrix.
/// L is lower triangular with strictly positive diagonal. A pivot at or
/// below 1e-12 signals a degenerate covariance and raises
/// NotPositiveDefinite. Symmetry is checked within 1e-12 relative tolerance.
Matrix cholesky(const Matrix& a);

/// Forward substitution: solves l·y = b for lower-triangular l. Only the
/// lower triangle of l is read. Raises SingularMatrix when a diagonal
/// entry's magnitude is at or below 1e-14.
Vector solve_lower(const Matrix& l, const Vector& b);

Vector matvec(const Matrix& a, const Vector& x);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

/// Outer product x·yᵀ.
Matrix outer(const Vector& x, const Vector& y);

double dot(const Vector& a, const Vector& b);

Vector sub(const Vector& a, const Vector& b);
Vector add(const Vector& a, const Vector& b);
Vector scaled(const Vector& v, double s);

/// y += s·x
void axpy(double s, const Vector& x, Vector& y);

}  // namespace liveguard
