#include "liveguard/linalg.hpp"

#include <cmath>
#include <string>

namespace liveguard {

namespace {

constexpr double kSymmetryRelTol = 1e-12;
constexpr double kSpdPivotFloor = 1e-12;
constexpr double kSingularDiagFloor = 1e-14;

}  // namespace

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool all_finite(const Vector& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

bool all_finite(const Matrix& m) { return all_finite(m.data); }

double max_abs(const Matrix& m) { return max_abs(m.data); }

double max_abs(const Vector& v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::abs(x));
  return best;
}

Matrix cholesky(const Matrix& a) {
  if (a.rows != a.cols) {
    throw DimensionMismatch("cholesky: matrix must be square, got " +
                            std::to_string(a.rows) + "x" + std::to_string(a.cols));
  }
  const std::size_t n = a.rows;
  const double scale = max_abs(a);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(a(i, j) - a(j, i)) > kSymmetryRelTol * scale) {
        throw NotPositiveDefinite("cholesky: matrix is not symmetric at (" +
                                  std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }

  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > kSpdPivotFloor)) {
      throw NotPositiveDefinite("cholesky: pivot " + std::to_string(diag) +
                                " at column " + std::to_string(j));
    }
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double sum = a(i, j);
      for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
      l(i, j) = sum / l(j, j);
    }
  }
  return l;
}

Vector solve_lower(const Matrix& l, const Vector& b) {
  if (l.rows != l.cols) {
    throw DimensionMismatch("solve_lower: matrix must be square");
  }
  if (l.rows != b.size()) {
    throw DimensionMismatch("solve_lower: rhs dimension " + std::to_string(b.size()) +
                            " does not match matrix order " + std::to_string(l.rows));
  }
  const std::size_t n = l.rows;
  Vector y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(l(i, i)) <= kSingularDiagFloor) {
      throw SingularMatrix("solve_lower: zero diagonal at row " + std::to_string(i));
    }
    double sum = b[i];
    for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * y[k];
    y[i] = sum / l(i, i);
  }
  return y;
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (a.cols != x.size()) {
    throw DimensionMismatch("matvec: " + std::to_string(a.rows) + "x" +
                            std::to_string(a.cols) + " times vector of dim " +
                            std::to_string(x.size()));
  }
  Vector y(a.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double sum = 0.0;
    const double* row = a.data.data() + i * a.cols;
    for (std::size_t j = 0; j < a.cols; ++j) sum += row[j] * x[j];
    y[i] = sum;
  }
  return y;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) {
    throw DimensionMismatch("matmul: inner dimensions disagree");
  }
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
  }
  return t;
}

Matrix outer(const Vector& x, const Vector& y) {
  Matrix m(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) m(i, j) = x[i] * y[j];
  }
  return m;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("dot: dimensions disagree");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

Vector sub(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("sub: dimensions disagree");
  }
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vector add(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("add: dimensions disagree");
  }
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vector scaled(const Vector& v, double s) {
  Vector r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i] * s;
  return r;
}

void axpy(double s, const Vector& x, Vector& y) {
  if (x.size() != y.size()) {
    throw DimensionMismatch("axpy: dimensions disagree");
  }
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

}  // namespace liveguard
