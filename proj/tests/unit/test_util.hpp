#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "liveguard/linalg.hpp"
#include "liveguard/prototypes.hpp"

namespace testutil {

using liveguard::Matrix;
using liveguard::Vector;

inline bool close(double a, double b, double atol, double rtol) {
  return std::abs(a - b) <= atol + rtol * std::abs(b);
}

inline Vector random_vector(std::mt19937_64& rng, std::size_t dim, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Vector v(dim);
  for (double& x : v) x = dist(rng);
  return v;
}

// SPD matrix built as A·Aᵀ + eps·I.
inline Matrix random_spd(std::mt19937_64& rng, std::size_t dim, double eps = 1e-3) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix a(dim, dim);
  for (double& x : a.data) x = dist(rng);
  Matrix spd(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < dim; ++k) sum += a(i, k) * a(j, k);
      spd(i, j) = sum + (i == j ? eps : 0.0);
    }
  }
  return spd;
}

// Random prototype with moderate factor entries so distances stay tame.
inline liveguard::GaussianPrototype random_prototype(
    std::mt19937_64& rng, std::size_t dim,
    liveguard::PrototypeShape shape = liveguard::PrototypeShape::Full,
    std::size_t index = 0) {
  auto proto = liveguard::GaussianPrototype::make(
      {liveguard::CategoryKind::Attack, "p" + std::to_string(index), index}, dim, shape);
  std::uniform_real_distribution<double> mean_dist(-2.0, 2.0);
  std::uniform_real_distribution<double> low_dist(-0.8, 0.8);
  std::uniform_real_distribution<double> diag_dist(-0.5, 0.5);
  for (double& x : proto.mean) x = mean_dist(rng);
  for (std::size_t i = 0; i < dim; ++i) {
    proto.factor_params(i, i) = diag_dist(rng);
    if (shape == liveguard::PrototypeShape::Full) {
      for (std::size_t j = 0; j < i; ++j) proto.factor_params(i, j) = low_dist(rng);
    }
  }
  return proto;
}

// Gauss-Jordan inverse; test-only oracle, independent of the Cholesky path.
inline Matrix gauss_jordan_inverse(const Matrix& a) {
  const std::size_t n = a.rows;
  Matrix work = a;
  Matrix inv = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(work(r, col)) > std::abs(work(pivot, col))) pivot = r;
    }
    for (std::size_t c = 0; c < n; ++c) {
      std::swap(work(pivot, c), work(col, c));
      std::swap(inv(pivot, c), inv(col, c));
    }
    const double diag = work(col, col);
    for (std::size_t c = 0; c < n; ++c) {
      work(col, c) /= diag;
      inv(col, c) /= diag;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = work(r, col);
      if (factor == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        work(r, c) -= factor * work(col, c);
        inv(r, c) -= factor * inv(col, c);
      }
    }
  }
  return inv;
}

inline double quadratic_form(const Matrix& m, const Vector& u) {
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < u.size(); ++j) sum += u[i] * m(i, j) * u[j];
  }
  return sum;
}

// Squared Mahalanobis distance through the explicit inverse of
// Σ = (M·Mᵀ)⁻¹, i.e. the direct evaluation of the quadratic form.
inline double mahalanobis_oracle(const liveguard::GaussianPrototype& proto,
                                 const Vector& z) {
  const Matrix m = proto.effective_factor();
  const Matrix precision = liveguard::matmul(m, liveguard::transpose(m));
  const Matrix sigma = gauss_jordan_inverse(precision);
  const Matrix sigma_inv = gauss_jordan_inverse(sigma);
  return quadratic_form(sigma_inv, liveguard::sub(z, proto.mean));
}

// Unique scratch directory under the system temp dir; removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    std::ostringstream name;
    name << "liveguard_" << tag << "_" << std::hex << rng();
    path_ = std::filesystem::temp_directory_path() / name.str();
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

}  // namespace testutil
