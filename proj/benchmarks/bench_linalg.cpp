#include <benchmark/benchmark.h>

#include <random>

#include "liveguard/linalg.hpp"

using namespace liveguard;

namespace {

Matrix make_spd(std::size_t dim) {
  std::mt19937_64 rng(dim);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix a(dim, dim);
  for (double& x : a.data) x = dist(rng);
  Matrix spd(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      double sum = i == j ? 0.1 : 0.0;
      for (std::size_t k = 0; k < dim; ++k) sum += a(i, k) * a(j, k);
      spd(i, j) = sum;
    }
  }
  return spd;
}

}  // namespace

static void BM_Cholesky(benchmark::State& state) {
  const Matrix spd = make_spd(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Matrix l = cholesky(spd);
    benchmark::DoNotOptimize(l.data.data());
  }
}
BENCHMARK(BM_Cholesky)->Arg(4)->Arg(16)->Arg(64);

static void BM_SolveLower(benchmark::State& state) {
  const std::size_t dim = static_cast<std::size_t>(state.range(0));
  const Matrix l = cholesky(make_spd(dim));
  Vector b(dim, 1.0);
  for (auto _ : state) {
    Vector y = solve_lower(l, b);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_SolveLower)->Arg(4)->Arg(16)->Arg(64);

static void BM_Matvec(benchmark::State& state) {
  const std::size_t dim = static_cast<std::size_t>(state.range(0));
  const Matrix a = make_spd(dim);
  Vector x(dim, 0.5);
  for (auto _ : state) {
    Vector y = matvec(a, x);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_Matvec)->Arg(16)->Arg(64)->Arg(256);
