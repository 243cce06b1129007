#include <benchmark/benchmark.h>

#include <random>

#include "liveguard/prototypes.hpp"

using namespace liveguard;

namespace {

GaussianPrototype make_prototype(std::size_t dim, PrototypeShape shape) {
  auto proto = GaussianPrototype::make({CategoryKind::Live, "live", 0}, dim, shape);
  std::mt19937_64 rng(dim);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  for (double& x : proto.mean) x = dist(rng);
  for (std::size_t i = 0; i < dim; ++i) {
    proto.factor_params(i, i) = dist(rng);
    if (shape == PrototypeShape::Full) {
      for (std::size_t j = 0; j < i; ++j) proto.factor_params(i, j) = dist(rng);
    }
  }
  return proto;
}

}  // namespace

static void BM_MahalanobisFull(benchmark::State& state) {
  const std::size_t dim = static_cast<std::size_t>(state.range(0));
  const auto proto = make_prototype(dim, PrototypeShape::Full);
  Vector z(dim, 0.7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(squared_mahalanobis(proto, z));
  }
}
BENCHMARK(BM_MahalanobisFull)->Arg(8)->Arg(16)->Arg(64);

static void BM_MahalanobisDiagonal(benchmark::State& state) {
  const std::size_t dim = static_cast<std::size_t>(state.range(0));
  const auto proto = make_prototype(dim, PrototypeShape::Diagonal);
  Vector z(dim, 0.7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(squared_mahalanobis(proto, z));
  }
}
BENCHMARK(BM_MahalanobisDiagonal)->Arg(8)->Arg(16)->Arg(64);

static void BM_MahalanobisGrads(benchmark::State& state) {
  const std::size_t dim = static_cast<std::size_t>(state.range(0));
  const auto proto = make_prototype(dim, PrototypeShape::Full);
  Vector z(dim, 0.7);
  for (auto _ : state) {
    MahalanobisGrads g = squared_mahalanobis_grads(proto, z);
    benchmark::DoNotOptimize(g.d_z.data());
  }
}
BENCHMARK(BM_MahalanobisGrads)->Arg(8)->Arg(16)->Arg(64);
