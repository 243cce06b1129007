#include <doctest.h>

#include <cmath>
#include <random>

#include "liveguard/losses.hpp"
#include "test_util.hpp"

using namespace liveguard;
using testutil::close;
using testutil::random_prototype;
using testutil::random_vector;

TEST_CASE("cross_entropy examples") {
  const auto symmetric = cross_entropy({0.0, 0.0}, true);
  CHECK(symmetric.loss == doctest::Approx(std::log(2.0)));
  CHECK(cross_entropy({0.0, 0.0}, false).loss == doctest::Approx(std::log(2.0)));

  CHECK(cross_entropy({20.0, -20.0}, true).loss < 1e-8);

  const auto r = cross_entropy({1.0, 0.0}, true);
  CHECK(r.loss == doctest::Approx(std::log(1.0 + std::exp(-1.0))).epsilon(1e-9));
  CHECK(r.d_logits[0] == doctest::Approx(-0.268941).epsilon(1e-5));
  CHECK(r.d_logits[1] == doctest::Approx(0.268941).epsilon(1e-5));
}

TEST_CASE("cross_entropy gradient sums to zero") {
  std::mt19937_64 rng(501);
  for (int iter = 0; iter < 200; ++iter) {
    const Vector logits = random_vector(rng, 2, 30.0);
    const auto r = cross_entropy(logits, iter % 2 == 0);
    CHECK(std::abs(r.d_logits[0] + r.d_logits[1]) <= 1e-12);
    CHECK(r.loss >= 0.0);
  }
}

namespace {

PrototypeSet make_set(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  PrototypeSet set;
  set.dim = dim;
  for (std::size_t i = 0; i < n; ++i) {
    set.prototypes.push_back(random_prototype(rng, dim, PrototypeShape::Full, i));
  }
  return set;
}

// Independent evaluation of the triplet loss value: explicit enumeration of
// all q != p per sample.
double brute_force_triplet(const PrototypeSet& set, const std::vector<Vector>& zs,
                           const std::vector<std::size_t>& cats, const LossConfig& cfg) {
  double sum = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double own = squared_mahalanobis(set.prototypes[cats[i]], zs[i]);
    double other = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < set.prototypes.size(); ++q) {
      if (q == cats[i]) continue;
      other = std::min(other, squared_mahalanobis(set.prototypes[q], zs[i]));
    }
    const double term =
        std::isfinite(other) ? own - other + cfg.margin : own + cfg.margin;
    sum += cfg.hinge ? std::max(0.0, term) : term;
  }
  return cfg.reduction == LossReduction::Mean ? sum / static_cast<double>(zs.size())
                                              : sum;
}

}  // namespace

TEST_CASE("md_triplet satisfied margin contributes nothing") {
  std::mt19937_64 rng(502);
  PrototypeSet set = make_set(rng, 2, 3);
  // Sample exactly at its own mean; the other prototype is far away.
  set.prototypes[1].mean = {100.0, 100.0, 100.0};
  const std::vector<Vector> zs{set.prototypes[0].mean};
  const std::vector<std::size_t> cats{0};
  LossConfig cfg;
  cfg.hinge = true;

  const TripletResult r = md_triplet(set, zs, cats, cfg);
  CHECK(r.loss == 0.0);
  CHECK(max_abs(r.d_features[0]) == 0.0);
  for (const auto& pg : r.d_prototypes) {
    CHECK(max_abs(pg.d_mean) == 0.0);
    CHECK(max_abs(pg.d_factor_params) == 0.0);
  }
}

TEST_CASE("md_triplet with identical prototypes returns the margin") {
  std::mt19937_64 rng(503);
  const auto base = random_prototype(rng, 3);
  PrototypeSet set;
  set.dim = 3;
  for (std::size_t i = 0; i < 3; ++i) {
    auto p = base;
    p.category.index = i;
    set.prototypes.push_back(std::move(p));
  }
  std::vector<Vector> zs;
  std::vector<std::size_t> cats;
  for (std::size_t i = 0; i < 6; ++i) {
    zs.push_back(random_vector(rng, 3, 2.0));
    cats.push_back(i % 3);
  }
  LossConfig cfg;
  cfg.margin = 1.25;
  const TripletResult r = md_triplet(set, zs, cats, cfg);
  CHECK(r.loss == doctest::Approx(1.25).epsilon(1e-12));
}

namespace {

// Central differences are meaningless within a step of the hinge boundary
// or an argmin switch; reject draws sitting that close.
bool near_switching_boundary(const PrototypeSet& set, const std::vector<Vector>& zs,
                             const std::vector<std::size_t>& cats, double margin) {
  constexpr double kGap = 1e-3;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double own = squared_mahalanobis(set.prototypes[cats[i]], zs[i]);
    std::vector<double> others;
    for (std::size_t q = 0; q < set.prototypes.size(); ++q) {
      if (q != cats[i]) others.push_back(squared_mahalanobis(set.prototypes[q], zs[i]));
    }
    std::sort(others.begin(), others.end());
    if (std::abs(own - others[0] + margin) < kGap) return true;
    if (others.size() > 1 && others[1] - others[0] < kGap) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("md_triplet matches brute force and finite differences") {
  std::mt19937_64 rng(504);
  constexpr double kStep = 1e-5;
  constexpr double kAtol = 1e-6;
  constexpr double kRtol = 1e-4;

  int done = 0;
  while (done < 10) {
    PrototypeSet set = make_set(rng, 3, 4);
    std::vector<Vector> zs;
    std::vector<std::size_t> cats;
    for (std::size_t i = 0; i < 6; ++i) {
      zs.push_back(random_vector(rng, 4, 2.5));
      cats.push_back(i % 3);
    }
    LossConfig cfg;
    cfg.hinge = done % 2 == 0;
    if (near_switching_boundary(set, zs, cats, cfg.margin)) continue;
    ++done;

    const TripletResult r = md_triplet(set, zs, cats, cfg);
    CHECK(r.loss == doctest::Approx(brute_force_triplet(set, zs, cats, cfg)).epsilon(1e-12));

    // d_features against central differences of the brute-force value.
    for (std::size_t i = 0; i < zs.size(); ++i) {
      for (std::size_t k = 0; k < 4; ++k) {
        auto zp = zs, zm = zs;
        zp[i][k] += kStep;
        zm[i][k] -= kStep;
        const double fd = (brute_force_triplet(set, zp, cats, cfg) -
                           brute_force_triplet(set, zm, cats, cfg)) /
                          (2 * kStep);
        CHECK(close(r.d_features[i][k], fd, kAtol, kRtol));
      }
    }
    // Prototype gradients.
    for (std::size_t p = 0; p < set.prototypes.size(); ++p) {
      for (std::size_t k = 0; k < 4; ++k) {
        auto sp = set, sm = set;
        sp.prototypes[p].mean[k] += kStep;
        sm.prototypes[p].mean[k] -= kStep;
        const double fd = (brute_force_triplet(sp, zs, cats, cfg) -
                           brute_force_triplet(sm, zs, cats, cfg)) /
                          (2 * kStep);
        CHECK(close(r.d_prototypes[p].d_mean[k], fd, kAtol, kRtol));
      }
      for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
          auto sp = set, sm = set;
          sp.prototypes[p].factor_params(i, j) += kStep;
          sm.prototypes[p].factor_params(i, j) -= kStep;
          const double fd = (brute_force_triplet(sp, zs, cats, cfg) -
                             brute_force_triplet(sm, zs, cats, cfg)) /
                            (2 * kStep);
          CHECK(close(r.d_prototypes[p].d_factor_params(i, j), fd, kAtol, kRtol));
        }
      }
    }
  }
}

TEST_CASE("md_triplet hinge off can go negative") {
  PrototypeSet set;
  set.dim = 2;
  for (std::size_t i = 0; i < 2; ++i) {
    auto p = GaussianPrototype::make({CategoryKind::Attack, "p" + std::to_string(i), i},
                                     2, PrototypeShape::Full);
    p.mean = i == 0 ? Vector{0.0, 0.0} : Vector{10.0, 0.0};
    set.prototypes.push_back(std::move(p));
  }
  const std::vector<Vector> zs{{0.0, 0.0}};
  const std::vector<std::size_t> cats{0};
  LossConfig cfg;
  cfg.hinge = false;
  cfg.margin = 1.0;
  // own = 0, other = 100 => term = -99.
  CHECK(md_triplet(set, zs, cats, cfg).loss == doctest::Approx(-99.0));
  cfg.hinge = true;
  CHECK(md_triplet(set, zs, cats, cfg).loss == 0.0);
}

TEST_CASE("md_triplet single prototype set pulls only") {
  PrototypeSet set;
  set.dim = 2;
  set.prototypes.push_back(
      GaussianPrototype::make({CategoryKind::Live, "all", 0}, 2, PrototypeShape::Full));
  const std::vector<Vector> zs{{3.0, 4.0}};
  const std::vector<std::size_t> cats{0};
  LossConfig cfg;
  cfg.margin = 1.0;
  const TripletResult r = md_triplet(set, zs, cats, cfg);
  CHECK(r.loss == doctest::Approx(26.0));  // 25 + margin
  CHECK(r.d_features[0][0] == doctest::Approx(6.0));
  CHECK(r.d_features[0][1] == doctest::Approx(8.0));
}

TEST_CASE("md_triplet error paths") {
  std::mt19937_64 rng(505);
  PrototypeSet set = make_set(rng, 2, 3);
  LossConfig cfg;
  const std::vector<Vector> empty_z;
  const std::vector<std::size_t> empty_c;
  CHECK_THROWS_AS(md_triplet(set, empty_z, empty_c, cfg), EmptyBatch);
  const std::vector<Vector> zs{random_vector(rng, 3)};
  const std::vector<std::size_t> bad{7};
  CHECK_THROWS_AS(md_triplet(set, zs, bad, cfg), UnknownCategory);
}

TEST_CASE("one gradient step pulls toward own and pushes from other") {
  std::mt19937_64 rng(506);
  for (int iter = 0; iter < 20; ++iter) {
    PrototypeSet set = make_set(rng, 2, 3);
    const Vector z = random_vector(rng, 3, 2.0);
    // Assign the sample to the farther prototype so the hinge is active by
    // construction rather than via an outsized margin.
    const double d0 = squared_mahalanobis(set.prototypes[0], z);
    const double d1 = squared_mahalanobis(set.prototypes[1], z);
    const std::size_t own = d0 >= d1 ? 0 : 1;
    const std::size_t other = 1 - own;
    const std::vector<Vector> zs{z};
    const std::vector<std::size_t> cats{own};
    LossConfig cfg;
    const TripletResult r = md_triplet(set, zs, cats, cfg);
    REQUIRE(r.loss > 0.0);

    const double eta = 1e-4;

    // Pulling effect: stepping the own prototype's parameters shrinks the
    // sample's distance to it.
    PrototypeSet pulled = set;
    axpy(-eta, r.d_prototypes[own].d_mean, pulled.prototypes[own].mean);
    for (std::size_t k = 0; k < r.d_prototypes[own].d_factor_params.data.size(); ++k) {
      pulled.prototypes[own].factor_params.data[k] -=
          eta * r.d_prototypes[own].d_factor_params.data[k];
    }
    CHECK(squared_mahalanobis(pulled.prototypes[own], z) <
          squared_mahalanobis(set.prototypes[own], z));

    // Pushing effect: stepping the argmin-other prototype grows its distance.
    PrototypeSet pushed = set;
    axpy(-eta, r.d_prototypes[other].d_mean, pushed.prototypes[other].mean);
    for (std::size_t k = 0; k < r.d_prototypes[other].d_factor_params.data.size(); ++k) {
      pushed.prototypes[other].factor_params.data[k] -=
          eta * r.d_prototypes[other].d_factor_params.data[k];
    }
    CHECK(squared_mahalanobis(pushed.prototypes[other], z) >
          squared_mahalanobis(set.prototypes[other], z));

    // The full joint step descends the loss itself.
    PrototypeSet stepped = set;
    Vector z_new = z;
    axpy(-eta, r.d_features[0], z_new);
    for (std::size_t p = 0; p < 2; ++p) {
      axpy(-eta, r.d_prototypes[p].d_mean, stepped.prototypes[p].mean);
      for (std::size_t k = 0; k < r.d_prototypes[p].d_factor_params.data.size(); ++k) {
        stepped.prototypes[p].factor_params.data[k] -=
            eta * r.d_prototypes[p].d_factor_params.data[k];
      }
    }
    const std::vector<Vector> zs_new{z_new};
    CHECK(md_triplet(stepped, zs_new, cats, cfg).loss < r.loss);
  }
}

TEST_CASE("total_loss weighted sum") {
  LossConfig cfg;
  cfg.lambda = 0.0;
  CHECK(total_loss(0.42, 123.0, cfg) == 0.42);
  cfg.lambda = 1.0;
  CHECK(total_loss(0.0, 0.7, cfg) == 0.7);
  cfg.lambda = 0.5;
  CHECK(total_loss(0.3, 0.4, cfg) == doctest::Approx(0.5));
}
