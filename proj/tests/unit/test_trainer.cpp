#include <doctest.h>

#include <cmath>
#include <random>

#include "liveguard/trainer.hpp"
#include "test_util.hpp"

using namespace liveguard;
using testutil::random_vector;

namespace {

Dataset tiny_dataset(std::mt19937_64& rng, std::size_t per_class = 8) {
  Dataset data;
  data.d_in = 3;
  const std::vector<std::pair<std::string, Vector>> classes = {
      {"live", {2.0, 0.0, 0.0}},
      {"attack:print", {0.0, 2.0, 0.0}},
      {"attack:replay", {0.0, 0.0, 2.0}},
  };
  const std::vector<std::string> domains = {"d0", "d1"};
  for (const auto& [label, mean] : classes) {
    for (std::size_t i = 0; i < per_class; ++i) {
      SampleRecord rec;
      rec.label = label;
      rec.domain = domains[i % domains.size()];
      rec.x = mean;
      axpy(1.0, random_vector(rng, 3, 0.5), rec.x);
      data.samples.push_back(std::move(rec));
    }
  }
  return data;
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 6;
  cfg.seed = 11;
  cfg.network.hidden_dims = {4};
  cfg.network.feature_dim = 3;
  return cfg;
}

}  // namespace

TEST_CASE("category layouts per grouping mode") {
  std::mt19937_64 rng(601);
  const Dataset data = tiny_dataset(rng);

  const auto attack = build_category_layout(data, GroupingMode::AttackBased);
  CHECK(attack.categories.size() == 3);
  CHECK(attack.categories[0].kind == CategoryKind::Live);
  CHECK(attack.categories[1].name == "print");
  CHECK(attack.categories[2].name == "replay");

  const auto binary = build_category_layout(data, GroupingMode::Binary);
  CHECK(binary.categories.size() == 2);

  const auto one = build_category_layout(data, GroupingMode::OneClass);
  CHECK(one.categories.size() == 1);
  for (std::size_t a : one.assignment) CHECK(a == 0);

  // Domain-based: live plus one spoof prototype per training domain.
  const auto domain = build_category_layout(data, GroupingMode::DomainBased);
  CHECK(domain.categories.size() == 3);  // live + d0 + d1

  Dataset four_domains = data;
  for (std::size_t i = 0; i < four_domains.samples.size(); ++i) {
    four_domains.samples[i].domain = "dom" + std::to_string(i % 4);
  }
  CHECK(build_category_layout(four_domains, GroupingMode::DomainBased).categories.size() == 5);

  CHECK_THROWS_AS(build_category_layout(Dataset{}, GroupingMode::Binary), EmptyDataset);
}

TEST_CASE("prototype set construction") {
  std::mt19937_64 rng(602);
  const Dataset data = tiny_dataset(rng);
  const auto layout = build_category_layout(data, GroupingMode::AttackBased);
  const PrototypeSet set = build_prototype_set(layout, 5, PrototypeShape::Full);
  CHECK(set.prototypes.size() == 3);
  CHECK(set.dim == 5);
  set.validate();
  for (const auto& p : set.prototypes) {
    CHECK(max_abs(p.mean) == 0.0);
    // log-diag 0 => identity precision
    CHECK(max_abs(p.factor_params) == 0.0);
  }
}

TEST_CASE("init_prototypes computes per-category feature means") {
  std::mt19937_64 rng(603);
  Dataset data = tiny_dataset(rng);
  const auto layout = build_category_layout(data, GroupingMode::AttackBased);
  std::mt19937_64 net_rng(42);
  const MlpParams model = init_mlp(3, tiny_config().network, net_rng);
  PrototypeSet set = build_prototype_set(layout, 3, PrototypeShape::Full);
  init_prototypes(set, model, data, layout, 1);

  // Streaming-mean oracle per category.
  std::vector<Vector> sums(3, Vector(3, 0.0));
  std::vector<std::size_t> counts(3, 0);
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    axpy(1.0, features(model, data.samples[i].x), sums[layout.assignment[i]]);
    ++counts[layout.assignment[i]];
  }
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(std::abs(set.prototypes[c].mean[k] - sums[c][k] / counts[c]) <= 1e-12);
    }
  }

  // Identity precision: distance reduces to squared Euclidean.
  const Vector z = random_vector(rng, 3, 2.0);
  const Vector diff = sub(z, set.prototypes[0].mean);
  CHECK(squared_mahalanobis(set.prototypes[0], z) == doctest::Approx(dot(diff, diff)));

  // Constant category: mean equals the feature of the repeated sample.
  Dataset constant;
  constant.d_in = 3;
  for (int i = 0; i < 4; ++i) {
    constant.samples.push_back({"live", "d0", {1.0, 2.0, 3.0}});
    constant.samples.push_back({"attack:print", "d0", {0.0, 1.0, 0.0}});
  }
  const auto const_layout = build_category_layout(constant, GroupingMode::Binary);
  PrototypeSet const_set = build_prototype_set(const_layout, 3, PrototypeShape::Full);
  init_prototypes(const_set, model, constant, const_layout, 2);
  const Vector expected = features(model, {1.0, 2.0, 3.0});
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(const_set.prototypes[0].mean[k] == doctest::Approx(expected[k]).epsilon(1e-12));
  }

  // A category with no samples is an error.
  Dataset missing = constant;
  for (auto& rec : missing.samples) rec.label = "live";
  CategoryLayout bad_layout = const_layout;
  std::fill(bad_layout.assignment.begin(), bad_layout.assignment.end(), std::size_t{0});
  PrototypeSet bad_set = build_prototype_set(const_layout, 3, PrototypeShape::Full);
  CHECK_THROWS_AS(init_prototypes(bad_set, model, missing, bad_layout, 1), EmptyCategory);
}

namespace {

// Smallest state that exercises sgd_step: one 1x1 layer plus the mandatory head.
struct ScalarModel {
  MlpParams model;
  PrototypeSet set;
  ModelGrads grads;
  ModelGrads velocity;

  ScalarModel() {
    model.layers.push_back({Matrix(1, 1), Vector(1, 0.0)});
    model.head.weight = Matrix(2, 1);
    model.head.bias = Vector(2, 0.0);
    set.dim = 1;
    set.prototypes.push_back(GaussianPrototype::make({CategoryKind::Live, "all", 0}, 1,
                                                     PrototypeShape::Full));
    grads = zero_grads_like(model, set);
    velocity = zero_grads_like(model, set);
  }
};

}  // namespace

TEST_CASE("sgd_step recurrences") {
  ScalarModel s;
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.momentum = 0.0;
  cfg.weight_decay = 0.0;

  // Zero gradient, zero decay: exact fixed point.
  s.model.layers[0].weight(0, 0) = 1.0;
  sgd_step(s.model, s.set, s.grads, s.velocity, cfg);
  CHECK(s.model.layers[0].weight(0, 0) == 1.0);

  // Plain SGD: theta = 1, g = 1, lr = 0.1 -> 0.9.
  s.grads.layers[0].d_weight(0, 0) = 1.0;
  sgd_step(s.model, s.set, s.grads, s.velocity, cfg);
  CHECK(s.model.layers[0].weight(0, 0) == doctest::Approx(0.9));

  // Two-step momentum recurrence from theta = 0.
  ScalarModel m;
  TrainConfig mom_cfg;
  mom_cfg.learning_rate = 0.1;
  mom_cfg.momentum = 0.9;
  mom_cfg.weight_decay = 0.0;
  m.grads.layers[0].d_weight(0, 0) = 1.0;
  sgd_step(m.model, m.set, m.grads, m.velocity, mom_cfg);
  CHECK(m.model.layers[0].weight(0, 0) == doctest::Approx(-0.1));
  sgd_step(m.model, m.set, m.grads, m.velocity, mom_cfg);
  CHECK(m.velocity.layers[0].d_weight(0, 0) == doctest::Approx(1.9));
  CHECK(m.model.layers[0].weight(0, 0) == doctest::Approx(-0.29));
}

TEST_CASE("weight decay touches only network weight matrices") {
  ScalarModel s;
  s.model.layers[0].weight(0, 0) = 2.0;
  s.model.layers[0].bias[0] = 3.0;
  s.model.head.weight(0, 0) = -1.0;
  s.model.head.bias[1] = 0.5;
  s.set.prototypes[0].mean[0] = 4.0;
  s.set.prototypes[0].factor_params(0, 0) = 0.25;

  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.momentum = 0.0;
  cfg.weight_decay = 0.5;
  sgd_step(s.model, s.set, s.grads, s.velocity, cfg);

  CHECK(s.model.layers[0].weight(0, 0) == doctest::Approx(2.0 * (1.0 - 0.05)));
  CHECK(s.model.head.weight(0, 0) == doctest::Approx(-1.0 * (1.0 - 0.05)));
  CHECK(s.model.layers[0].bias[0] == 3.0);
  CHECK(s.model.head.bias[1] == 0.5);
  CHECK(s.set.prototypes[0].mean[0] == 4.0);
  CHECK(s.set.prototypes[0].factor_params(0, 0) == 0.25);
}

TEST_CASE("sgd_step aborts on non-finite gradients") {
  ScalarModel s;
  s.model.layers[0].weight(0, 0) = 1.0;
  s.grads.head.d_weight(0, 0) = std::numeric_limits<double>::quiet_NaN();
  TrainConfig cfg;
  CHECK_THROWS_AS(sgd_step(s.model, s.set, s.grads, s.velocity, cfg), NonFiniteGradient);
  CHECK(s.model.layers[0].weight(0, 0) == 1.0);  // state untouched

  ModelGrads wrong = zero_grads_like(s.model, s.set);
  wrong.layers[0].d_weight = Matrix(2, 2);
  CHECK_THROWS_AS(sgd_step(s.model, s.set, wrong, s.velocity, cfg), ShapeMismatch);
}

TEST_CASE("make_batches stratifies and is (seed, epoch)-deterministic") {
  CategoryLayout layout;
  layout.categories = {{CategoryKind::Live, "live", 0},
                       {CategoryKind::Attack, "print", 1},
                       {CategoryKind::Attack, "replay", 2}};
  for (std::size_t i = 0; i < 30; ++i) layout.assignment.push_back(i / 10);

  const auto batches = make_batches(layout, 6, 99, 1);
  CHECK(batches.size() == 5);
  for (const auto& batch : batches) {
    CHECK(batch.size() == 6);
    std::vector<std::size_t> count(3, 0);
    for (std::size_t idx : batch) ++count[layout.assignment[idx]];
    for (std::size_t c = 0; c < 3; ++c) CHECK(count[c] == 2);
  }

  CHECK(make_batches(layout, 6, 99, 1) == batches);
  CHECK(make_batches(layout, 6, 99, 2) != batches);
  CHECK(make_batches(layout, 6, 100, 1) != batches);

  // Unequal class counts: quotas follow frequency, at least 2 everywhere.
  CategoryLayout skewed;
  skewed.categories = layout.categories;
  for (std::size_t i = 0; i < 60; ++i) skewed.assignment.push_back(0);
  for (std::size_t i = 0; i < 20; ++i) skewed.assignment.push_back(1);
  for (std::size_t i = 0; i < 20; ++i) skewed.assignment.push_back(2);
  const auto skewed_batches = make_batches(skewed, 10, 5, 1);
  for (const auto& batch : skewed_batches) {
    CHECK(batch.size() == 10);
    std::vector<std::size_t> count(3, 0);
    for (std::size_t idx : batch) ++count[skewed.assignment[idx]];
    for (std::size_t c = 0; c < 3; ++c) CHECK(count[c] >= 2);
  }

  CHECK_THROWS_AS(make_batches(layout, 4, 0, 1), InvalidConfig);

  CategoryLayout small;
  small.categories = layout.categories;
  small.assignment = {0, 0, 1, 1, 2};  // replay has a single sample
  CHECK_THROWS_AS(make_batches(small, 6, 0, 1), CategoryTooSmall);
}

TEST_CASE("train epochs=0 equals initialization") {
  std::mt19937_64 rng(604);
  const Dataset data = tiny_dataset(rng);
  TrainConfig cfg = tiny_config();
  cfg.epochs = 0;
  const TrainResult result = train(data, cfg);
  CHECK(result.history.empty());
  CHECK(result.checkpoint.epochs_completed == 0);

  // Matches an independently constructed initialization from the same seed.
  std::mt19937_64 init_rng(cfg.seed);
  const MlpParams expected = init_mlp(3, cfg.network, init_rng);
  CHECK(result.checkpoint.model.layers[0].weight.data == expected.layers[0].weight.data);
  CHECK(result.checkpoint.model.head.weight.data == expected.head.weight.data);

  const auto layout = build_category_layout(data, cfg.grouping);
  PrototypeSet set = build_prototype_set(layout, cfg.network.feature_dim, cfg.resolve_shape());
  init_prototypes(set, expected, data, layout, cfg.warmup_epochs_for_means);
  for (std::size_t c = 0; c < set.prototypes.size(); ++c) {
    CHECK(result.checkpoint.prototypes.prototypes[c].mean == set.prototypes[c].mean);
  }
}

TEST_CASE("train with vanishing learning rate freezes parameters") {
  std::mt19937_64 rng(605);
  const Dataset data = tiny_dataset(rng);
  TrainConfig frozen = tiny_config();
  frozen.epochs = 1;
  frozen.learning_rate = 1e-12;
  TrainConfig init_only = frozen;
  init_only.epochs = 0;

  const Checkpoint trained = train(data, frozen).checkpoint;
  const Checkpoint reference = train(data, init_only).checkpoint;
  for (std::size_t li = 0; li < trained.model.layers.size(); ++li) {
    for (std::size_t k = 0; k < trained.model.layers[li].weight.data.size(); ++k) {
      CHECK(std::abs(trained.model.layers[li].weight.data[k] -
                     reference.model.layers[li].weight.data[k]) <= 1e-9);
    }
  }
  for (std::size_t c = 0; c < trained.prototypes.prototypes.size(); ++c) {
    for (std::size_t k = 0; k < trained.prototypes.prototypes[c].mean.size(); ++k) {
      CHECK(std::abs(trained.prototypes.prototypes[c].mean[k] -
                     reference.prototypes.prototypes[c].mean[k]) <= 1e-9);
    }
  }
}

TEST_CASE("train is deterministic and improves the tiny benchmark") {
  std::mt19937_64 rng(606);
  const Dataset data = tiny_dataset(rng, 16);
  TrainConfig cfg = tiny_config();
  cfg.epochs = 8;

  const TrainResult a = train(data, cfg);
  const TrainResult b = train(data, cfg);
  CHECK(a.history.size() == 8);
  for (std::size_t e = 0; e < 8; ++e) {
    CHECK(a.history[e].mean_total == b.history[e].mean_total);
    CHECK(std::isfinite(a.history[e].mean_total));
  }
  CHECK(a.checkpoint.model.head.weight.data == b.checkpoint.model.head.weight.data);
  CHECK(a.history.back().mean_total < a.history.front().mean_total);

  // Weight-decay scoping holds through training: prototypes only move via
  // the triplet branch; identical runs with lambda 0 leave them at init.
  TrainConfig no_trip = cfg;
  no_trip.loss.lambda = 0.0;
  no_trip.epochs = 3;
  TrainConfig no_trip_init = no_trip;
  no_trip_init.epochs = 0;
  const Checkpoint moved = train(data, no_trip).checkpoint;
  const Checkpoint still = train(data, no_trip_init).checkpoint;
  for (std::size_t c = 0; c < moved.prototypes.prototypes.size(); ++c) {
    CHECK(moved.prototypes.prototypes[c].mean == still.prototypes.prototypes[c].mean);
    CHECK(moved.prototypes.prototypes[c].factor_params.data ==
          still.prototypes.prototypes[c].factor_params.data);
  }
}

TEST_CASE("train config validation") {
  TrainConfig cfg = tiny_config();
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = tiny_config();
  cfg.momentum = 1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = tiny_config();
  cfg.loss.lambda = -0.5;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);

  std::mt19937_64 rng(607);
  const Dataset data = tiny_dataset(rng);
  cfg = tiny_config();
  cfg.batch_size = 4;  // below 2 x 3 categories
  CHECK_THROWS_AS(train(data, cfg), InvalidConfig);
}
