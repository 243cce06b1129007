#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "liveguard/losses.hpp"
#include "liveguard/network.hpp"
#include "liveguard/prototypes.hpp"
#include "liveguard/synthdata.hpp"

namespace liveguard {

/// How training data maps onto prototypes.
enum class GroupingMode { OneClass, Binary, DomainBased, AttackBased };

enum class PrototypeShapeMode { Auto, Full, Diagonal };

struct TrainConfig {
  double learning_rate = 0.05;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  std::uint64_t seed = 7;
  LossConfig loss;
  GroupingMode grouping = GroupingMode::AttackBased;
  PrototypeShapeMode prototype_shape = PrototypeShapeMode::Auto;
  std::size_t warmup_epochs_for_means = 1;
  NetworkSpec network;

  void validate() const;

  /// Auto resolves to Diagonal above feature dim 32, Full otherwise.
  PrototypeShape resolve_shape() const;
};

/// Category list induced by a grouping mode plus the per-sample assignment.
struct CategoryLayout {
  std::vector<CategoryId> categories;
  std::vector<std::size_t> assignment;  // one entry per dataset sample
};

CategoryLayout build_category_layout(const Dataset& data, GroupingMode grouping);

/// Prototypes with zero means and identity precision for the given layout.
PrototypeSet build_prototype_set(const CategoryLayout& layout, std::size_t dim,
                                 PrototypeShape shape);

/// Sets each prototype mean to the mean feature of its category (repeated
/// warmup passes change nothing numerically since no parameters move) and
/// resets every factor to the identity.
void init_prototypes(PrototypeSet& set, const MlpParams& model, const Dataset& data,
                     const CategoryLayout& layout, std::size_t warmup_epochs);

struct ModelGrads {
  std::vector<LayerGrads> layers;
  LayerGrads head;
  std::vector<PrototypeGrads> prototypes;
};

ModelGrads zero_grads_like(const MlpParams& model, const PrototypeSet& set);

struct BatchResult {
  double ce = 0.0;
  double triplet = 0.0;
  double total = 0.0;
  ModelGrads grads;
};

/// Losses and full-model gradients of ce + lambda·triplet over one batch of
/// sample indices. CE is batch-mean; the triplet reduction follows the loss
/// config.
BatchResult compute_batch(const MlpParams& model, const PrototypeSet& set,
                          const Dataset& data, const CategoryLayout& layout,
                          std::span<const std::size_t> batch, const LossConfig& loss);

/// Momentum SGD update: v <- momentum·v + g (+ weight_decay·θ for network
/// weight matrices only); θ <- θ − learning_rate·v. Raises NonFiniteGradient
/// before touching any state when a gradient entry is NaN/Inf.
void sgd_step(MlpParams& model, PrototypeSet& set, const ModelGrads& grads,
              ModelGrads& velocity, const TrainConfig& cfg);

/// Stratified batches: every batch holds at least two samples of every
/// category, shuffling is a pure function of (seed, epoch), remainder
/// samples are dropped.
std::vector<std::vector<std::size_t>> make_batches(const CategoryLayout& layout,
                                                   std::size_t batch_size,
                                                   std::uint64_t seed,
                                                   std::size_t epoch);

struct EpochStats {
  std::size_t epoch = 0;
  double mean_ce = 0.0;
  double mean_triplet = 0.0;
  double mean_total = 0.0;
};

constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  int format_version = kCheckpointFormatVersion;
  TrainConfig config;
  MlpParams model;
  PrototypeSet prototypes;
  std::size_t epochs_completed = 0;
  std::string rng_state;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochStats> history;
};

TrainResult train(const Dataset& data, const TrainConfig& cfg);

/// Text checkpoint with a crc32 integrity field; save→load→save is
/// byte-identical.
void save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string grouping_to_string(GroupingMode mode);
GroupingMode grouping_from_string(const std::string& text);

}  // namespace liveguard
