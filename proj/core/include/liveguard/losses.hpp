#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "liveguard/linalg.hpp"
#include "liveguard/prototypes.hpp"

namespace liveguard {

enum class LossReduction { Mean, Sum };

struct LossConfig {
  double margin = 1.0;
  /// Weight of the triplet branch in the combined objective.
  double lambda = 0.5;
  /// Apply max(0,·) per sample. Off reproduces the literal (unbounded
  /// below) triplet formula.
  bool hinge = true;
  LossReduction reduction = LossReduction::Mean;

  void validate() const;
};

struct CrossEntropyResult {
  double loss = 0.0;
  Vector d_logits;
};

/// Binary cross-entropy over 2 logits, max-subtracted for stability.
/// Label index 0 is live, 1 is spoof.
CrossEntropyResult cross_entropy(const Vector& logits, bool is_live);

struct PrototypeGrads {
  Vector d_mean;
  Matrix d_factor_params;
};

struct TripletResult {
  double loss = 0.0;
  std::vector<Vector> d_features;            // one per batch sample
  std::vector<PrototypeGrads> d_prototypes;  // aligned with set.prototypes
};

/// Mahalanobis-distance triplet loss over a batch of features. Per sample:
/// distance to the own prototype minus the minimum distance over all other
/// prototypes, plus the margin. Gradients flow only to the own prototype
/// and the argmin other (ties toward the lowest index). With a single
/// prototype in the set the pushing term is absent and the loss reduces to
/// the pull term plus margin.
TripletResult md_triplet(const PrototypeSet& set, std::span<const Vector> features,
                         std::span<const std::size_t> categories,
                         const LossConfig& cfg);

/// Combined objective: ce + lambda·triplet.
double total_loss(double ce, double triplet, const LossConfig& cfg);

}  // namespace liveguard
