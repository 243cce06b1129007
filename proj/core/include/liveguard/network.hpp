#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "liveguard/linalg.hpp"

namespace liveguard {

enum class Activation { Relu, Tanh };

struct DenseLayer {
  Matrix weight;  // out × in
  Vector bias;    // out
};

/// Feed-forward feature extractor plus a 2-logit live/spoof head. The
/// activation is applied after every extractor layer; the head is linear.
/// Logit index 0 is live, index 1 is spoof.
struct MlpParams {
  std::vector<DenseLayer> layers;
  Activation activation = Activation::Relu;
  DenseLayer head;

  std::size_t input_dim() const {
    return layers.empty() ? head.weight.cols : layers.front().weight.cols;
  }
  std::size_t feature_dim() const { return head.weight.cols; }

  /// Checks that consecutive layer dims chain and the head matches the
  /// feature dim; raises ShapeMismatch otherwise.
  void validate() const;
};

struct NetworkSpec {
  std::vector<std::size_t> hidden_dims{32, 32};
  std::size_t feature_dim = 16;
  Activation activation = Activation::Relu;
};

/// Glorot-uniform weights, zero biases, drawn from the supplied generator.
MlpParams init_mlp(std::size_t input_dim, const NetworkSpec& spec,
                   std::mt19937_64& rng);

struct ForwardTrace {
  Vector input;
  std::vector<Vector> pre;  // per-layer pre-activations
  std::vector<Vector> act;  // per-layer activations
  Vector z;                 // final feature
  Vector logits;            // dim 2
};

ForwardTrace forward(const MlpParams& params, const Vector& x);

/// Extractor only (no head). Used by the reject path so the classifier is
/// never evaluated on rejected samples.
Vector features(const MlpParams& params, const Vector& x);

Vector head_logits(const MlpParams& params, const Vector& z);

struct LayerGrads {
  Matrix d_weight;
  Vector d_bias;
};

struct MlpGrads {
  std::vector<LayerGrads> layers;
  LayerGrads head;
  Vector d_input;
};

/// Reverse-mode gradients of (d_logitsᵀ·logits + d_zᵀ·z) w.r.t. every
/// parameter and the input. The trace must come from forward() on the same
/// params.
MlpGrads backward(const MlpParams& params, const ForwardTrace& trace,
                  const Vector& d_logits, const Vector& d_z);

}  // namespace liveguard
