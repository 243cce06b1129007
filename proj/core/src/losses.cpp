#include "liveguard/losses.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace liveguard {

void LossConfig::validate() const {
  if (!(margin >= 0.0)) throw InvalidConfig("loss.margin must be >= 0");
  if (!(lambda >= 0.0)) throw InvalidConfig("loss.lambda must be >= 0");
}

CrossEntropyResult cross_entropy(const Vector& logits, bool is_live) {
  if (logits.size() != 2) {
    throw DimensionMismatch("cross_entropy: expected 2 logits, got " +
                            std::to_string(logits.size()));
  }
  const double m = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - m);
  const double e1 = std::exp(logits[1] - m);
  const double sum = e0 + e1;
  const double p0 = e0 / sum;
  const double p1 = e1 / sum;
  const std::size_t label = is_live ? 0 : 1;

  CrossEntropyResult r;
  // -log softmax[label], written via log-sum-exp so saturated logits stay finite.
  r.loss = std::log(sum) + m - logits[label];
  r.d_logits = {p0, p1};
  r.d_logits[label] -= 1.0;
  return r;
}

TripletResult md_triplet(const PrototypeSet& set, std::span<const Vector> features,
                         std::span<const std::size_t> categories,
                         const LossConfig& cfg) {
  if (features.empty()) throw EmptyBatch("md_triplet: empty batch");
  if (features.size() != categories.size()) {
    throw ShapeMismatch("md_triplet: features and categories disagree in length");
  }
  const std::size_t n_protos = set.prototypes.size();
  if (n_protos == 0) throw EmptySet("md_triplet: empty prototype set");

  TripletResult result;
  result.d_features.resize(features.size());
  result.d_prototypes.resize(n_protos);
  for (std::size_t q = 0; q < n_protos; ++q) {
    result.d_prototypes[q].d_mean = Vector(set.dim, 0.0);
    result.d_prototypes[q].d_factor_params = Matrix(set.dim, set.dim);
  }

  const double scale = cfg.reduction == LossReduction::Mean
                           ? 1.0 / static_cast<double>(features.size())
                           : 1.0;

  double loss_sum = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::size_t own = categories[i];
    if (own >= n_protos) {
      throw UnknownCategory("md_triplet: category index " + std::to_string(own) +
                            " not in prototype set of size " + std::to_string(n_protos));
    }
    const Vector& z = features[i];
    const double d_own = squared_mahalanobis(set.prototypes[own], z);

    // Argmin over the other prototypes; ties break toward the lowest index.
    std::size_t other = n_protos;
    double d_other = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < n_protos; ++q) {
      if (q == own) continue;
      const double d = squared_mahalanobis(set.prototypes[q], z);
      if (d < d_other) {
        d_other = d;
        other = q;
      }
    }

    const bool has_other = other < n_protos;
    const double term = has_other ? d_own - d_other + cfg.margin : d_own + cfg.margin;
    const double contribution = cfg.hinge ? std::max(0.0, term) : term;
    loss_sum += contribution;

    // Subgradient: an inactive hinge (term <= 0) contributes nothing.
    const bool active = !cfg.hinge || term > 0.0;
    result.d_features[i] = Vector(z.size(), 0.0);
    if (!active) continue;

    const MahalanobisGrads g_own = squared_mahalanobis_grads(set.prototypes[own], z);
    axpy(scale, g_own.d_z, result.d_features[i]);
    axpy(scale, g_own.d_mean, result.d_prototypes[own].d_mean);
    for (std::size_t k = 0; k < g_own.d_factor_params.data.size(); ++k) {
      result.d_prototypes[own].d_factor_params.data[k] +=
          scale * g_own.d_factor_params.data[k];
    }

    if (has_other) {
      const MahalanobisGrads g_other =
          squared_mahalanobis_grads(set.prototypes[other], z);
      axpy(-scale, g_other.d_z, result.d_features[i]);
      axpy(-scale, g_other.d_mean, result.d_prototypes[other].d_mean);
      for (std::size_t k = 0; k < g_other.d_factor_params.data.size(); ++k) {
        result.d_prototypes[other].d_factor_params.data[k] -=
            scale * g_other.d_factor_params.data[k];
      }
    }
  }

  result.loss = loss_sum * scale;
  return result;
}

double total_loss(double ce, double triplet, const LossConfig& cfg) {
  return ce + cfg.lambda * triplet;
}

}  // namespace liveguard
