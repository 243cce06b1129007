#include "liveguard/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "liveguard/text.hpp"

namespace liveguard {

double confidence(const PrototypeSet& set, const Vector& z) {
  return -nearest_prototype(set, z).distance;
}

double live_probability(const Vector& logits) {
  if (logits.size() != 2) {
    throw DimensionMismatch("live_probability: expected 2 logits");
  }
  const double m = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - m);
  const double e1 = std::exp(logits[1] - m);
  return e0 / (e0 + e1);
}

Decision decide(const MlpParams& model, const PrototypeSet& set, const Vector& x,
                const ConfidenceThreshold& threshold, DecideTrace* trace) {
  const Vector z = features(model, x);
  const NearestResult nearest = nearest_prototype(set, z);
  const double conf = -nearest.distance;
  if (trace != nullptr) trace->confidence = conf;

  if (conf >= threshold.value) {
    if (trace != nullptr) ++trace->head_evals;
    const Vector logits = head_logits(model, z);
    Accept accept;
    accept.live_probability = live_probability(logits);
    accept.predicted_live = accept.live_probability >= 0.5;
    return accept;
  }

  Reject reject;
  reject.alert = "low confidence: nearest category '" + nearest.category.name +
                 "' at squared distance " + format_double(nearest.distance);
  return reject;
}

ConfidenceThreshold quantile_threshold(const std::vector<double>& confidences, double p) {
  if (confidences.empty()) {
    throw EmptyList("quantile_threshold: empty confidence list");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidQuantile("quantile_threshold: p must be in [0, 1], got " +
                          format_double(p));
  }

  ConfidenceThreshold thr;
  thr.origin = ConfidenceThreshold::Origin::Quantile;
  thr.quantile = p;
  if (p == 0.0) {
    thr.value = -std::numeric_limits<double>::infinity();
    return thr;
  }
  if (p == 1.0) {
    thr.value = std::numeric_limits<double>::infinity();
    return thr;
  }

  const std::size_t n = confidences.size();
  const auto k = static_cast<std::size_t>(
      std::floor(p * static_cast<double>(n)));
  if (k >= n) {
    thr.value = std::numeric_limits<double>::infinity();
    return thr;
  }
  std::vector<double> sorted = confidences;
  std::sort(sorted.begin(), sorted.end());
  thr.value = sorted[k];
  return thr;
}

}  // namespace liveguard
