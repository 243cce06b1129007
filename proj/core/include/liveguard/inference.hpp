#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "liveguard/network.hpp"
#include "liveguard/prototypes.hpp"

namespace liveguard {

struct Accept {
  double live_probability = 0.0;
  bool predicted_live = false;  // live iff live_probability >= 0.5
};

struct Reject {
  std::string alert;  // names the nearest category and its distance
};

using Decision = std::variant<Accept, Reject>;

struct ConfidenceThreshold {
  enum class Origin { Fixed, Quantile };

  double value = 0.0;
  Origin origin = Origin::Fixed;
  double quantile = 0.0;  // meaningful when origin == Quantile

  static ConfidenceThreshold fixed(double v) { return {v, Origin::Fixed, 0.0}; }
};

/// Prediction confidence: the negated minimum squared Mahalanobis distance
/// over the prototype set. Always <= 0; equals 0 only at a prototype mean.
double confidence(const PrototypeSet& set, const Vector& z);

/// Optional instrumentation for decide().
struct DecideTrace {
  double confidence = 0.0;
  std::size_t head_evals = 0;
};

/// Extracts z = f(x) once; accepts (classifier output) when the confidence
/// clears the threshold (>= semantics), otherwise rejects with an alert.
/// The classifier head is never evaluated on rejected samples.
Decision decide(const MlpParams& model, const PrototypeSet& set, const Vector& x,
                const ConfidenceThreshold& threshold, DecideTrace* trace = nullptr);

/// Empirical quantile threshold: with k = floor(p·N), returns the (k+1)-th
/// smallest confidence so that exactly the k lowest-confidence samples fall
/// strictly below it (fewer when ties sit at the cut). p = 0 gives -inf
/// (reject none), p = 1 gives +inf (reject all).
ConfidenceThreshold quantile_threshold(const std::vector<double>& confidences, double p);

/// softmax(logits)[0], the live probability of a 2-logit output.
double live_probability(const Vector& logits);

}  // namespace liveguard
