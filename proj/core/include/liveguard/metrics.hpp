#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "liveguard/inference.hpp"
#include "liveguard/synthdata.hpp"

namespace liveguard {

/// Classifier output joined with the confidence score for one test sample.
struct ScoredSample {
  bool is_live = false;
  double live_score = 0.0;  // classifier's live probability
  double confidence = 0.0;  // negated minimum squared Mahalanobis distance
  std::string group;        // attack-type tag ("live" for live samples)
  std::string domain;
};

/// Classifier score + confidence for every sample of a labeled dataset, in
/// dataset order. Group is the attack-type tag, "live" for live samples.
std::vector<ScoredSample> score_dataset(const MlpParams& model,
                                        const PrototypeSet& set, const Dataset& data);

/// Confidence only (the classifier head is not evaluated).
std::vector<double> score_confidences(const MlpParams& model, const PrototypeSet& set,
                                      const Dataset& data);

struct FarFrr {
  double far = 0.0;  // spoof accepted as live
  double frr = 0.0;  // live judged spoof
};

/// FAR = #{spoof with live_score >= t}/#spoof, FRR = #{live with
/// live_score < t}/#live. Raises MissingClass unless both classes appear.
FarFrr far_frr(std::span<const ScoredSample> samples, double threshold);

enum class HterMode { EqualErrorRate, FixedHalf };

/// Half total error rate in percent. EqualErrorRate sweeps the distinct
/// score values and picks the threshold minimizing |FAR − FRR| (ties toward
/// the lower threshold); FixedHalf evaluates at 0.5.
double hter(std::span<const ScoredSample> samples, HterMode mode = HterMode::EqualErrorRate);

/// Mann–Whitney AUC in percent: ordered live/spoof pairs plus half ties.
double auc(std::span<const ScoredSample> samples);

struct EvalRow {
  double p = 0.0;
  std::size_t retained = 0;
  double retained_frac = 0.0;
  std::optional<double> hter;  // empty when the remainder is degenerate
  std::optional<double> auc;
};

/// For each quantile p: derive the confidence threshold, drop rejected
/// samples, score the remainder. Degenerate remainders (empty or single
/// class) yield rows with empty metrics. Rows come back sorted by p.
std::vector<EvalRow> filtered_eval(std::span<const ScoredSample> samples,
                                   std::vector<double> quantiles,
                                   HterMode mode = HterMode::EqualErrorRate);

enum class GroupKey { AttackType, Domain };

struct CdfCurve {
  std::string group;
  std::vector<std::pair<double, double>> points;  // (confidence_norm, cum_frac)
};

/// Empirical CDF per group after min–max normalizing confidences over the
/// union of all samples. A degenerate (constant) range emits a step at 0.5.
std::vector<CdfCurve> confidence_cdf(std::span<const ScoredSample> samples,
                                     GroupKey key, std::size_t n_points);

struct GroupStats {
  std::string group;
  std::size_t count = 0;
  double mean_conf = 0.0;
  double median_conf = 0.0;
  std::array<double, 9> deciles{};  // d1..d9, lower empirical quantiles
};

/// Per-group confidence statistics, groups sorted lexicographically.
std::vector<GroupStats> groupby_report(std::span<const ScoredSample> samples,
                                       GroupKey key);

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<CdfCurve> cdf;
  std::vector<GroupStats> groups;
};

EvalReport evaluate(std::span<const ScoredSample> samples,
                    std::vector<double> quantiles, HterMode mode,
                    std::size_t cdf_points);

/// CSV emission. Degenerate metric cells render as "NA".
void write_eval_rows_csv(const std::vector<EvalRow>& rows,
                         const std::filesystem::path& path);
void write_cdf_csv(const CdfCurve& curve, const std::filesystem::path& path);
void write_groups_csv(const std::vector<GroupStats>& groups,
                      const std::filesystem::path& path);

/// Single-file SVG line chart of the CDF curves (plain text emission).
void write_cdf_svg(const std::vector<CdfCurve>& curves,
                   const std::filesystem::path& path);

}  // namespace liveguard
