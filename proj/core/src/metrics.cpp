#include "liveguard/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "liveguard/text.hpp"

namespace liveguard {

namespace {

void check_both_classes(std::span<const ScoredSample> samples, const char* where) {
  bool has_live = false;
  bool has_spoof = false;
  for (const auto& s : samples) {
    if (s.is_live) has_live = true; else has_spoof = true;
    if (has_live && has_spoof) return;
  }
  throw MissingClass(std::string(where) + ": need at least one live and one spoof sample");
}

const std::string& group_of(const ScoredSample& s, GroupKey key) {
  return key == GroupKey::AttackType ? s.group : s.domain;
}

}  // namespace

std::vector<ScoredSample> score_dataset(const MlpParams& model,
                                        const PrototypeSet& set, const Dataset& data) {
  std::vector<ScoredSample> scored;
  scored.reserve(data.samples.size());
  for (const auto& rec : data.samples) {
    const ForwardTrace trace = forward(model, rec.x);
    ScoredSample s;
    s.is_live = is_live_label(rec.label);
    s.live_score = live_probability(trace.logits);
    s.confidence = confidence(set, trace.z);
    s.group = s.is_live ? "live" : attack_name(rec.label);
    s.domain = rec.domain;
    scored.push_back(std::move(s));
  }
  return scored;
}

std::vector<double> score_confidences(const MlpParams& model, const PrototypeSet& set,
                                      const Dataset& data) {
  std::vector<double> confidences;
  confidences.reserve(data.samples.size());
  for (const auto& rec : data.samples) {
    confidences.push_back(confidence(set, features(model, rec.x)));
  }
  return confidences;
}

FarFrr far_frr(std::span<const ScoredSample> samples, double threshold) {
  check_both_classes(samples, "far_frr");
  std::size_t n_live = 0, n_spoof = 0, fa = 0, fr = 0;
  for (const auto& s : samples) {
    if (s.is_live) {
      ++n_live;
      if (s.live_score < threshold) ++fr;
    } else {
      ++n_spoof;
      if (s.live_score >= threshold) ++fa;
    }
  }
  return {static_cast<double>(fa) / static_cast<double>(n_spoof),
          static_cast<double>(fr) / static_cast<double>(n_live)};
}

double hter(std::span<const ScoredSample> samples, HterMode mode) {
  check_both_classes(samples, "hter");
  if (mode == HterMode::FixedHalf) {
    const FarFrr r = far_frr(samples, 0.5);
    return 100.0 * (r.far + r.frr) / 2.0;
  }

  std::set<double> thresholds;
  for (const auto& s : samples) thresholds.insert(s.live_score);

  double best_gap = std::numeric_limits<double>::infinity();
  double best_hter = 100.0;
  // Ascending candidate order; strict improvement keeps the lowest threshold.
  for (double t : thresholds) {
    const FarFrr r = far_frr(samples, t);
    const double gap = std::abs(r.far - r.frr);
    if (gap < best_gap) {
      best_gap = gap;
      best_hter = 100.0 * (r.far + r.frr) / 2.0;
    }
  }
  return best_hter;
}

double auc(std::span<const ScoredSample> samples) {
  check_both_classes(samples, "auc");
  std::vector<double> live, spoof;
  for (const auto& s : samples) {
    (s.is_live ? live : spoof).push_back(s.live_score);
  }
  double ordered = 0.0;
  for (double l : live) {
    for (double sp : spoof) {
      if (l > sp) {
        ordered += 1.0;
      } else if (l == sp) {
        ordered += 0.5;
      }
    }
  }
  return 100.0 * ordered / (static_cast<double>(live.size()) * static_cast<double>(spoof.size()));
}

std::vector<EvalRow> filtered_eval(std::span<const ScoredSample> samples,
                                   std::vector<double> quantiles, HterMode mode) {
  if (samples.empty()) throw EmptyList("filtered_eval: no samples");
  std::sort(quantiles.begin(), quantiles.end());
  quantiles.erase(std::unique(quantiles.begin(), quantiles.end()), quantiles.end());

  std::vector<double> confidences;
  confidences.reserve(samples.size());
  for (const auto& s : samples) confidences.push_back(s.confidence);

  std::vector<EvalRow> rows;
  rows.reserve(quantiles.size());
  for (double p : quantiles) {
    const ConfidenceThreshold thr = quantile_threshold(confidences, p);
    std::vector<ScoredSample> retained;
    retained.reserve(samples.size());
    for (const auto& s : samples) {
      if (s.confidence >= thr.value) retained.push_back(s);
    }
    EvalRow row;
    row.p = p;
    row.retained = retained.size();
    row.retained_frac =
        static_cast<double>(retained.size()) / static_cast<double>(samples.size());
    bool has_live = false, has_spoof = false;
    for (const auto& s : retained) (s.is_live ? has_live : has_spoof) = true;
    if (!retained.empty() && has_live && has_spoof) {
      row.hter = hter(retained, mode);
      row.auc = auc(retained);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CdfCurve> confidence_cdf(std::span<const ScoredSample> samples,
                                     GroupKey key, std::size_t n_points) {
  if (samples.empty()) throw EmptyList("confidence_cdf: no samples");
  if (n_points < 2) throw InvalidConfig("confidence_cdf: need at least 2 points");

  double lo = samples[0].confidence;
  double hi = samples[0].confidence;
  for (const auto& s : samples) {
    lo = std::min(lo, s.confidence);
    hi = std::max(hi, s.confidence);
  }
  const bool degenerate = hi == lo;

  std::map<std::string, std::vector<double>> by_group;
  for (const auto& s : samples) {
    // Degenerate range: every sample maps to a step at 0.5.
    const double norm = degenerate ? 0.5 : (s.confidence - lo) / (hi - lo);
    by_group[group_of(s, key)].push_back(norm);
  }

  std::vector<CdfCurve> curves;
  for (auto& [group, values] : by_group) {
    std::sort(values.begin(), values.end());
    CdfCurve curve;
    curve.group = group;
    curve.points.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(n_points - 1);
      const auto below = static_cast<std::size_t>(
          std::upper_bound(values.begin(), values.end(), x) - values.begin());
      curve.points.emplace_back(
          x, static_cast<double>(below) / static_cast<double>(values.size()));
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

std::vector<GroupStats> groupby_report(std::span<const ScoredSample> samples,
                                       GroupKey key) {
  if (samples.empty()) throw EmptyList("groupby_report: no samples");

  std::map<std::string, std::vector<double>> by_group;
  for (const auto& s : samples) by_group[group_of(s, key)].push_back(s.confidence);

  std::vector<GroupStats> stats;
  for (auto& [group, values] : by_group) {
    std::sort(values.begin(), values.end());
    GroupStats g;
    g.group = group;
    g.count = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    g.mean_conf = sum / static_cast<double>(values.size());
    const std::size_t n = values.size();
    g.median_conf = n % 2 == 1 ? values[n / 2]
                               : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    for (std::size_t i = 1; i <= 9; ++i) {
      // Lower empirical quantile: the ceil(i·n/10)-th smallest value.
      const std::size_t idx = (i * n + 9) / 10 - 1;
      g.deciles[i - 1] = values[idx];
    }
    stats.push_back(std::move(g));
  }
  return stats;
}

EvalReport evaluate(std::span<const ScoredSample> samples,
                    std::vector<double> quantiles, HterMode mode,
                    std::size_t cdf_points) {
  EvalReport report;
  report.rows = filtered_eval(samples, std::move(quantiles), mode);
  report.cdf = confidence_cdf(samples, GroupKey::AttackType, cdf_points);
  report.groups = groupby_report(samples, GroupKey::AttackType);
  return report;
}

namespace {

std::string cell(const std::optional<double>& v) {
  return v ? format_double(*v) : "NA";
}

std::ofstream open_out(const std::filesystem::path& path, const char* what) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError(std::string(what) + ": cannot open " + path.string());
  return file;
}

}  // namespace

void write_eval_rows_csv(const std::vector<EvalRow>& rows,
                         const std::filesystem::path& path) {
  auto file = open_out(path, "write_eval_rows_csv");
  file << "p,retained,retained_frac,hter,auc\n";
  for (const auto& row : rows) {
    file << format_double(row.p) << ',' << row.retained << ','
         << format_double(row.retained_frac) << ',' << cell(row.hter) << ','
         << cell(row.auc) << "\n";
  }
}

void write_cdf_csv(const CdfCurve& curve, const std::filesystem::path& path) {
  auto file = open_out(path, "write_cdf_csv");
  file << "confidence_norm,cum_frac\n";
  for (const auto& [x, y] : curve.points) {
    file << format_double(x) << ',' << format_double(y) << "\n";
  }
}

void write_groups_csv(const std::vector<GroupStats>& groups,
                      const std::filesystem::path& path) {
  auto file = open_out(path, "write_groups_csv");
  file << "group,count,mean_conf,median_conf";
  for (int i = 1; i <= 9; ++i) file << ",d" << i;
  file << "\n";
  for (const auto& g : groups) {
    file << g.group << ',' << g.count << ',' << format_double(g.mean_conf) << ','
         << format_double(g.median_conf);
    for (double d : g.deciles) file << ',' << format_double(d);
    file << "\n";
  }
}

void write_cdf_svg(const std::vector<CdfCurve>& curves,
                   const std::filesystem::path& path) {
  auto file = open_out(path, "write_cdf_svg");
  constexpr int kWidth = 640;
  constexpr int kHeight = 420;
  constexpr int kMargin = 48;
  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};

  file << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
       << "\" height=\"" << kHeight << "\">\n";
  file << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" fill=\"white\"/>\n";
  file << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\""
       << kWidth - kMargin << "\" y2=\"" << kHeight - kMargin
       << "\" stroke=\"black\"/>\n";
  file << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin
       << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  file << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
       << "\" text-anchor=\"middle\" font-size=\"12\">normalized confidence</text>\n";
  file << "<text x=\"14\" y=\"" << kHeight / 2
       << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
       << kHeight / 2 << ")\">cumulative fraction</text>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = kColors[c % (sizeof(kColors) / sizeof(kColors[0]))];
    file << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : curves[c].points) {
      const double px = kMargin + x * plot_w;
      const double py = kHeight - kMargin - y * plot_h;
      file << format_double(px) << ',' << format_double(py) << ' ';
    }
    file << "\"/>\n";
    file << "<text x=\"" << kWidth - kMargin + 4 << "\" y=\""
         << kMargin + 16 * static_cast<int>(c) << "\" font-size=\"11\" fill=\"" << color
         << "\">" << curves[c].group << "</text>\n";
  }
  file << "</svg>\n";
}

}  // namespace liveguard
