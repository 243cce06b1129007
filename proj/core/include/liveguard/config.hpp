#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "liveguard/metrics.hpp"
#include "liveguard/synthdata.hpp"
#include "liveguard/trainer.hpp"

namespace liveguard {

struct EvalConfig {
  std::vector<double> quantiles{0.0, 0.3, 0.5, 0.7};
  HterMode hter_mode = HterMode::EqualErrorRate;
  std::size_t cdf_points = 41;
  bool emit_svg = false;
};

/// Merged run configuration: one JSON document with optional "synth",
/// "train", and "eval" sections. Every field has a default (the desk
/// benchmark); unknown keys are rejected with the offending path named.
struct RunConfig {
  SynthConfig synth;
  TrainConfig train;
  EvalConfig eval;

  static RunConfig defaults();
};

RunConfig parse_run_config(const std::string& text, const std::string& origin);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace liveguard
