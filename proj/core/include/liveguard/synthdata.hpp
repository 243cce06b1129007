#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "liveguard/linalg.hpp"

namespace liveguard {

/// One labeled input. Label grammar: "live" or "attack:<name>".
struct SampleRecord {
  std::string label;
  std::string domain;
  Vector x;
};

bool is_live_label(const std::string& label);
/// The <name> part of an attack label; empty for live.
std::string attack_name(const std::string& label);
bool valid_label(const std::string& label);

struct Dataset {
  std::size_t d_in = 0;
  std::vector<SampleRecord> samples;
};

struct ClassSpec {
  std::string label;  // "live" or "attack:<name>"
  Vector base_mean;
  double base_cov_scale = 1.0;
  bool in_training = true;
};

struct DomainSpec {
  std::string name;
  Vector shift;
  double scale = 1.0;
  bool in_training = true;
};

/// One emitted test split: the named classes crossed with the named domains.
struct ScenarioSpec {
  std::string name;
  std::vector<std::string> classes;  // labels
  std::vector<std::string> domains;  // domain names
};

struct SynthConfig {
  std::size_t d_in = 8;
  std::vector<ClassSpec> classes;
  std::vector<DomainSpec> domains;
  std::vector<ScenarioSpec> scenarios;
  std::size_t train_count_per_cell = 400;
  std::size_t test_count_per_cell = 200;
  std::uint64_t seed = 7;

  void validate() const;

  /// The desk benchmark: 8-dim inputs; live/print/replay training classes
  /// plus a held-out mask class; three training domains and one shifted
  /// held-out domain; four test scenarios (known, unknown, mixed,
  /// mixed_known_domains).
  static SynthConfig desk_default();
};

struct GeneratedData {
  Dataset train;
  std::vector<std::pair<std::string, Dataset>> tests;  // keyed by scenario name
};

/// Draws sample = base_mean·scale + shift + base_cov_scale·scale·noise from
/// the seeded generator. The training split contains only in-training
/// classes crossed with in-training domains. Deterministic per seed.
GeneratedData generate(const SynthConfig& config);

/// CSV with header label,domain,f0,...,f{d_in-1}; LF line endings; values
/// as shortest round-trip decimals.
void write_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_csv(const std::filesystem::path& path);

}  // namespace liveguard
