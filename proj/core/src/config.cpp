#include "liveguard/config.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"

namespace liveguard {

namespace {

using detail::json;

ClassSpec class_spec_from_json(const json& j, const std::string& where) {
  detail::reject_unknown_keys(j, {"label", "mean", "cov_scale", "in_training"}, where);
  ClassSpec spec;
  if (!j.contains("label") || !j.contains("mean")) {
    throw InvalidConfig(where + ": class needs label and mean");
  }
  spec.label = j.at("label").get<std::string>();
  spec.base_mean = detail::vector_from_json(j.at("mean"), where + ".mean");
  if (j.contains("cov_scale")) spec.base_cov_scale = j.at("cov_scale").get<double>();
  if (j.contains("in_training")) spec.in_training = j.at("in_training").get<bool>();
  return spec;
}

DomainSpec domain_spec_from_json(const json& j, const std::string& where) {
  detail::reject_unknown_keys(j, {"name", "shift", "scale", "in_training"}, where);
  DomainSpec spec;
  if (!j.contains("name") || !j.contains("shift")) {
    throw InvalidConfig(where + ": domain needs name and shift");
  }
  spec.name = j.at("name").get<std::string>();
  spec.shift = detail::vector_from_json(j.at("shift"), where + ".shift");
  if (j.contains("scale")) spec.scale = j.at("scale").get<double>();
  if (j.contains("in_training")) spec.in_training = j.at("in_training").get<bool>();
  return spec;
}

ScenarioSpec scenario_spec_from_json(const json& j, const std::string& where) {
  detail::reject_unknown_keys(j, {"name", "classes", "domains"}, where);
  ScenarioSpec spec;
  if (!j.contains("name") || !j.contains("classes") || !j.contains("domains")) {
    throw InvalidConfig(where + ": scenario needs name, classes, domains");
  }
  spec.name = j.at("name").get<std::string>();
  for (const auto& c : j.at("classes")) spec.classes.push_back(c.get<std::string>());
  for (const auto& d : j.at("domains")) spec.domains.push_back(d.get<std::string>());
  return spec;
}

void synth_config_from_json(const json& j, SynthConfig& cfg, const std::string& where) {
  detail::reject_unknown_keys(j,
                              {"d_in", "classes", "domains", "scenarios",
                               "train_count_per_cell", "test_count_per_cell", "seed"},
                              where);
  if (j.contains("d_in")) cfg.d_in = j.at("d_in").get<std::size_t>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("train_count_per_cell")) {
    cfg.train_count_per_cell = j.at("train_count_per_cell").get<std::size_t>();
  }
  if (j.contains("test_count_per_cell")) {
    cfg.test_count_per_cell = j.at("test_count_per_cell").get<std::size_t>();
  }
  if (j.contains("classes")) {
    cfg.classes.clear();
    const auto& arr = j.at("classes");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      cfg.classes.push_back(class_spec_from_json(
          arr[i], where + ".classes[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("domains")) {
    cfg.domains.clear();
    const auto& arr = j.at("domains");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      cfg.domains.push_back(domain_spec_from_json(
          arr[i], where + ".domains[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("scenarios")) {
    cfg.scenarios.clear();
    const auto& arr = j.at("scenarios");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      cfg.scenarios.push_back(scenario_spec_from_json(
          arr[i], where + ".scenarios[" + std::to_string(i) + "]"));
    }
  }
}

void eval_config_from_json(const json& j, EvalConfig& cfg, const std::string& where) {
  detail::reject_unknown_keys(j, {"quantiles", "hter_mode", "cdf_points", "emit_svg"},
                              where);
  if (j.contains("quantiles")) {
    cfg.quantiles.clear();
    const auto& arr = j.at("quantiles");
    if (!arr.is_array()) throw InvalidConfig(where + ".quantiles: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_number()) {
        throw InvalidConfig(where + ".quantiles[" + std::to_string(i) + "]: expected a number");
      }
      const double p = arr[i].get<double>();
      if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidConfig(where + ".quantiles[" + std::to_string(i) +
                            "]: quantile must be in [0, 1]");
      }
      cfg.quantiles.push_back(p);
    }
  }
  if (j.contains("hter_mode")) {
    const auto s = j.at("hter_mode").get<std::string>();
    if (s == "eer") {
      cfg.hter_mode = HterMode::EqualErrorRate;
    } else if (s == "fixed0.5") {
      cfg.hter_mode = HterMode::FixedHalf;
    } else {
      throw InvalidConfig(where + ".hter_mode: expected 'eer' or 'fixed0.5', got '" + s + "'");
    }
  }
  if (j.contains("cdf_points")) cfg.cdf_points = j.at("cdf_points").get<std::size_t>();
  if (j.contains("emit_svg")) cfg.emit_svg = j.at("emit_svg").get<bool>();
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig cfg;
  cfg.synth = SynthConfig::desk_default();
  return cfg;
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidConfig(origin + ": not valid JSON (" + e.what() + ")");
  }
  detail::reject_unknown_keys(root, {"synth", "train", "eval"}, origin);

  RunConfig cfg = RunConfig::defaults();
  try {
    if (root.contains("synth")) synth_config_from_json(root.at("synth"), cfg.synth, "synth");
    if (root.contains("train")) {
      detail::train_config_from_json(root.at("train"), cfg.train, "train");
    }
    if (root.contains("eval")) eval_config_from_json(root.at("eval"), cfg.eval, "eval");
  } catch (const json::exception& e) {
    throw InvalidConfig(origin + ": " + e.what());
  }
  cfg.synth.validate();
  cfg.train.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("config: cannot open " + path.string());
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_run_config(buffer.str(), path.string());
}

}  // namespace liveguard
