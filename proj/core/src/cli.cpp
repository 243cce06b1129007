#include "liveguard/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "liveguard/config.hpp"
#include "liveguard/inference.hpp"
#include "liveguard/metrics.hpp"
#include "liveguard/synthdata.hpp"
#include "liveguard/text.hpp"
#include "liveguard/trainer.hpp"

namespace liveguard {

namespace fs = std::filesystem;

namespace {

std::vector<double> parse_quantile_list(const std::string& text) {
  std::vector<double> quantiles;
  if (text.empty()) return quantiles;
  for (const auto& part : split(text, ',')) {
    if (part.empty()) continue;
    const auto value = parse_double(part);
    if (!value || !(*value >= 0.0 && *value <= 1.0)) {
      throw InvalidConfig("--quantiles: '" + part + "' is not a quantile in [0, 1]");
    }
    quantiles.push_back(*value);
  }
  return quantiles;
}

struct ThresholdSpec {
  enum class Kind { Fixed, Quantile } kind = Kind::Fixed;
  double value = 0.0;
  double p = 0.0;
  std::string calibration_path;
};

ThresholdSpec parse_threshold_spec(const std::string& text) {
  ThresholdSpec spec;
  if (text.rfind("fixed:", 0) == 0) {
    const auto value = parse_double(text.substr(6));
    if (!value) throw InvalidConfig("--threshold: bad fixed value in '" + text + "'");
    spec.kind = ThresholdSpec::Kind::Fixed;
    spec.value = *value;
    return spec;
  }
  if (text.rfind("quantile:", 0) == 0) {
    const std::string rest = text.substr(9);
    const auto sep = rest.find(':');
    if (sep == std::string::npos) {
      throw InvalidConfig("--threshold: quantile mode needs quantile:<p>:<calibration csv>");
    }
    const auto p = parse_double(rest.substr(0, sep));
    if (!p || !(*p >= 0.0 && *p <= 1.0)) {
      throw InvalidConfig("--threshold: quantile p must be in [0, 1]");
    }
    spec.kind = ThresholdSpec::Kind::Quantile;
    spec.p = *p;
    spec.calibration_path = rest.substr(sep + 1);
    if (spec.calibration_path.empty()) {
      throw InvalidConfig("--threshold: missing calibration csv path");
    }
    return spec;
  }
  throw InvalidConfig("--threshold: expected fixed:<v> or quantile:<p>:<csv>, got '" +
                      text + "'");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

int cmd_generate(const RunConfig& cfg, const fs::path& out_dir, std::ostream& err) {
  ensure_dir(out_dir);
  const GeneratedData data = generate(cfg.synth);
  write_csv(data.train, out_dir / "train.csv");
  err << "wrote " << (out_dir / "train.csv").string() << " (" << data.train.samples.size()
      << " samples)\n";
  for (const auto& [name, split] : data.tests) {
    const fs::path path = out_dir / ("test_" + name + ".csv");
    write_csv(split, path);
    err << "wrote " << path.string() << " (" << split.samples.size() << " samples)\n";
  }
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out_dir,
              std::ostream& err) {
  const Dataset data = read_csv(data_dir / "train.csv");
  const TrainResult result = train(data, cfg.train);

  ensure_dir(out_dir);
  save_checkpoint(result.checkpoint, out_dir / "checkpoint.json");

  std::ofstream log(out_dir / "training_log.csv", std::ios::binary);
  if (!log) throw IoError("cannot open " + (out_dir / "training_log.csv").string());
  log << "epoch,ce_loss,triplet_loss,total_loss\n";
  for (const auto& row : result.history) {
    log << row.epoch << ',' << format_double(row.mean_ce) << ','
        << format_double(row.mean_triplet) << ',' << format_double(row.mean_total) << "\n";
  }

  err << "trained " << result.checkpoint.epochs_completed << " epochs";
  if (!result.history.empty()) {
    err << ", final total loss " << format_double(result.history.back().mean_total);
  }
  err << "\n";
  return kExitOk;
}

int cmd_eval(const fs::path& checkpoint_path, const fs::path& data_dir,
             std::vector<double> quantiles, HterMode mode, std::size_t cdf_points,
             bool emit_svg, const fs::path& out_dir, std::ostream& out,
             std::ostream& err) {
  const Checkpoint cp = load_checkpoint(checkpoint_path);
  if (quantiles.empty()) quantiles.push_back(0.0);

  std::vector<std::pair<std::string, fs::path>> scenarios;
  if (!fs::is_directory(data_dir)) {
    throw IoError("eval: data directory " + data_dir.string() + " does not exist");
  }
  for (const auto& entry : fs::directory_iterator(data_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("test_", 0) == 0 && entry.path().extension() == ".csv") {
      scenarios.emplace_back(name.substr(5, name.size() - 9), entry.path());
    }
  }
  if (scenarios.empty()) {
    throw IoError("eval: no test_*.csv files in " + data_dir.string());
  }
  std::sort(scenarios.begin(), scenarios.end());

  ensure_dir(out_dir);
  out << "scenario,p,retained,retained_frac,hter,auc\n";
  for (const auto& [scenario, path] : scenarios) {
    const Dataset data = read_csv(path);
    const std::vector<ScoredSample> scored = score_dataset(cp.model, cp.prototypes, data);
    const EvalReport report = evaluate(scored, quantiles, mode, cdf_points);

    const fs::path scenario_dir = out_dir / scenario;
    ensure_dir(scenario_dir);
    write_eval_rows_csv(report.rows, scenario_dir / "eval_rows.csv");
    for (const auto& curve : report.cdf) {
      write_cdf_csv(curve, scenario_dir / ("cdf_" + curve.group + ".csv"));
    }
    write_groups_csv(report.groups, scenario_dir / "groups.csv");
    if (emit_svg) write_cdf_svg(report.cdf, scenario_dir / "cdf.svg");

    for (const auto& row : report.rows) {
      out << scenario << ',' << format_double(row.p) << ',' << row.retained << ','
          << format_double(row.retained_frac) << ','
          << (row.hter ? format_double(*row.hter) : "NA") << ','
          << (row.auc ? format_double(*row.auc) : "NA") << "\n";
    }
    err << "evaluated scenario '" << scenario << "' (" << data.samples.size()
        << " samples)\n";
  }
  return kExitOk;
}

int cmd_predict(const fs::path& checkpoint_path, const fs::path& input_path,
                const ThresholdSpec& spec, const fs::path& out_dir, std::ostream& err) {
  const Checkpoint cp = load_checkpoint(checkpoint_path);
  const Dataset data = read_csv(input_path);

  ConfidenceThreshold threshold;
  if (spec.kind == ThresholdSpec::Kind::Fixed) {
    threshold = ConfidenceThreshold::fixed(spec.value);
  } else {
    const Dataset calibration = read_csv(spec.calibration_path);
    threshold = quantile_threshold(score_confidences(cp.model, cp.prototypes, calibration), spec.p);
  }

  ensure_dir(out_dir);
  const fs::path out_path = out_dir / "decisions.csv";
  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw IoError("cannot open " + out_path.string());
  file << "index,decision,detail,confidence\n";
  std::size_t accepted = 0;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    DecideTrace trace;
    const Decision decision = decide(cp.model, cp.prototypes, data.samples[i].x,
                                     threshold, &trace);
    file << i << ',';
    if (const auto* accept = std::get_if<Accept>(&decision)) {
      ++accepted;
      file << "accept," << format_double(accept->live_probability);
    } else {
      file << "reject," << std::get<Reject>(decision).alert;
    }
    file << ',' << format_double(trace.confidence) << "\n";
  }
  err << "decided " << data.samples.size() << " samples, accepted " << accepted
      << ", wrote " << out_path.string() << "\n";
  return kExitOk;
}

int cmd_sweep(const fs::path& checkpoint_path, const fs::path& input_path,
              const std::vector<double>& grid, HterMode mode, const fs::path& out_dir,
              std::ostream& out, std::ostream& err) {
  const Checkpoint cp = load_checkpoint(checkpoint_path);
  const Dataset data = read_csv(input_path);
  const std::vector<ScoredSample> scored = score_dataset(cp.model, cp.prototypes, data);
  const std::vector<EvalRow> rows = filtered_eval(scored, grid, mode);

  ensure_dir(out_dir);
  const fs::path out_path = out_dir / "sweep.csv";
  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw IoError("cannot open " + out_path.string());
  const auto emit = [](std::ostream& os, const EvalRow& row) {
    os << format_double(row.p) << ',' << row.retained << ','
       << (row.hter ? format_double(*row.hter) : "NA") << ','
       << (row.auc ? format_double(*row.auc) : "NA") << "\n";
  };
  file << "p,retained,hter,auc\n";
  out << "p,retained,hter,auc\n";
  for (const auto& row : rows) {
    emit(file, row);
    emit(out, row);
  }
  err << "swept " << rows.size() << " quantiles, wrote " << out_path.string() << "\n";
  return kExitOk;
}

std::vector<double> parse_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) {
    throw InvalidConfig("--grid: expected <start>:<stop>:<step>, got '" + text + "'");
  }
  const auto start = parse_double(parts[0]);
  const auto stop = parse_double(parts[1]);
  const auto step = parse_double(parts[2]);
  if (!start || !stop || !step || !(*step > 0.0)) {
    throw InvalidConfig("--grid: bad numbers in '" + text + "'");
  }
  std::vector<double> grid;
  for (double p = *start; p <= *stop + 1e-12; p += *step) {
    if (!(p >= 0.0 && p <= 1.0 + 1e-12)) {
      throw InvalidConfig("--grid: quantile " + format_double(p) + " outside [0, 1]");
    }
    grid.push_back(std::min(p, 1.0));
  }
  if (grid.empty()) throw InvalidConfig("--grid: empty grid");
  return grid;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"confidence-aware live/spoof classification toolkit"};
  app.name("liveguard");
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string data_dir;
  std::string checkpoint_path;
  std::string input_path;
  std::string quantiles_text;
  std::string hter_mode_text;
  std::string grouping_text;
  std::string threshold_text;
  std::string grid_text;
  std::optional<std::uint64_t> seed_override;
  bool have_quantiles = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration");
    cmd->add_option("--out", out_dir, "output directory (created if missing)");
    cmd->add_option("--seed", seed_override, "override synth and train seeds");
  };

  auto* gen = app.add_subcommand("generate", "write the synthetic benchmark datasets");
  add_common(gen);

  auto* tr = app.add_subcommand("train", "train a model on <data>/train.csv");
  add_common(tr);
  tr->add_option("--data", data_dir, "directory holding train.csv")->required();
  tr->add_option("--grouping", grouping_text,
                 "one-class|binary|domain-based|attack-based");

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on <data>/test_*.csv");
  add_common(ev);
  ev->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  ev->add_option("--data", data_dir, "directory holding test_*.csv")->required();
  ev->add_option("--quantiles", quantiles_text, "comma list of rejection quantiles")
      ->trigger_on_parse();
  ev->add_option("--hter-mode", hter_mode_text, "eer|fixed0.5");

  auto* pr = app.add_subcommand("predict", "accept/reject decisions for a csv of inputs");
  add_common(pr);
  pr->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  pr->add_option("--input", input_path, "input csv")->required();
  pr->add_option("--threshold", threshold_text,
                 "fixed:<v> or quantile:<p>:<calibration csv>")
      ->required();

  auto* sw = app.add_subcommand("sweep", "risk/coverage sweep over quantiles");
  add_common(sw);
  sw->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  sw->add_option("--input", input_path, "test csv")->required();
  sw->add_option("--quantiles", quantiles_text, "comma list of quantiles");
  sw->add_option("--grid", grid_text, "<start>:<stop>:<step> quantile grid");
  sw->add_option("--hter-mode", hter_mode_text, "eer|fixed0.5");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("liveguard");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig::defaults()
                                        : load_run_config(config_path);
    if (seed_override) {
      cfg.synth.seed = *seed_override;
      cfg.train.seed = *seed_override;
    }
    if (!grouping_text.empty()) cfg.train.grouping = grouping_from_string(grouping_text);
    if (!hter_mode_text.empty()) {
      if (hter_mode_text == "eer") {
        cfg.eval.hter_mode = HterMode::EqualErrorRate;
      } else if (hter_mode_text == "fixed0.5") {
        cfg.eval.hter_mode = HterMode::FixedHalf;
      } else {
        throw InvalidConfig("--hter-mode: expected 'eer' or 'fixed0.5'");
      }
    }

    if (app.got_subcommand(gen)) {
      return cmd_generate(cfg, out_dir, err);
    }
    if (app.got_subcommand(tr)) {
      return cmd_train(cfg, data_dir, out_dir, err);
    }
    if (app.got_subcommand(ev)) {
      std::vector<double> quantiles = cfg.eval.quantiles;
      if (ev->count("--quantiles") > 0) quantiles = parse_quantile_list(quantiles_text);
      return cmd_eval(checkpoint_path, data_dir, std::move(quantiles),
                      cfg.eval.hter_mode, cfg.eval.cdf_points, cfg.eval.emit_svg,
                      out_dir, out, err);
    }
    if (app.got_subcommand(pr)) {
      return cmd_predict(checkpoint_path, input_path, parse_threshold_spec(threshold_text),
                         out_dir, err);
    }
    if (app.got_subcommand(sw)) {
      std::vector<double> grid;
      if (sw->count("--quantiles") > 0) {
        grid = parse_quantile_list(quantiles_text);
      } else if (!grid_text.empty()) {
        grid = parse_grid(grid_text);
      } else {
        grid = parse_grid("0:0.9:0.1");
      }
      if (grid.empty()) grid.push_back(0.0);
      return cmd_sweep(checkpoint_path, input_path, grid, cfg.eval.hter_mode, out_dir,
                       out, err);
    }
    err << "error: no subcommand\n";
    return kExitConfig;
  } catch (const NonFiniteGradient& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const NotPositiveDefinite& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const SingularMatrix& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const MalformedRow& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const CorruptChecksum& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const FormatVersionMismatch& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace liveguard
