#include "liveguard/synthdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "liveguard/text.hpp"

namespace liveguard {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last) return std::nullopt;
  return value;
}

std::optional<unsigned long long> parse_u64(std::string_view text) {
  unsigned long long value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last) return std::nullopt;
  return value;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(text.substr(start));
      break;
    }
    parts.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

bool is_live_label(const std::string& label) { return label == "live"; }

std::string attack_name(const std::string& label) {
  if (label.rfind("attack:", 0) == 0) return label.substr(7);
  return "";
}

bool valid_label(const std::string& label) {
  if (label == "live") return true;
  if (label.rfind("attack:", 0) != 0) return false;
  const std::string name = label.substr(7);
  if (name.empty()) return false;
  for (char c : name) {
    if (!(std::islower(static_cast<unsigned char>(c)) ||
          std::isdigit(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
      return false;
    }
  }
  return true;
}

void SynthConfig::validate() const {
  if (d_in == 0) throw InvalidConfig("synth.d_in must be positive");
  if (train_count_per_cell == 0) throw InvalidConfig("synth.train_count_per_cell must be positive");
  if (test_count_per_cell == 0) throw InvalidConfig("synth.test_count_per_cell must be positive");

  std::size_t live_count = 0;
  std::size_t training_attacks = 0;
  std::size_t held_out = 0;
  for (const auto& c : classes) {
    if (!valid_label(c.label)) {
      throw InvalidConfig("synth.classes: bad label '" + c.label + "'");
    }
    if (c.base_mean.size() != d_in) {
      throw InvalidConfig("synth.classes[" + c.label + "].mean has dim " +
                          std::to_string(c.base_mean.size()) + ", expected " +
                          std::to_string(d_in));
    }
    if (!(c.base_cov_scale > 0.0)) {
      throw InvalidConfig("synth.classes[" + c.label + "].cov_scale must be > 0");
    }
    if (is_live_label(c.label)) ++live_count;
    if (!is_live_label(c.label) && c.in_training) ++training_attacks;
    if (!c.in_training) ++held_out;
  }
  if (live_count != 1) throw InvalidConfig("synth.classes must contain exactly one live class");
  if (training_attacks < 2) {
    throw InvalidConfig("synth.classes must contain at least two in-training attack classes");
  }
  if (held_out < 1) throw InvalidConfig("synth.classes must contain at least one held-out class");

  std::size_t training_domains = 0;
  std::size_t held_out_domains = 0;
  for (const auto& d : domains) {
    if (d.name.empty()) throw InvalidConfig("synth.domains: empty name");
    if (d.shift.size() != d_in) {
      throw InvalidConfig("synth.domains[" + d.name + "].shift has wrong dim");
    }
    if (!(d.scale > 0.0)) throw InvalidConfig("synth.domains[" + d.name + "].scale must be > 0");
    if (d.in_training) ++training_domains; else ++held_out_domains;
  }
  if (training_domains < 2) throw InvalidConfig("synth.domains needs at least 2 training domains");
  if (held_out_domains < 1) throw InvalidConfig("synth.domains needs at least 1 held-out domain");

  auto has_class = [this](const std::string& label) {
    return std::any_of(classes.begin(), classes.end(),
                       [&](const ClassSpec& c) { return c.label == label; });
  };
  auto has_domain = [this](const std::string& name) {
    return std::any_of(domains.begin(), domains.end(),
                       [&](const DomainSpec& d) { return d.name == name; });
  };
  for (const auto& s : scenarios) {
    if (s.name.empty()) throw InvalidConfig("synth.scenarios: empty name");
    if (s.classes.empty() || s.domains.empty()) {
      throw InvalidConfig("synth.scenarios[" + s.name + "] must name classes and domains");
    }
    for (const auto& c : s.classes) {
      if (!has_class(c)) {
        throw InvalidConfig("synth.scenarios[" + s.name + "] references unknown class '" + c + "'");
      }
    }
    for (const auto& d : s.domains) {
      if (!has_domain(d)) {
        throw InvalidConfig("synth.scenarios[" + s.name + "] references unknown domain '" + d + "'");
      }
    }
  }
}

SynthConfig SynthConfig::desk_default() {
  SynthConfig cfg;
  cfg.d_in = 8;
  cfg.seed = 7;
  cfg.train_count_per_cell = 400;
  cfg.test_count_per_cell = 200;

  auto basis_mean = [&](std::size_t axis, double v) {
    Vector m(cfg.d_in, 0.0);
    m[axis] = v;
    return m;
  };
  // The held-out mask class combines the signatures of all three training
  // classes at once (a novel attack built from known structure), so it lies
  // inside the span the extractor actively resolves yet far from every
  // single-class mean. Pairwise mean distances stay >= 4.
  cfg.classes = {
      {"live", basis_mean(0, 4.0), 1.0, true},
      {"attack:print", basis_mean(1, 4.0), 1.0, true},
      {"attack:replay", basis_mean(2, 4.0), 1.0, true},
      {"attack:mask", {4.0, 4.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0}, 1.0, false},
  };

  // Domain shifts live mostly on the nuisance axes (e4..e7): capture
  // conditions move every class the same way, and training across three
  // such domains lets the extractor learn to discount those directions.
  // The held-out field domain pushes farther along them (norm 2) and
  // rescales everything by 1.2.
  cfg.domains = {
      {"lab", Vector(cfg.d_in, 0.0), 1.0, true},
      {"office", {0.0, 0.0, 0.0, 0.0, 0.8, 0.5, 0.3, 0.0}, 0.9, true},
      {"outdoor", {0.0, 0.0, 0.0, 0.0, -0.4, 0.3, 0.6, 0.4}, 1.1, true},
      {"field", {0.0, 0.0, 0.0, 0.0, 1.0, -1.0, 1.0, 1.0}, 1.2, false},
  };

  cfg.scenarios = {
      {"known", {"live", "attack:print", "attack:replay"}, {"field"}},
      {"unknown", {"live", "attack:mask"}, {"field"}},
      {"mixed", {"live", "attack:print", "attack:replay", "attack:mask"}, {"field"}},
      {"mixed_known_domains",
       {"live", "attack:print", "attack:replay", "attack:mask"},
       {"lab", "office", "outdoor"}},
  };
  return cfg;
}

namespace {

SampleRecord draw_sample(const ClassSpec& cls, const DomainSpec& dom,
                         std::mt19937_64& rng, std::normal_distribution<double>& normal) {
  SampleRecord rec;
  rec.label = cls.label;
  rec.domain = dom.name;
  rec.x.resize(cls.base_mean.size());
  for (std::size_t i = 0; i < rec.x.size(); ++i) {
    rec.x[i] = cls.base_mean[i] * dom.scale + dom.shift[i] +
               cls.base_cov_scale * dom.scale * normal(rng);
  }
  return rec;
}

}  // namespace

GeneratedData generate(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  GeneratedData out;
  out.train.d_in = config.d_in;
  for (const auto& cls : config.classes) {
    if (!cls.in_training) continue;
    for (const auto& dom : config.domains) {
      if (!dom.in_training) continue;
      for (std::size_t i = 0; i < config.train_count_per_cell; ++i) {
        out.train.samples.push_back(draw_sample(cls, dom, rng, normal));
      }
    }
  }

  for (const auto& scenario : config.scenarios) {
    Dataset split;
    split.d_in = config.d_in;
    for (const auto& label : scenario.classes) {
      const auto cls = std::find_if(config.classes.begin(), config.classes.end(),
                                    [&](const ClassSpec& c) { return c.label == label; });
      for (const auto& name : scenario.domains) {
        const auto dom = std::find_if(config.domains.begin(), config.domains.end(),
                                      [&](const DomainSpec& d) { return d.name == name; });
        for (std::size_t i = 0; i < config.test_count_per_cell; ++i) {
          split.samples.push_back(draw_sample(*cls, *dom, rng, normal));
        }
      }
    }
    out.tests.emplace_back(scenario.name, std::move(split));
  }
  return out;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("write_csv: cannot open " + path.string());

  file << "label,domain";
  for (std::size_t i = 0; i < data.d_in; ++i) file << ",f" << i;
  file << "\n";
  for (const auto& rec : data.samples) {
    file << rec.label << ',' << rec.domain;
    for (double v : rec.x) file << ',' << format_double(v);
    file << "\n";
  }
  if (!file) throw IoError("write_csv: write failed for " + path.string());
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("read_csv: cannot open " + path.string());

  std::string line;
  if (!std::getline(file, line)) {
    throw MalformedRow("row 0: missing header in " + path.string());
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split(line, ',');
  if (header.size() < 3 || header[0] != "label" || header[1] != "domain") {
    throw MalformedRow("row 0: header must start with label,domain,f0,...");
  }
  const std::size_t d_in = header.size() - 2;
  for (std::size_t i = 0; i < d_in; ++i) {
    if (header[i + 2] != "f" + std::to_string(i)) {
      throw MalformedRow("row 0: expected column f" + std::to_string(i) +
                         ", got '" + header[i + 2] + "'");
    }
  }

  Dataset data;
  data.d_in = d_in;
  std::size_t row = 0;
  while (std::getline(file, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != d_in + 2) {
      throw MalformedRow("row " + std::to_string(row) + ": expected " +
                         std::to_string(d_in + 2) + " fields, got " +
                         std::to_string(fields.size()));
    }
    SampleRecord rec;
    rec.label = fields[0];
    if (!valid_label(rec.label)) {
      throw MalformedRow("row " + std::to_string(row) + ": bad label '" + rec.label + "'");
    }
    rec.domain = fields[1];
    if (rec.domain.empty()) {
      throw MalformedRow("row " + std::to_string(row) + ": empty domain");
    }
    rec.x.resize(d_in);
    for (std::size_t i = 0; i < d_in; ++i) {
      const auto value = parse_double(fields[i + 2]);
      if (!value || !std::isfinite(*value)) {
        throw MalformedRow("row " + std::to_string(row) + ": bad value '" +
                           fields[i + 2] + "' in column f" + std::to_string(i));
      }
      rec.x[i] = *value;
    }
    data.samples.push_back(std::move(rec));
  }
  return data;
}

}  // namespace liveguard
