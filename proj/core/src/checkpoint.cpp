#include <zlib.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "liveguard/trainer.hpp"

namespace liveguard {

namespace detail {

void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& where) {
  if (!obj.is_object()) {
    throw InvalidConfig(where + ": expected an object");
  }
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const auto& key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw InvalidConfig(where + ": unknown key '" + item.key() + "'");
    }
  }
}

json vector_to_json(const Vector& v) { return json(v); }

Vector vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw InvalidConfig(where + ": expected an array of numbers");
  Vector v;
  v.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_number()) throw InvalidConfig(where + ": expected numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const json& j, const std::string& where) {
  reject_unknown_keys(j, {"rows", "cols", "data"}, where);
  if (!j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
    throw InvalidConfig(where + ": matrix needs rows, cols, data");
  }
  Matrix m;
  m.rows = j.at("rows").get<std::size_t>();
  m.cols = j.at("cols").get<std::size_t>();
  m.data = vector_from_json(j.at("data"), where + ".data");
  if (m.data.size() != m.rows * m.cols) {
    throw InvalidConfig(where + ": data length does not equal rows*cols");
  }
  return m;
}

std::string activation_to_string(Activation a) {
  return a == Activation::Relu ? "relu" : "tanh";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  throw InvalidConfig("unknown activation '" + s + "'");
}

std::string shape_mode_to_string(PrototypeShapeMode m) {
  switch (m) {
    case PrototypeShapeMode::Full: return "full";
    case PrototypeShapeMode::Diagonal: return "diagonal";
    case PrototypeShapeMode::Auto:
    default: return "auto";
  }
}

PrototypeShapeMode shape_mode_from_string(const std::string& s) {
  if (s == "auto") return PrototypeShapeMode::Auto;
  if (s == "full") return PrototypeShapeMode::Full;
  if (s == "diagonal") return PrototypeShapeMode::Diagonal;
  throw InvalidConfig("unknown prototype shape '" + s + "'");
}

json loss_config_to_json(const LossConfig& cfg) {
  return json{{"margin", cfg.margin},
              {"lambda", cfg.lambda},
              {"hinge", cfg.hinge},
              {"reduction", cfg.reduction == LossReduction::Mean ? "mean" : "sum"}};
}

void loss_config_from_json(const json& j, LossConfig& cfg, const std::string& where) {
  reject_unknown_keys(j, {"margin", "lambda", "hinge", "reduction"}, where);
  if (j.contains("margin")) cfg.margin = j.at("margin").get<double>();
  if (j.contains("lambda")) cfg.lambda = j.at("lambda").get<double>();
  if (j.contains("hinge")) cfg.hinge = j.at("hinge").get<bool>();
  if (j.contains("reduction")) {
    const auto s = j.at("reduction").get<std::string>();
    if (s == "mean") {
      cfg.reduction = LossReduction::Mean;
    } else if (s == "sum") {
      cfg.reduction = LossReduction::Sum;
    } else {
      throw InvalidConfig(where + ".reduction: expected 'mean' or 'sum', got '" + s + "'");
    }
  }
}

json network_spec_to_json(const NetworkSpec& spec) {
  return json{{"hidden_dims", spec.hidden_dims},
              {"feature_dim", spec.feature_dim},
              {"activation", activation_to_string(spec.activation)}};
}

void network_spec_from_json(const json& j, NetworkSpec& spec, const std::string& where) {
  reject_unknown_keys(j, {"hidden_dims", "feature_dim", "activation"}, where);
  if (j.contains("hidden_dims")) {
    if (!j.at("hidden_dims").is_array()) {
      throw InvalidConfig(where + ".hidden_dims: expected an array");
    }
    spec.hidden_dims.clear();
    for (const auto& e : j.at("hidden_dims")) {
      spec.hidden_dims.push_back(e.get<std::size_t>());
    }
  }
  if (j.contains("feature_dim")) spec.feature_dim = j.at("feature_dim").get<std::size_t>();
  if (j.contains("activation")) {
    spec.activation = activation_from_string(j.at("activation").get<std::string>());
  }
}

json train_config_to_json(const TrainConfig& cfg) {
  return json{{"learning_rate", cfg.learning_rate},
              {"momentum", cfg.momentum},
              {"weight_decay", cfg.weight_decay},
              {"epochs", cfg.epochs},
              {"batch_size", cfg.batch_size},
              {"seed", cfg.seed},
              {"loss", loss_config_to_json(cfg.loss)},
              {"grouping", grouping_to_string(cfg.grouping)},
              {"prototype_shape", shape_mode_to_string(cfg.prototype_shape)},
              {"warmup_epochs_for_means", cfg.warmup_epochs_for_means},
              {"network", network_spec_to_json(cfg.network)}};
}

void train_config_from_json(const json& j, TrainConfig& cfg, const std::string& where) {
  reject_unknown_keys(j,
                      {"learning_rate", "momentum", "weight_decay", "epochs",
                       "batch_size", "seed", "loss", "grouping", "prototype_shape",
                       "warmup_epochs_for_means", "network"},
                      where);
  if (j.contains("learning_rate")) cfg.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("momentum")) cfg.momentum = j.at("momentum").get<double>();
  if (j.contains("weight_decay")) cfg.weight_decay = j.at("weight_decay").get<double>();
  if (j.contains("epochs")) cfg.epochs = j.at("epochs").get<std::size_t>();
  if (j.contains("batch_size")) cfg.batch_size = j.at("batch_size").get<std::size_t>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("loss")) loss_config_from_json(j.at("loss"), cfg.loss, where + ".loss");
  if (j.contains("grouping")) {
    cfg.grouping = grouping_from_string(j.at("grouping").get<std::string>());
  }
  if (j.contains("prototype_shape")) {
    cfg.prototype_shape = shape_mode_from_string(j.at("prototype_shape").get<std::string>());
  }
  if (j.contains("warmup_epochs_for_means")) {
    cfg.warmup_epochs_for_means = j.at("warmup_epochs_for_means").get<std::size_t>();
  }
  if (j.contains("network")) {
    network_spec_from_json(j.at("network"), cfg.network, where + ".network");
  }
}

}  // namespace detail

namespace {

using detail::json;

json layer_to_json(const DenseLayer& layer) {
  return json{{"weight", detail::matrix_to_json(layer.weight)},
              {"bias", detail::vector_to_json(layer.bias)}};
}

DenseLayer layer_from_json(const json& j, const std::string& where) {
  detail::reject_unknown_keys(j, {"weight", "bias"}, where);
  DenseLayer layer;
  layer.weight = detail::matrix_from_json(j.at("weight"), where + ".weight");
  layer.bias = detail::vector_from_json(j.at("bias"), where + ".bias");
  return layer;
}

json prototype_to_json(const GaussianPrototype& p) {
  return json{{"kind", p.category.kind == CategoryKind::Live ? "live" : "attack"},
              {"name", p.category.name},
              {"index", p.category.index},
              {"shape", p.shape == PrototypeShape::Full ? "full" : "diagonal"},
              {"mean", detail::vector_to_json(p.mean)},
              {"factor_params", detail::matrix_to_json(p.factor_params)}};
}

GaussianPrototype prototype_from_json(const json& j, const std::string& where) {
  detail::reject_unknown_keys(
      j, {"kind", "name", "index", "shape", "mean", "factor_params"}, where);
  GaussianPrototype p;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "live") {
    p.category.kind = CategoryKind::Live;
  } else if (kind == "attack") {
    p.category.kind = CategoryKind::Attack;
  } else {
    throw Error(where + ": unknown category kind '" + kind + "'");
  }
  p.category.name = j.at("name").get<std::string>();
  p.category.index = j.at("index").get<std::size_t>();
  const auto shape = j.at("shape").get<std::string>();
  if (shape == "full") {
    p.shape = PrototypeShape::Full;
  } else if (shape == "diagonal") {
    p.shape = PrototypeShape::Diagonal;
  } else {
    throw Error(where + ": unknown prototype shape '" + shape + "'");
  }
  p.mean = detail::vector_from_json(j.at("mean"), where + ".mean");
  p.factor_params = detail::matrix_from_json(j.at("factor_params"), where + ".factor_params");
  if (!all_finite(p.mean) || !all_finite(p.factor_params)) {
    throw Error(where + ": non-finite prototype parameters");
  }
  for (std::size_t i = 0; i < p.factor_params.rows; ++i) {
    const double s = p.factor_params(i, i);
    if (s < kLogDiagMin || s > kLogDiagMax) {
      throw Error(where + ": log-diagonal entry out of [-6, 6]");
    }
  }
  return p;
}

std::uint32_t crc32_of(const std::string& text) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  crc = ::crc32(crc, reinterpret_cast<const Bytef*>(text.data()),
                static_cast<uInt>(text.size()));
  return static_cast<std::uint32_t>(crc);
}

json checkpoint_body_to_json(const Checkpoint& cp) {
  json layers = json::array();
  for (const auto& layer : cp.model.layers) layers.push_back(layer_to_json(layer));
  json prototypes = json::array();
  for (const auto& p : cp.prototypes.prototypes) prototypes.push_back(prototype_to_json(p));
  return json{{"format_version", cp.format_version},
              {"config", detail::train_config_to_json(cp.config)},
              {"layers", layers},
              {"head", layer_to_json(cp.model.head)},
              {"prototypes", prototypes},
              {"epochs_completed", cp.epochs_completed},
              {"rng_state", cp.rng_state}};
}

}  // namespace

void save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path) {
  json body = checkpoint_body_to_json(cp);
  const std::uint32_t crc = crc32_of(body.dump());
  body["crc32"] = crc;

  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("save_checkpoint: cannot open " + path.string());
  file << body.dump() << "\n";
  if (!file) throw IoError("save_checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("load_checkpoint: cannot open " + path.string());
  std::stringstream buffer;
  buffer << file.rdbuf();

  json body;
  try {
    body = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw CorruptChecksum("load_checkpoint: not valid checkpoint text (" +
                          std::string(e.what()) + ")");
  }
  if (!body.is_object() || !body.contains("crc32")) {
    throw CorruptChecksum("load_checkpoint: missing crc32 field");
  }
  const auto stored_crc = body.at("crc32").get<std::uint32_t>();
  body.erase("crc32");
  if (crc32_of(body.dump()) != stored_crc) {
    throw CorruptChecksum("load_checkpoint: crc32 mismatch in " + path.string());
  }

  if (!body.contains("format_version") ||
      body.at("format_version").get<int>() != kCheckpointFormatVersion) {
    throw FormatVersionMismatch("load_checkpoint: unsupported format version");
  }

  Checkpoint cp;
  cp.format_version = kCheckpointFormatVersion;
  detail::train_config_from_json(body.at("config"), cp.config, "checkpoint.config");

  cp.model.activation = cp.config.network.activation;
  const auto& layers = body.at("layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    cp.model.layers.push_back(
        layer_from_json(layers[i], "checkpoint.layers[" + std::to_string(i) + "]"));
  }
  cp.model.head = layer_from_json(body.at("head"), "checkpoint.head");
  cp.model.validate();
  for (const auto& layer : cp.model.layers) {
    if (!all_finite(layer.weight) || !all_finite(layer.bias)) {
      throw Error("load_checkpoint: non-finite network parameters");
    }
  }

  cp.prototypes.dim = cp.model.feature_dim();
  const auto& prototypes = body.at("prototypes");
  for (std::size_t i = 0; i < prototypes.size(); ++i) {
    cp.prototypes.prototypes.push_back(prototype_from_json(
        prototypes[i], "checkpoint.prototypes[" + std::to_string(i) + "]"));
  }
  cp.prototypes.validate();

  cp.epochs_completed = body.at("epochs_completed").get<std::size_t>();
  cp.rng_state = body.at("rng_state").get<std::string>();
  return cp;
}

}  // namespace liveguard
