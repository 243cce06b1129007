#pragma once

#include <json.hpp>

#include "liveguard/losses.hpp"
#include "liveguard/network.hpp"
#include "liveguard/prototypes.hpp"
#include "liveguard/trainer.hpp"

namespace liveguard::detail {

using nlohmann::json;

/// Raises InvalidConfig when `obj` holds a key outside `allowed`. `where`
/// names the object in messages ("train", "synth.classes[0]", ...).
void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& where);

json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j, const std::string& where);

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, const std::string& where);

std::string activation_to_string(Activation a);
Activation activation_from_string(const std::string& s);

std::string shape_mode_to_string(PrototypeShapeMode m);
PrototypeShapeMode shape_mode_from_string(const std::string& s);

json loss_config_to_json(const LossConfig& cfg);
/// Applies fields present in `j` on top of `cfg`; unknown keys raise.
void loss_config_from_json(const json& j, LossConfig& cfg, const std::string& where);

json network_spec_to_json(const NetworkSpec& spec);
void network_spec_from_json(const json& j, NetworkSpec& spec, const std::string& where);

json train_config_to_json(const TrainConfig& cfg);
void train_config_from_json(const json& j, TrainConfig& cfg, const std::string& where);

}  // namespace liveguard::detail
