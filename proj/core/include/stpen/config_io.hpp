#pragma once

#include <nlohmann/json.hpp>

#include "stpen/model_config.hpp"
#include "stpen/training.hpp"

// JSON forms of the configuration structs. Readers start from the given base
// and override only the keys present; unknown keys raise ParseError.
namespace stpen {

nlohmann::ordered_json to_json(const ModelConfig& cfg);
nlohmann::ordered_json to_json(const TrainConfig& cfg);
nlohmann::ordered_json to_json(const ModuleToggles& toggles);

ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base = {});
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});
ModuleToggles toggles_from_json(const nlohmann::json& j, ModuleToggles base = {});

}  // namespace stpen
