#include "stpen/config_io.hpp"

#include <functional>
#include <map>

#include "stpen/errors.hpp"

namespace stpen {
namespace {

using Setter = std::function<void(const nlohmann::json&)>;

void apply(const nlohmann::json& j, const std::map<std::string, Setter>& setters, const std::string& what) {
  if (!j.is_object()) throw ParseError(what + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ParseError(what + ": unknown key '" + key + "'");
    try {
      it->second(value);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(what + "." + key + ": " + e.what());
    }
  }
}

template <class T>
Setter set(T& field) {
  return [&field](const nlohmann::json& v) { field = v.get<T>(); };
}

}  // namespace

nlohmann::ordered_json to_json(const ModuleToggles& t) {
  return {{"fl_sam", t.fl_sam}, {"kmfem", t.kmfem}, {"cl_sam", t.cl_sam}, {"mfem", t.mfem}};
}

nlohmann::ordered_json to_json(const ModelConfig& cfg) {
  const BranchConfig& b = cfg.branch;
  nlohmann::ordered_json branch = {{"stem_channels", b.stem_channels}, {"stem_stride", b.stem_stride},
                                   {"block_channels", b.block_channels}, {"block_strides", b.block_strides},
                                   {"roi_size", b.roi_size}, {"kernel", b.kernel}};
  return {{"branch", branch},
          {"frame_size", cfg.frame_size},
          {"lstm_hidden", cfg.lstm_hidden},
          {"num_classes", cfg.num_classes},
          {"toggles", to_json(cfg.toggles)},
          {"conv_init_gain", cfg.conv_init_gain},
          {"linear_mode", cfg.linear_mode}};
}

nlohmann::ordered_json to_json(const TrainConfig& cfg) {
  return {{"batch_size", cfg.batch_size}, {"base_lr", cfg.base_lr}, {"weight_decay", cfg.weight_decay},
          {"momentum", cfg.momentum},     {"period", cfg.period},   {"min_lr", cfg.min_lr},
          {"epochs", cfg.epochs},         {"seed", cfg.seed}};
}

ModuleToggles toggles_from_json(const nlohmann::json& j, ModuleToggles t) {
  apply(j, {{"fl_sam", set(t.fl_sam)}, {"kmfem", set(t.kmfem)}, {"cl_sam", set(t.cl_sam)}, {"mfem", set(t.mfem)}},
        "toggles");
  return t;
}

ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig cfg) {
  BranchConfig& b = cfg.branch;
  apply(j,
        {{"branch",
          [&b](const nlohmann::json& v) {
            apply(v,
                  {{"stem_channels", set(b.stem_channels)},
                   {"stem_stride", set(b.stem_stride)},
                   {"block_channels", set(b.block_channels)},
                   {"block_strides", set(b.block_strides)},
                   {"roi_size", set(b.roi_size)},
                   {"kernel", set(b.kernel)}},
                  "model.branch");
          }},
         {"frame_size", set(cfg.frame_size)},
         {"lstm_hidden", set(cfg.lstm_hidden)},
         {"num_classes", set(cfg.num_classes)},
         {"toggles", [&cfg](const nlohmann::json& v) { cfg.toggles = toggles_from_json(v, cfg.toggles); }},
         {"conv_init_gain", set(cfg.conv_init_gain)},
         {"linear_mode", set(cfg.linear_mode)}},
        "model");
  return cfg;
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig cfg) {
  apply(j,
        {{"batch_size", set(cfg.batch_size)},
         {"base_lr", set(cfg.base_lr)},
         {"weight_decay", set(cfg.weight_decay)},
         {"momentum", set(cfg.momentum)},
         {"period", set(cfg.period)},
         {"min_lr", set(cfg.min_lr)},
         {"epochs", set(cfg.epochs)},
         {"seed", set(cfg.seed)}},
        "train");
  return cfg;
}

}  // namespace stpen
