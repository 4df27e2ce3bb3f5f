#include "run_config.hpp"

#include <nlohmann/json.hpp>

#include "stpen/annotation.hpp"
#include "stpen/config_io.hpp"
#include "stpen/errors.hpp"

namespace stpen::cli {

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::kTrain:
      return "train";
    case Mode::kEval:
      return "eval";
    case Mode::kInfer:
      return "infer";
    case Mode::kSynth:
      return "synth";
    case Mode::kValidate:
      return "validate";
    case Mode::kAblate:
      return "ablate";
  }
  return "train";
}

ModelConfig preset_model(const std::string& name) {
  if (name == "desk") return desk_preset();
  if (name == "paper") return paper_preset();
  throw UsageError("unknown preset '" + name + "' (expected desk or paper)");
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path,
                       const std::optional<std::string>& preset_override) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  }
  if (!j.is_object()) throw UsageError(path.string() + ": config must be a JSON object");
  try {
    // The preset is applied first so that explicit model keys override it.
    if (preset_override) {
      cfg.preset = *preset_override;
    } else if (j.contains("preset")) {
      cfg.preset = j.at("preset").get<std::string>();
    }
    cfg.model = preset_model(cfg.preset);
    for (const auto& [key, value] : j.items()) {
      if (key == "preset") continue;
      if (key == "mode") {
        if (value.get<std::string>() != mode_name(cfg.mode)) {
          throw UsageError("config mode '" + value.get<std::string>() + "' differs from the command '" +
                           mode_name(cfg.mode) + "'");
        }
      } else if (key == "data_dir") cfg.data_dir = value.get<std::string>();
      else if (key == "annotations") cfg.annotations = value.get<std::string>();
      else if (key == "checkpoint") cfg.checkpoint = value.get<std::string>();
      else if (key == "resume") cfg.resume = value.get<std::string>();
      else if (key == "split_file") cfg.split_file = value.get<std::string>();
      else if (key == "spec") cfg.spec = value.get<std::string>();
      else if (key == "out") cfg.out = value.get<std::string>();
      else if (key == "split") cfg.split = value.get<std::string>();
      else if (key == "synth") cfg.synth = value.get<std::string>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "dump_attention") cfg.dump_attention = value.get<bool>();
      else if (key == "allow_undefined") cfg.allow_undefined = value.get<bool>();
      else if (key == "model") cfg.model = model_config_from_json(value, cfg.model);
      else if (key == "train") {
        cfg.train = train_config_from_json(value, cfg.train);
        if (value.contains("seed") && !j.contains("seed")) cfg.seed = cfg.train.seed;
      }
      else throw UsageError(path.string() + ": unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

}  // namespace stpen::cli
