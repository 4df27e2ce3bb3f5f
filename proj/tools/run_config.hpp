#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "stpen/model_config.hpp"
#include "stpen/training.hpp"

namespace stpen::cli {

/// Bad invocation: exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { kTrain, kEval, kInfer, kSynth, kValidate, kAblate };

std::string mode_name(Mode m);

struct RunConfig {
  Mode mode = Mode::kTrain;
  std::filesystem::path data_dir;
  std::filesystem::path annotations;
  std::filesystem::path checkpoint;
  std::filesystem::path resume;
  std::filesystem::path split_file;
  std::filesystem::path spec;  // synthetic spec for `synth`
  std::filesystem::path out;
  std::string split = "test";
  /// Synthetic data instead of files: "smoke" or "benchmark".
  std::string synth;
  std::string preset = "desk";
  /// Copied into train.seed before a command runs.
  std::uint64_t seed = 0;
  bool dump_attention = false;
  bool allow_undefined = false;
  ModelConfig model;
  TrainConfig train;
};

/// Layers a JSON config file over `cfg`: the preset (`preset_override` beats
/// the file's `preset` key), then every other key. Unknown keys raise UsageError.
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path,
                       const std::optional<std::string>& preset_override = std::nullopt);

/// ModelConfig of a named preset; UsageError for unknown names.
ModelConfig preset_model(const std::string& name);

}  // namespace stpen::cli
