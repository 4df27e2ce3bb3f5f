#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "stpen/param_set.hpp"

namespace stpen {

inline constexpr std::size_t kNumBlocks = 5;
inline constexpr std::size_t kNumInsertionPoints = 4;

struct BranchConfig {
  std::size_t stem_channels = 8;
  std::size_t stem_stride = 2;
  std::array<std::size_t, kNumBlocks> block_channels{8, 16, 16, 32, 32};
  std::array<std::size_t, kNumBlocks> block_strides{1, 2, 1, 2, 1};
  std::size_t roi_size = 4;
  std::size_t kernel = 3;

  friend bool operator==(const BranchConfig&, const BranchConfig&) = default;
};

/// `true` means the module is present.
struct ModuleToggles {
  bool fl_sam = true;
  bool kmfem = true;
  bool cl_sam = true;
  bool mfem = true;

  /// "full", "no_<module>", "<a>+<b>" for exactly two enabled, else a bit string.
  std::string name() const;
  friend bool operator==(const ModuleToggles&, const ModuleToggles&) = default;
};

struct ModelConfig {
  BranchConfig branch;
  std::size_t frame_size = 16;
  /// 0 selects the final block width.
  std::size_t lstm_hidden = 0;
  std::size_t num_classes = 13;
  ModuleToggles toggles;
  /// Convolution weights are drawn from +-gain sqrt(1/fan_in); sqrt(6) keeps
  /// activation variance through relu layers.
  double conv_init_gain = 2.449489742783178;
  /// Disables every relu; used to test compositions of linear maps.
  bool linear_mode = false;

  std::size_t feature_channels() const { return branch.block_channels.back(); }
  std::size_t hidden_size() const { return lstm_hidden ? lstm_hidden : feature_channels(); }
  /// Spatial side of the branch output maps for the configured frame size.
  std::size_t output_side() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Throws ArgumentError on inconsistent widths, strides or sizes.
void validate_model_config(const ModelConfig& cfg);

/// S=16, widths [8,16,16,32,32], P=4.
ModelConfig desk_preset();
/// S=224, stem 64, widths [64,128,256,512,512], P=7.
ModelConfig paper_preset();

/// Every parameter the configuration uses, each drawn uniformly in
/// +-sqrt(1/fan_in) (convolution weights scaled by conv_init_gain) from a
/// stream keyed by (seed, path). Disabled modules contribute no parameters.
ParamSet init_params(const ModelConfig& cfg, std::uint64_t seed);

}  // namespace stpen
