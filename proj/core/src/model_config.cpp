#include "stpen/model_config.hpp"

#include "stpen/errors.hpp"
#include "stpen/hash.hpp"
#include "stpen/lstm.hpp"
#include "stpen/vocab.hpp"

namespace stpen {
namespace {

constexpr std::array<const char*, 4> kModuleNames{"fl_sam", "kmfem", "cl_sam", "mfem"};

void add_uniform(ParamSet& params, std::uint64_t seed, const std::string& path, Shape shape, std::size_t fan_in,
                 double gain = 1.0) {
  Rng rng(derive_seed(seed, fnv1a64(path)));
  params.add(path, uniform_fan_in(std::move(shape), fan_in, rng, gain));
}

void add_conv(ParamSet& params, std::uint64_t seed, const std::string& prefix, std::size_t out, std::size_t in,
              std::size_t k, double gain) {
  add_uniform(params, seed, prefix + ".w", {out, in, k, k}, in * k * k, gain);
  add_uniform(params, seed, prefix + ".b", {out}, in * k * k);
}

void add_branch(ParamSet& params, std::uint64_t seed, const std::string& branch, const ModelConfig& cfg) {
  const BranchConfig& b = cfg.branch;
  const double g = cfg.conv_init_gain;
  add_conv(params, seed, branch + ".stem", b.stem_channels, 3, b.kernel, g);
  std::size_t in = b.stem_channels;
  for (std::size_t i = 0; i < kNumBlocks; ++i) {
    const std::size_t out = b.block_channels[i];
    const std::string prefix = branch + ".block" + std::to_string(i + 1);
    add_conv(params, seed, prefix + ".conv1", out, in, b.kernel, g);
    add_conv(params, seed, prefix + ".conv2", out, out, b.kernel, g);
    if (in != out || b.block_strides[i] != 1) add_conv(params, seed, prefix + ".proj", out, in, 1, g);
    if (i < kNumInsertionPoints) {
      const std::string idx = std::to_string(i + 1);
      if (branch == "low" && cfg.toggles.fl_sam) add_conv(params, seed, "low.fl_sam" + idx, 1, out, b.kernel, g);
      if (branch == "high" && cfg.toggles.kmfem) {
        add_conv(params, seed, "high.kmfem" + idx + ".attn", 1, out, b.kernel, g);
        // Bias-free so a static clip leaves the motion path at exactly zero.
        add_uniform(params, seed, "high.kmfem" + idx + ".motion.w", {out, out, b.kernel, b.kernel},
                    out * b.kernel * b.kernel, g);
      }
    }
    in = out;
  }
}

}  // namespace

std::string ModuleToggles::name() const {
  const std::array<bool, 4> on{fl_sam, kmfem, cl_sam, mfem};
  std::size_t enabled = 0;
  for (bool b : on) enabled += b;
  if (enabled == 4) return "full";
  if (enabled == 3) {
    for (std::size_t i = 0; i < 4; ++i)
      if (!on[i]) return std::string("no_") + kModuleNames[i];
  }
  if (enabled == 2) {
    std::string out;
    for (std::size_t i = 0; i < 4; ++i) {
      if (!on[i]) continue;
      if (!out.empty()) out += "+";
      out += kModuleNames[i];
    }
    return out;
  }
  std::string bits = "toggles_";
  for (bool b : on) bits += b ? '1' : '0';
  return bits;
}

std::size_t ModelConfig::output_side() const {
  std::size_t side = (frame_size - 1) / branch.stem_stride + 1;
  for (std::size_t s : branch.block_strides) side = (side - 1) / s + 1;
  return side;
}

void validate_model_config(const ModelConfig& cfg) {
  const BranchConfig& b = cfg.branch;
  if (cfg.frame_size < 1) throw ArgumentError("frame size must be positive");
  if (b.kernel % 2 == 0) throw ArgumentError("kernel size must be odd");
  if (b.stem_channels == 0 || b.stem_stride == 0) throw ArgumentError("stem channels and stride must be positive");
  for (std::size_t i = 0; i < kNumBlocks; ++i) {
    if (b.block_channels[i] == 0) throw ArgumentError("block " + std::to_string(i + 1) + " has zero channels");
    if (b.block_strides[i] == 0) throw ArgumentError("block " + std::to_string(i + 1) + " has zero stride");
  }
  if (b.roi_size < 1) throw ArgumentError("ROI size must be >= 1");
  if (!(cfg.conv_init_gain > 0.0)) throw ArgumentError("conv_init_gain must be positive");
  if (cfg.num_classes != kNumBehaviors) {
    throw ArgumentError("class count " + std::to_string(cfg.num_classes) + " differs from the vocabulary size " +
                        std::to_string(kNumBehaviors));
  }
}

ModelConfig desk_preset() { return ModelConfig{}; }

ModelConfig paper_preset() {
  ModelConfig cfg;
  cfg.frame_size = 224;
  cfg.branch.stem_channels = 64;
  cfg.branch.block_channels = {64, 128, 256, 512, 512};
  cfg.branch.roi_size = 7;
  return cfg;
}

ParamSet init_params(const ModelConfig& cfg, std::uint64_t seed) {
  validate_model_config(cfg);
  ParamSet params;
  add_branch(params, seed, "low", cfg);
  add_branch(params, seed, "high", cfg);
  const std::size_t c = cfg.feature_channels();
  const std::size_t h = cfg.hidden_size();
  if (cfg.toggles.mfem) {
    Rng rng(derive_seed(seed, fnv1a64("mfem.lstm")));
    add_lstm_params(params, "mfem.lstm", c, h, rng);
  } else {
    add_uniform(params, seed, "mfem.proj.w", {h, c}, c);
    add_uniform(params, seed, "mfem.proj.b", {h}, c);
  }
  add_uniform(params, seed, "head.w", {cfg.num_classes, c + h}, c + h);
  add_uniform(params, seed, "head.b", {cfg.num_classes}, c + h);
  return params;
}

}  // namespace stpen
