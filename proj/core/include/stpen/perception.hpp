#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "stpen/autograd.hpp"
#include "stpen/geometry.hpp"
#include "stpen/model_config.hpp"
#include "stpen/param_set.hpp"

namespace stpen {

/// Attention gates recorded during a forward pass, keyed by module path
/// (e.g. `low.fl_sam1`, `high.kmfem3`); each is [T x 1 x H x W].
using GateMaps = std::map<std::string, Tensor>;

/// L = R * sigmoid(conv(R)) with a C->1 3x3 convolution; `gate`, when given,
/// receives sigmoid(conv(R)).
Var fl_sam(const Var& r, const Var& weight, const Var& bias, Tensor* gate = nullptr);

/// feature = fl_sam(F); out = feature + [0, conv_motion(feature[t+1] - feature[t])]
/// with a bias-free motion convolution. Requires T >= 2.
Var kmfem(const Var& f, const Var& attn_weight, const Var& attn_bias, const Var& motion_weight,
          Tensor* gate = nullptr);

/// relu(conv2(relu(conv1(x))) + shortcut(x)) with parameters under `prefix`
/// (`conv1`, `conv2`, optional `proj`). A 1x1 projection is used when the
/// channel count or the stride changes.
Var residual_block(const Var& x, const ParamBinding& params, const std::string& prefix, std::size_t stride,
                   bool linear_mode = false);

/// Stem and five residual blocks with FL-SAM after blocks 1-4 (identity when
/// disabled in the config). Input [T x 3 x S x S].
Var run_low_branch(const Var& clip, const ParamBinding& params, const ModelConfig& cfg, GateMaps* gates = nullptr);
/// Same stack with KMFEM at the insertion points.
Var run_high_branch(const Var& clip, const ParamBinding& params, const ModelConfig& cfg, GateMaps* gates = nullptr);

/// fused[t] = low[t] + high[2t]. Throws ShapeError on mismatched extents.
Var fuse_branches(const Var& low, const Var& high);

struct ActorFeatures {
  std::size_t actor_index = 0;  // position in the sample's actor list
  int actor_id = 0;
  Var roi_low;   // [T_low x C x P x P]
  Var roi_high;  // [T_high x C x P x P]
};

struct ActorCropError {
  std::size_t actor_index = 0;
  int actor_id = 0;
  std::string message;
};

struct CropResult {
  std::vector<ActorFeatures> actors;
  std::vector<ActorCropError> errors;
};

/// ROI-aligned crops of both maps for every actor not flagged hidden. An
/// invalid box is reported in `errors` and the remaining actors are kept.
CropResult crop_actor_features(const Var& fused_low, const Var& high, const std::vector<Box>& boxes,
                               const std::vector<int>& actor_ids, const std::vector<bool>& hidden,
                               std::size_t roi_size);

}  // namespace stpen
