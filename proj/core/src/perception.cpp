#include "stpen/perception.hpp"

#include "stpen/errors.hpp"
#include "stpen/ops.hpp"

namespace stpen {
namespace {

Var maybe_relu(const Var& x, bool linear_mode) { return linear_mode ? x : ops::relu(x); }

std::string block_name(const std::string& branch, std::size_t b) {
  return branch + ".block" + std::to_string(b + 1);
}

Var run_stem(const Var& clip, const ParamBinding& params, const std::string& branch, const ModelConfig& cfg) {
  if (clip.value().rank() != 4 || clip.shape()[1] != 3) {
    throw ShapeError(branch + " branch expects [T x 3 x S x S], got " + shape_to_string(clip.shape()));
  }
  const Var x = ops::conv2d(clip, params[branch + ".stem.w"], params[branch + ".stem.b"], cfg.branch.stem_stride,
                            cfg.branch.kernel / 2);
  return maybe_relu(x, cfg.linear_mode);
}

}  // namespace

Var fl_sam(const Var& r, const Var& weight, const Var& bias, Tensor* gate) {
  const Var sa = ops::sigmoid(ops::conv2d(r, weight, bias, 1, weight.shape()[2] / 2));
  if (gate) *gate = sa.value();
  return ops::broadcast_mul(r, sa);
}

Var kmfem(const Var& f, const Var& attn_weight, const Var& attn_bias, const Var& motion_weight,
          Tensor* gate) {
  if (f.value().rank() != 4 || f.shape()[0] < 2) {
    throw ArgumentError("kmfem needs at least 2 frames, got shape " + shape_to_string(f.shape()));
  }
  const Var feature = fl_sam(f, attn_weight, attn_bias, gate);
  const Var motion = ops::temporal_difference(feature);
  const Var convolved = ops::conv2d(motion, motion_weight, Var::constant(Tensor::zeros({motion_weight.shape()[0]})), 1, motion_weight.shape()[2] / 2);
  return ops::add(feature, ops::prepend_zero_frame(convolved));
}

Var residual_block(const Var& x, const ParamBinding& params, const std::string& prefix, std::size_t stride,
                   bool linear_mode) {
  const Var& w1 = params[prefix + ".conv1.w"];
  const std::size_t pad = w1.shape()[2] / 2;
  Var h = maybe_relu(ops::conv2d(x, w1, params[prefix + ".conv1.b"], stride, pad), linear_mode);
  h = ops::conv2d(h, params[prefix + ".conv2.w"], params[prefix + ".conv2.b"], 1, pad);
  const bool project = params.contains(prefix + ".proj.w");
  if (!project && (stride != 1 || x.shape()[1] != h.shape()[1])) {
    throw ConsistencyError(prefix + " changes shape but has no projection shortcut");
  }
  const Var shortcut =
      project ? ops::conv2d(x, params[prefix + ".proj.w"], params[prefix + ".proj.b"], stride, 0) : x;
  return maybe_relu(ops::add(h, shortcut), linear_mode);
}

Var run_low_branch(const Var& clip, const ParamBinding& params, const ModelConfig& cfg, GateMaps* gates) {
  Var x = run_stem(clip, params, "low", cfg);
  for (std::size_t b = 0; b < kNumBlocks; ++b) {
    x = residual_block(x, params, block_name("low", b), cfg.branch.block_strides[b], cfg.linear_mode);
    if (b < kNumInsertionPoints && cfg.toggles.fl_sam) {
      const std::string name = "low.fl_sam" + std::to_string(b + 1);
      Tensor gate;
      x = fl_sam(x, params[name + ".w"], params[name + ".b"], gates ? &gate : nullptr);
      if (gates) (*gates)[name] = std::move(gate);
    }
  }
  return x;
}

Var run_high_branch(const Var& clip, const ParamBinding& params, const ModelConfig& cfg, GateMaps* gates) {
  Var x = run_stem(clip, params, "high", cfg);
  for (std::size_t b = 0; b < kNumBlocks; ++b) {
    x = residual_block(x, params, block_name("high", b), cfg.branch.block_strides[b], cfg.linear_mode);
    if (b < kNumInsertionPoints && cfg.toggles.kmfem) {
      const std::string name = "high.kmfem" + std::to_string(b + 1);
      Tensor gate;
      x = kmfem(x, params[name + ".attn.w"], params[name + ".attn.b"], params[name + ".motion.w"], gates ? &gate : nullptr);
      if (gates) (*gates)[name] = std::move(gate);
    }
  }
  return x;
}

Var fuse_branches(const Var& low, const Var& high) {
  const Shape& l = low.shape();
  const Shape& h = high.shape();
  if (l.size() != 4 || h.size() != 4 || l[1] != h[1] || l[2] != h[2] || l[3] != h[3] || h[0] != 2 * l[0]) {
    throw ShapeError("fusion shape mismatch: low " + shape_to_string(l) + ", high " + shape_to_string(h) +
                     " (need equal C x H x W and twice the frames)");
  }
  return ops::add(low, ops::select_frames(high, 0, 2, l[0]));
}

CropResult crop_actor_features(const Var& fused_low, const Var& high, const std::vector<Box>& boxes,
                               const std::vector<int>& actor_ids, const std::vector<bool>& hidden,
                               std::size_t roi_size) {
  if (actor_ids.size() != boxes.size() || (!hidden.empty() && hidden.size() != boxes.size())) {
    throw ArgumentError("crop_actor_features: boxes, actor ids and hidden flags differ in length");
  }
  if (roi_size < 1) throw ArgumentError("ROI size must be >= 1");
  CropResult out;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (!hidden.empty() && hidden[i]) continue;
    try {
      require_valid_box(boxes[i]);
      out.actors.push_back(
          {i, actor_ids[i], ops::roi_align(fused_low, boxes[i], roi_size), ops::roi_align(high, boxes[i], roi_size)});
    } catch (const BoxError& e) {
      out.errors.push_back({i, actor_ids[i], e.what()});
    }
  }
  return out;
}

}  // namespace stpen
