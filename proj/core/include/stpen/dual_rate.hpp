#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stpen/annotation.hpp"
#include "stpen/frame_store.hpp"
#include "stpen/tensor.hpp"

namespace stpen {

struct SamplingConfig {
  std::size_t window = 64;
  std::size_t low_frames = 8;
  std::size_t high_frames = 16;
  std::size_t frame_size = 224;
};

/// Paired low/high-rate views of one keyframe plus its actors.
struct DualRateSample {
  std::string video_id;
  int timestamp_s = 0;
  std::size_t frame_size = 0;
  Tensor low;   // [low_frames x 3 x S x S]
  Tensor high;  // [high_frames x 3 x S x S]
  std::vector<std::size_t> low_indices;
  std::vector<std::size_t> high_indices;

  std::vector<int> actor_ids;
  std::vector<Box> boxes;
  std::vector<Tensor> targets;  // [13] 0/1 per actor
  std::vector<bool> hidden;

  std::size_t visible_actor_count() const;
};

/// Bilinear resampling of a [C x H x W] image to [C x S x S] on the
/// pixel-centre grid (border samples clamp).
Tensor resize_bilinear(const Tensor& image, std::size_t size);

/// Raw frame indices of the high- and low-rate views for a keyframe. The
/// window is centred on the keyframe and shifted (never padded) to fit.
struct WindowIndices {
  std::size_t start = 0;
  std::vector<std::size_t> high;
  std::vector<std::size_t> low;
};
WindowIndices dual_rate_indices(std::size_t store_count, std::size_t keyframe_index, const SamplingConfig& cfg);

/// Frames only; actor fields are left empty.
DualRateSample sample_dual_rate(const FrameStore& store, std::size_t keyframe_index, const SamplingConfig& cfg = {});

/// Sample for an annotated keyframe (keyframe index = timestamp x fps).
DualRateSample make_sample(const FrameStore& store, const ClipAnnotation& clip, const SamplingConfig& cfg = {});

/// 13-element 0/1 target vector; Hidden maps to all zeros.
Tensor behavior_targets(const std::set<int>& behaviors);

}  // namespace stpen
