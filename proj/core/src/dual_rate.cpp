#include "stpen/dual_rate.hpp"

#include <algorithm>
#include <cmath>

#include "stpen/errors.hpp"

namespace stpen {

std::size_t DualRateSample::visible_actor_count() const {
  return static_cast<std::size_t>(std::count(hidden.begin(), hidden.end(), false));
}

Tensor resize_bilinear(const Tensor& image, std::size_t size) {
  if (image.rank() != 3) throw ShapeError("resize_bilinear expects [C x H x W], got " + shape_to_string(image.shape()));
  const std::size_t C = image.dim(0), H = image.dim(1), W = image.dim(2);
  if (size == 0) throw ArgumentError("resize_bilinear: size must be positive");
  if (H == size && W == size) return image;

  struct Tap {
    std::size_t lo, hi;
    double frac;
  };
  auto taps = [size](std::size_t extent) {
    std::vector<Tap> out(size);
    const double scale = static_cast<double>(extent) / static_cast<double>(size);
    for (std::size_t i = 0; i < size; ++i) {
      double u = (static_cast<double>(i) + 0.5) * scale - 0.5;
      u = std::clamp(u, 0.0, static_cast<double>(extent - 1));
      const auto lo = static_cast<std::size_t>(std::floor(u));
      out[i] = {lo, std::min(lo + 1, extent - 1), u - static_cast<double>(lo)};
    }
    return out;
  };
  const auto ty = taps(H);
  const auto tx = taps(W);
  Tensor out({C, size, size});
  for (std::size_t c = 0; c < C; ++c) {
    const std::size_t base = c * H * W;
    for (std::size_t i = 0; i < size; ++i) {
      const Tap& a = ty[i];
      for (std::size_t j = 0; j < size; ++j) {
        const Tap& b = tx[j];
        const double top = (1 - b.frac) * image[base + a.lo * W + b.lo] + b.frac * image[base + a.lo * W + b.hi];
        const double bot = (1 - b.frac) * image[base + a.hi * W + b.lo] + b.frac * image[base + a.hi * W + b.hi];
        out[(c * size + i) * size + j] = (1 - a.frac) * top + a.frac * bot;
      }
    }
  }
  return out;
}

WindowIndices dual_rate_indices(std::size_t store_count, std::size_t keyframe_index, const SamplingConfig& cfg) {
  if (cfg.high_frames == 0 || cfg.low_frames == 0 || cfg.high_frames != 2 * cfg.low_frames ||
      cfg.window % cfg.high_frames != 0) {
    throw ArgumentError("sampling needs high_frames = 2 x low_frames dividing the window");
  }
  if (store_count < cfg.window) {
    throw ArgumentError("invalid window: store has " + std::to_string(store_count) + " frames, window needs " +
                        std::to_string(cfg.window));
  }
  const std::size_t half = cfg.window / 2;
  std::size_t start = keyframe_index > half ? keyframe_index - half : 0;
  start = std::min(start, store_count - cfg.window);

  WindowIndices w;
  w.start = start;
  const std::size_t high_stride = cfg.window / cfg.high_frames;
  for (std::size_t k = 0; k < cfg.high_frames; ++k) w.high.push_back(start + k * high_stride);
  for (std::size_t k = 0; k < cfg.low_frames; ++k) w.low.push_back(w.high[2 * k]);
  return w;
}

DualRateSample sample_dual_rate(const FrameStore& store, std::size_t keyframe_index, const SamplingConfig& cfg) {
  if (store.width() < 2 || store.height() < 2) throw ArgumentError("frames must be at least 2x2");
  const WindowIndices w = dual_rate_indices(store.count(), keyframe_index, cfg);
  const std::size_t S = cfg.frame_size;
  const std::size_t frame_len = 3 * S * S;

  DualRateSample s;
  s.video_id = store.video_id();
  s.frame_size = S;
  s.high_indices = w.high;
  s.low_indices = w.low;
  s.high = Tensor({cfg.high_frames, 3, S, S});
  s.low = Tensor({cfg.low_frames, 3, S, S});
  for (std::size_t k = 0; k < w.high.size(); ++k) {
    const Tensor f = resize_bilinear(store.frame(w.high[k]), S);
    std::copy(f.storage().begin(), f.storage().end(), s.high.storage().begin() + k * frame_len);
    if (k % 2 == 0) std::copy(f.storage().begin(), f.storage().end(), s.low.storage().begin() + (k / 2) * frame_len);
  }
  return s;
}

Tensor behavior_targets(const std::set<int>& behaviors) {
  Tensor t({kNumBehaviors});
  for (int b : behaviors) {
    if (b >= 0 && b < static_cast<int>(kNumBehaviors)) t[static_cast<std::size_t>(b)] = 1.0;
  }
  return t;
}

DualRateSample make_sample(const FrameStore& store, const ClipAnnotation& clip, const SamplingConfig& cfg) {
  if (clip.video_id != store.video_id()) {
    throw ArgumentError("annotation for '" + clip.video_id + "' applied to store '" + store.video_id() + "'");
  }
  const auto keyframe = static_cast<std::size_t>(std::llround(std::max(0.0, clip.timestamp_s * store.fps())));
  DualRateSample s = sample_dual_rate(store, keyframe, cfg);
  s.timestamp_s = clip.timestamp_s;
  for (const auto& actor : clip.actors) {
    s.actor_ids.push_back(actor.actor_id);
    s.boxes.push_back(actor.box);
    s.targets.push_back(behavior_targets(actor.behaviors));
    s.hidden.push_back(actor.hidden());
  }
  return s;
}

}  // namespace stpen
