#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stpen/annotation.hpp"
#include "stpen/frame_store.hpp"

namespace stpen {

// Rectangles over a static noise background, one known behavior per actor.
enum class SynthBehavior { kStationary, kMoveRight, kMoveLeft, kGrow, kShrink, kBlink };

inline constexpr std::size_t kNumSynthBehaviors = 6;

std::string synth_behavior_name(SynthBehavior b);
/// Throws SpecError for an unknown name.
SynthBehavior synth_behavior_from_name(const std::string& name);
/// Vocabulary id used as the ground-truth label of a synthetic behavior.
int synth_behavior_label(SynthBehavior b);

struct SyntheticActor {
  SynthBehavior behavior = SynthBehavior::kStationary;
  /// Top-left pixel of the actor's extent over the clip; drawn from the seed when absent.
  std::optional<int> start_x;
  std::optional<int> start_y;
};

struct SyntheticSpec {
  std::string video_id = "synth";
  std::size_t canvas = 64;
  std::size_t frames = 64;
  double fps = 30.0;
  /// Annotated keyframe; its box is the tight rectangle at frame `frames / 2`.
  int timestamp_s = 1;
  /// Used when `actors` is empty: that many actors with seeded behaviors.
  std::size_t num_actors = 1;
  std::vector<SyntheticActor> actors;
  double speed = 0.5;  // px per frame
  std::size_t actor_width = 16;
  std::size_t actor_height = 16;
  /// Height range swept by grow/shrink.
  std::size_t min_height = 8;
  std::size_t max_height = 24;
  /// Frames per on/off phase of blink.
  std::size_t blink_phase = 8;
  std::uint64_t seed = 0;
};

/// Pixel rectangle [x, x+w) x [y, y+h).
struct PixelRect {
  int x = 0, y = 0, w = 0, h = 0;
  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

struct SyntheticClip {
  FrameStore store;
  std::vector<ClipAnnotation> annotations;
  std::vector<SynthBehavior> behaviors;  // per actor
  /// Actor geometry per frame, tracks[actor][frame]; blink keeps its rectangle while hidden.
  std::vector<std::vector<PixelRect>> tracks;
  std::vector<std::vector<bool>> drawn;
};

/// Deterministic for a fixed spec; values are 8-bit quantized so a PPM round
/// trip is lossless. Throws SpecError when an actor cannot fit.
SyntheticClip generate_synthetic_clip(const SyntheticSpec& spec);

/// JSON form of a spec; unknown keys are rejected with a ParseError.
SyntheticSpec parse_synthetic_spec(const std::string& json_text);
std::string serialize_synthetic_spec(const SyntheticSpec& spec);

struct SyntheticDatasetConfig {
  std::string prefix = "synth";
  std::size_t clips = 12;
  std::size_t canvas = 64;
  double speed = 0.5;
  std::uint64_t seed = 0;
};

/// Named presets: "smoke" (12 clips) and "benchmark_train" / "benchmark_test"
/// (200 / 50 clips, disjoint seeds). Throws ArgumentError for other names.
SyntheticDatasetConfig synthetic_preset(const std::string& name, std::uint64_t seed = 0);

struct SyntheticDataset {
  std::vector<FrameStore> stores;
  std::vector<ClipAnnotation> clips;  // clips[i] belongs to stores[i]
  std::vector<SynthBehavior> behaviors;
};

/// One single-actor clip per entry; behavior of clip i is i mod 6, positions seeded.
SyntheticDataset make_synthetic_dataset(const SyntheticDatasetConfig& cfg);

}  // namespace stpen
