#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "stpen/geometry.hpp"
#include "stpen/vocab.hpp"

namespace stpen {

struct ActorAnnotation {
  int actor_id = 0;
  Box box;
  std::set<int> behaviors;

  bool hidden() const { return behaviors.count(kHiddenId) != 0; }
  friend bool operator==(const ActorAnnotation&, const ActorAnnotation&) = default;
};

/// Identity of one annotated keyframe.
struct KeyframeKey {
  std::string video_id;
  int timestamp_s = 0;
  friend auto operator<=>(const KeyframeKey&, const KeyframeKey&) = default;
};

/// Labeled actors of one keyframe.
struct ClipAnnotation {
  std::string video_id;
  int timestamp_s = 0;
  std::vector<ActorAnnotation> actors;

  KeyframeKey key() const { return {video_id, timestamp_s}; }
  friend bool operator==(const ClipAnnotation&, const ClipAnnotation&) = default;
};

/// Throws ValidationError on invalid boxes, empty or mixed-Hidden behavior
/// sets, or duplicate actor ids.
void validate_annotation(const ClipAnnotation& clip);

// AVA-style CSV: `video_id,timestamp,x1,y1,x2,y2,behavior_id,actor_id`, no
// header, one row per (actor, behavior). Behavior ids 0..12 follow
// kBehaviorNames; 13 is Hidden.
std::vector<ClipAnnotation> parse_ava_csv_text(const std::string& text);
std::vector<ClipAnnotation> parse_ava_csv(const std::filesystem::path& path);
std::string serialize_ava_csv(const std::vector<ClipAnnotation>& clips);
void write_ava_csv(const std::filesystem::path& path, const std::vector<ClipAnnotation>& clips);

struct ViaOptions {
  double frame_width = 1280.0;
  double frame_height = 720.0;
  /// Raw frame index in the filename divided by this gives the timestamp.
  int frames_per_second = 30;
};

// VGG Image Annotator region export (rectangles only). Image entries are
// named `<video_id>_<frame>.<ext>`; region_attributes carry `category`
// (actor id) and `behavior` (names, comma separated, or a {name: true} map).
std::vector<ClipAnnotation> parse_via_text(const std::string& text, const ViaOptions& options = {});
std::vector<ClipAnnotation> parse_via_export(const std::filesystem::path& path, const ViaOptions& options = {});
std::string serialize_via(const std::vector<ClipAnnotation>& clips, const ViaOptions& options = {});

struct BehaviorCounts {
  std::array<std::size_t, kNumBehaviors> per_class{};
  std::size_t hidden = 0;
  friend bool operator==(const BehaviorCounts&, const BehaviorCounts&) = default;
};

/// Number of (actor, keyframe) pairs carrying each behavior.
BehaviorCounts dataset_stats(const std::vector<ClipAnnotation>& clips);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Shortest round-trip decimal with at least four fractional digits.
std::string format_coordinate(double value);

}  // namespace stpen
