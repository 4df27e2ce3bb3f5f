#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <vector>

#include "stpen/annotation.hpp"

namespace stpen {

struct OcclusionThresholds {
  /// A frame is occluded when strictly more than this fraction of the target is covered.
  double spatial = 2.0 / 3.0;
  /// Hidden when strictly more than this fraction of the window's frames is occluded.
  double temporal = 2.0 / 3.0;
};

struct OcclusionDecision {
  bool hidden = false;
  bool spatial = false;   // keyframe occluded
  bool temporal = false;  // too many occluded frames
  std::size_t occluded_frames = 0;
  std::size_t window_frames = 0;
};

/// `target[t]` is the actor's box at frame t; `occluders[t]` the other actors' boxes at t.
OcclusionDecision occlusion_decision(std::span<const Box> target, std::span<const std::vector<Box>> occluders,
                                     std::size_t keyframe, const OcclusionThresholds& thresholds = {});

/// Returns `behaviors` unchanged, or {Hidden} when the actor is occluded
/// spatially at the keyframe or temporally across the window. `others[a][t]`
/// is other actor a at frame t. Throws ArgumentError on an empty window.
std::set<int> apply_hidden_rule(const std::set<int>& behaviors, std::span<const Box> target,
                                std::span<const std::vector<Box>> others, std::size_t keyframe,
                                const OcclusionThresholds& thresholds = {});

/// Applies the rule to each actor using the keyframes of the same video within
/// +-radius seconds as its window. Returns the number of actors marked Hidden.
std::size_t mark_hidden_actors(std::vector<ClipAnnotation>& clips, int radius_s = 1,
                               const OcclusionThresholds& thresholds = {});

}  // namespace stpen
