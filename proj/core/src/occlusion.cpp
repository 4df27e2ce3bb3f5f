#include "stpen/occlusion.hpp"

#include <algorithm>
#include <map>

#include "stpen/errors.hpp"

namespace stpen {

OcclusionDecision occlusion_decision(std::span<const Box> target, std::span<const std::vector<Box>> occluders,
                                     std::size_t keyframe, const OcclusionThresholds& thresholds) {
  if (target.empty()) throw ArgumentError("hidden rule: empty window");
  if (occluders.size() != target.size()) {
    throw ArgumentError("hidden rule: " + std::to_string(target.size()) + " target frames but " +
                        std::to_string(occluders.size()) + " occluder frames");
  }
  if (keyframe >= target.size()) throw ArgumentError("hidden rule: keyframe outside the window");

  OcclusionDecision d;
  d.window_frames = target.size();
  for (std::size_t t = 0; t < target.size(); ++t) {
    const bool occluded = covered_fraction(target[t], occluders[t]) > thresholds.spatial;
    if (occluded) ++d.occluded_frames;
    if (occluded && t == keyframe) d.spatial = true;
  }
  d.temporal = static_cast<double>(d.occluded_frames) > thresholds.temporal * static_cast<double>(d.window_frames);
  d.hidden = d.spatial || d.temporal;
  return d;
}

std::set<int> apply_hidden_rule(const std::set<int>& behaviors, std::span<const Box> target,
                                std::span<const std::vector<Box>> others, std::size_t keyframe,
                                const OcclusionThresholds& thresholds) {
  if (target.empty()) throw ArgumentError("hidden rule: empty window");
  std::vector<std::vector<Box>> per_frame(target.size());
  for (const auto& track : others) {
    if (track.size() != target.size()) throw ArgumentError("hidden rule: occluder track length mismatch");
    for (std::size_t t = 0; t < track.size(); ++t) per_frame[t].push_back(track[t]);
  }
  if (occlusion_decision(target, per_frame, keyframe, thresholds).hidden) return {kHiddenId};
  return behaviors;
}

std::size_t mark_hidden_actors(std::vector<ClipAnnotation>& clips, int radius_s,
                               const OcclusionThresholds& thresholds) {
  std::map<KeyframeKey, const ClipAnnotation*> by_key;
  for (const auto& clip : clips) by_key[clip.key()] = &clip;

  // Decide on the original annotations, then apply, so marking one actor
  // never changes the window of another.
  std::vector<std::pair<std::size_t, std::size_t>> to_hide;
  for (std::size_t ci = 0; ci < clips.size(); ++ci) {
    const ClipAnnotation& clip = clips[ci];
    for (std::size_t ai = 0; ai < clip.actors.size(); ++ai) {
      const int actor_id = clip.actors[ai].actor_id;
      std::vector<Box> target;
      std::vector<std::vector<Box>> occluders;
      std::size_t keyframe = 0;
      for (int dt = -radius_s; dt <= radius_s; ++dt) {
        auto it = by_key.find({clip.video_id, clip.timestamp_s + dt});
        if (it == by_key.end()) continue;
        const auto& actors = it->second->actors;
        auto self = std::find_if(actors.begin(), actors.end(), [&](const auto& a) { return a.actor_id == actor_id; });
        if (self == actors.end()) continue;
        if (dt == 0) keyframe = target.size();
        target.push_back(self->box);
        std::vector<Box> frame;
        for (const auto& other : actors) {
          if (other.actor_id != actor_id) frame.push_back(other.box);
        }
        occluders.push_back(std::move(frame));
      }
      if (occlusion_decision(target, occluders, keyframe, thresholds).hidden && !clip.actors[ai].hidden()) {
        to_hide.emplace_back(ci, ai);
      }
    }
  }
  for (auto [ci, ai] : to_hide) clips[ci].actors[ai].behaviors = {kHiddenId};
  return to_hide.size();
}

}  // namespace stpen
