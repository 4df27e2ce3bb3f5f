#pragma once

// Hand-built annotation fixtures and small helpers shared by the test binaries.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "stpen/annotation.hpp"
#include "stpen/geometry.hpp"

namespace stpen::test {

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("stpen_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// One keyframe of pen "pen3" at t=12 s, eight pigs; pig 2 eats while
// standing, pig 5 is hidden.
inline const char* const kEightActorCsv =
    "pen3,12,0.0500,0.1000,0.2000,0.3000,1,0\n"
    "pen3,12,0.2500,0.1000,0.4000,0.3000,2,1\n"
    "pen3,12,0.4500,0.1000,0.6000,0.3000,1,2\n"
    "pen3,12,0.4500,0.1000,0.6000,0.3000,4,2\n"
    "pen3,12,0.6500,0.1000,0.8000,0.3000,3,3\n"
    "pen3,12,0.0500,0.5000,0.2000,0.7000,6,4\n"
    "pen3,12,0.2500,0.5000,0.4000,0.7000,13,5\n"
    "pen3,12,0.4500,0.5000,0.6000,0.7000,9,6\n"
    "pen3,12,0.6500,0.5000,0.8000,0.7500,12,7\n";

inline ClipAnnotation eight_actor_clip() {
  return {"pen3",
          12,
          {
              {0, Box{0.05, 0.1, 0.2, 0.3}, {1}},
              {1, Box{0.25, 0.1, 0.4, 0.3}, {2}},
              {2, Box{0.45, 0.1, 0.6, 0.3}, {1, 4}},
              {3, Box{0.65, 0.1, 0.8, 0.3}, {3}},
              {4, Box{0.05, 0.5, 0.2, 0.7}, {6}},
              {5, Box{0.25, 0.5, 0.4, 0.7}, {13}},
              {6, Box{0.45, 0.5, 0.6, 0.7}, {9}},
              {7, Box{0.65, 0.5, 0.8, 0.75}, {12}},
          }};
}

inline std::string via_single(const std::string& filename, int x, int y, int w, int h, const std::string& behavior) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                R"({"%s":{"filename":"%s","size":1,"regions":[{"shape_attributes":{"name":"rect","x":%d,"y":%d,)"
                R"("width":%d,"height":%d},"region_attributes":{"category":"0","behavior":"%s"}}]}})",
                filename.c_str(), filename.c_str(), x, y, w, h, behavior.c_str());
  return buf;
}

// Three images covering the three behavior attribute forms (comma list,
// checkbox map, array) and numeric or string actor ids.
inline const char* const kThreeImageVia = R"({
  "pen1_000030.jpg": {"filename": "pen1_000030.jpg", "size": 1, "file_attributes": {}, "regions": [
    {"shape_attributes": {"name": "rect", "x": 128, "y": 72, "width": 512, "height": 288},
     "region_attributes": {"category": "1", "behavior": "eat, stand"}},
    {"shape_attributes": {"name": "rect", "x": 640, "y": 360, "width": 640, "height": 360},
     "region_attributes": {"category": 2, "behavior": "lying"}}]},
  "pen1_000060.jpg": {"filename": "pen1_000060.jpg", "size": 1, "file_attributes": {}, "regions": [
    {"shape_attributes": {"name": "rect", "x": 0, "y": 0, "width": 640, "height": 360},
     "region_attributes": {"category": "1", "behavior": {"Stand up": true, "walk": false}}}]},
  "pen2_000090.jpg": {"filename": "pen2_000090.jpg", "size": 1, "file_attributes": {}, "regions": [
    {"shape_attributes": {"name": "rect", "x": 320, "y": 180, "width": 640, "height": 360},
     "region_attributes": {"category": "4", "behavior": ["Hidden"]}}]}
})";

inline std::vector<ClipAnnotation> three_image_clips() {
  return {
      {"pen1", 1, {{1, Box{0.1, 0.1, 0.5, 0.5}, {1, 4}}, {2, Box{0.5, 0.5, 1.0, 1.0}, {2}}}},
      {"pen1", 2, {{1, Box{0.0, 0.0, 0.5, 0.5}, {11}}}},
      {"pen2", 3, {{4, Box{0.25, 0.25, 0.75, 0.75}, {13}}}},
  };
}

struct OcclusionTrack {
  std::vector<Box> target;
  /// per_frame[t]: the other boxes at frame t.
  std::vector<std::vector<Box>> per_frame;
  /// actors[a][t]: one occluding actor, parked in the far corner when not covering.
  std::vector<std::vector<Box>> actors;
};

/// Target (0,0,0.5,0.5) in every frame; in the last `occluded` frames another
/// box covers the fraction `fraction` of it.
inline OcclusionTrack occlusion_track(std::size_t frames, std::size_t occluded, double fraction) {
  OcclusionTrack tr;
  tr.actors.resize(1);
  for (std::size_t t = 0; t < frames; ++t) {
    tr.target.push_back(Box{0.0, 0.0, 0.5, 0.5});
    const bool covering = t >= frames - occluded && fraction > 0.0;
    const Box other = covering ? Box{0.0, 0.0, 0.5 * fraction, 0.5} : Box{0.9, 0.9, 1.0, 1.0};
    tr.per_frame.push_back({other});
    tr.actors[0].push_back(other);
  }
  return tr;
}

/// `n` single-actor keyframes spread over a few videos.
inline std::vector<ClipAnnotation> keyframes(std::size_t n) {
  std::vector<ClipAnnotation> clips;
  for (std::size_t i = 0; i < n; ++i) {
    clips.push_back({"video" + std::to_string(i % 4), static_cast<int>(i), {{0, Box{0.1, 0.1, 0.4, 0.4}, {1}}}});
  }
  return clips;
}

}  // namespace stpen::test
