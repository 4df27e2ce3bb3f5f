#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stpen/annotation.hpp"

namespace stpen {

enum class Partition { kTrain, kVal, kTest };

std::string partition_name(Partition p);
Partition partition_from_name(const std::string& name);

enum class SplitUnit { kKeyframe, kVideo };

struct SplitManifest {
  std::uint64_t seed = 0;
  std::array<int, 3> ratios{7, 2, 1};
  SplitUnit unit = SplitUnit::kKeyframe;
  std::map<KeyframeKey, Partition> assignment;

  std::size_t count(Partition p) const;
  std::vector<KeyframeKey> keys(Partition p) const;
  friend bool operator==(const SplitManifest&, const SplitManifest&) = default;
};

/// Seeded permutation, then contiguous 70/20/10 % blocks (val and test sizes
/// are floored, the remainder goes to train). Needs >= 10 keyframes.
SplitManifest split_dataset(const std::vector<ClipAnnotation>& clips, std::uint64_t seed,
                            SplitUnit unit = SplitUnit::kKeyframe);

/// `partition<TAB>video_id<TAB>timestamp` lines after a `#` header line.
std::string serialize_split(const SplitManifest& manifest);
SplitManifest parse_split(const std::string& text);

/// Annotations whose keyframe is assigned to `partition`, in input order.
std::vector<ClipAnnotation> select_partition(const std::vector<ClipAnnotation>& clips,
                                             const SplitManifest& manifest, Partition partition);

}  // namespace stpen
