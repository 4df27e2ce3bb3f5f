#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace stpen {

/// Scoreable behaviors, index = class id.
inline constexpr std::size_t kNumBehaviors = 13;
inline constexpr std::array<std::string_view, kNumBehaviors> kBehaviorNames{
    "drink", "eat",           "lying", "sitting",        "stand",    "move",    "walk",
    "investigating", "playwithtoy", "fight", "nose-touch-pig", "stand_up", "lie_down"};

/// Reserved non-class label for occluded actors. Written as id 13.
inline constexpr int kHiddenId = 13;
inline constexpr std::string_view kHiddenName = "Hidden";

/// Accepts the canonical names case-insensitively, with spaces or underscores
/// ("Stand up" == "stand_up"), and "Hidden".
std::optional<int> behavior_id_from_name(std::string_view name);

std::string behavior_name(int id);

bool is_valid_behavior_id(int id);

}  // namespace stpen
