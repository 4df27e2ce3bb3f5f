#include "stpen/vocab.hpp"

#include <cctype>

#include "stpen/errors.hpp"

namespace stpen {
namespace {

std::string normalize(std::string_view name) {
  std::string out;
  for (char ch : name) {
    if (ch == ' ' || ch == '_') {
      out += '_';
    } else {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
  }
  return out;
}

}  // namespace

std::optional<int> behavior_id_from_name(std::string_view name) {
  const std::string key = normalize(name);
  for (std::size_t i = 0; i < kBehaviorNames.size(); ++i) {
    if (normalize(kBehaviorNames[i]) == key) return static_cast<int>(i);
  }
  if (key == "hidden") return kHiddenId;
  return std::nullopt;
}

std::string behavior_name(int id) {
  if (id == kHiddenId) return std::string(kHiddenName);
  if (id < 0 || id >= static_cast<int>(kNumBehaviors)) throw VocabError("unknown behavior id " + std::to_string(id));
  return std::string(kBehaviorNames[static_cast<std::size_t>(id)]);
}

bool is_valid_behavior_id(int id) { return (id >= 0 && id < static_cast<int>(kNumBehaviors)) || id == kHiddenId; }

}  // namespace stpen
