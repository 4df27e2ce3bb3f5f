#include "stpen/annotation.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

#include "stpen/errors.hpp"

namespace stpen {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view field, const char* what, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError("bad " + std::string(what) + " '" + std::string(field) + "'", line);
  }
  return value;
}

}  // namespace

void validate_annotation(const ClipAnnotation& clip) {
  std::set<int> ids;
  for (const auto& actor : clip.actors) {
    const std::string where = clip.video_id + "@" + std::to_string(clip.timestamp_s) + " actor " +
                              std::to_string(actor.actor_id);
    if (!actor.box.is_valid()) throw ValidationError(where + ": invalid box");
    if (actor.behaviors.empty()) throw ValidationError(where + ": no behaviors");
    if (actor.hidden() && actor.behaviors.size() != 1) {
      throw ValidationError(where + ": Hidden actor carries other behaviors");
    }
    for (int b : actor.behaviors) {
      if (!is_valid_behavior_id(b)) throw VocabError(where + ": unknown behavior id " + std::to_string(b));
    }
    if (actor.actor_id < 0) throw ValidationError(where + ": negative actor id");
    if (!ids.insert(actor.actor_id).second) throw ValidationError(where + ": duplicate actor id");
  }
}

std::vector<ClipAnnotation> parse_ava_csv_text(const std::string& text) {
  std::vector<ClipAnnotation> clips;
  std::map<KeyframeKey, std::size_t> clip_index;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 8) {
      throw ParseError("expected 8 fields, got " + std::to_string(fields.size()), line_no);
    }
    if (fields[0].empty()) throw ParseError("empty video_id", line_no);
    const int ts = parse_number<int>(fields[1], "timestamp", line_no);
    Box box{parse_number<double>(fields[2], "x1", line_no), parse_number<double>(fields[3], "y1", line_no),
            parse_number<double>(fields[4], "x2", line_no), parse_number<double>(fields[5], "y2", line_no)};
    const int behavior = parse_number<int>(fields[6], "behavior_id", line_no);
    const int actor_id = parse_number<int>(fields[7], "actor_id", line_no);
    for (std::size_t f = 2; f < 6; ++f) {
      const double v = parse_number<double>(fields[f], "coordinate", line_no);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError("line " + std::to_string(line_no) + ": coordinate " + std::string(fields[f]) +
                              " outside [0,1]");
      }
    }
    if (!box.is_valid()) throw ValidationError("line " + std::to_string(line_no) + ": degenerate box");
    if (!is_valid_behavior_id(behavior)) {
      throw VocabError("line " + std::to_string(line_no) + ": unknown behavior_id " + std::to_string(behavior));
    }

    KeyframeKey key{std::string(fields[0]), ts};
    auto [it, inserted] = clip_index.emplace(key, clips.size());
    if (inserted) clips.push_back(ClipAnnotation{key.video_id, ts, {}});
    ClipAnnotation& clip = clips[it->second];
    auto actor = std::find_if(clip.actors.begin(), clip.actors.end(),
                              [&](const ActorAnnotation& a) { return a.actor_id == actor_id; });
    if (actor == clip.actors.end()) {
      clip.actors.push_back(ActorAnnotation{actor_id, box, {behavior}});
    } else {
      if (!(actor->box == box)) {
        throw ValidationError("line " + std::to_string(line_no) + ": actor " + std::to_string(actor_id) +
                              " has conflicting boxes");
      }
      actor->behaviors.insert(behavior);
    }
  }
  for (const auto& clip : clips) validate_annotation(clip);
  return clips;
}

std::vector<ClipAnnotation> parse_ava_csv(const std::filesystem::path& path) {
  return parse_ava_csv_text(read_text_file(path));
}

std::string format_coordinate(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
  std::string s(buf, ptr);
  auto dot = s.find('.');
  if (dot == std::string::npos) {
    s += '.';
    dot = s.size() - 1;
  }
  while (s.size() - dot - 1 < 4) s += '0';
  return s;
}

std::string serialize_ava_csv(const std::vector<ClipAnnotation>& clips) {
  std::string out;
  for (const auto& clip : clips) {
    for (const auto& actor : clip.actors) {
      for (int b : actor.behaviors) {
        out += clip.video_id + "," + std::to_string(clip.timestamp_s) + "," + format_coordinate(actor.box.x1) + "," +
               format_coordinate(actor.box.y1) + "," + format_coordinate(actor.box.x2) + "," +
               format_coordinate(actor.box.y2) + "," + std::to_string(b) + "," + std::to_string(actor.actor_id) +
               "\n";
      }
    }
  }
  return out;
}

void write_ava_csv(const std::filesystem::path& path, const std::vector<ClipAnnotation>& clips) {
  write_text_file(path, serialize_ava_csv(clips));
}

BehaviorCounts dataset_stats(const std::vector<ClipAnnotation>& clips) {
  BehaviorCounts counts;
  for (const auto& clip : clips) {
    for (const auto& actor : clip.actors) {
      for (int b : actor.behaviors) {
        if (b == kHiddenId) {
          ++counts.hidden;
        } else if (b >= 0 && b < static_cast<int>(kNumBehaviors)) {
          ++counts.per_class[static_cast<std::size_t>(b)];
        }
      }
    }
  }
  return counts;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace stpen
