#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "stpen/annotation.hpp"
#include "stpen/errors.hpp"

namespace stpen {
namespace {

using Json = nlohmann::ordered_json;

struct FrameName {
  std::string video_id;
  long frame = 0;
};

FrameName split_frame_name(const std::string& filename) {
  std::string stem = filename;
  if (auto slash = stem.find_last_of("/\\"); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (auto dot = stem.rfind('.'); dot != std::string::npos) stem = stem.substr(0, dot);
  std::size_t end = stem.size();
  std::size_t begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1]))) --begin;
  if (begin == end) throw ParseError("image '" + filename + "' has no frame number");
  FrameName out;
  out.frame = std::stol(stem.substr(begin));
  std::size_t cut = begin;
  while (cut > 0 && (stem[cut - 1] == '_' || stem[cut - 1] == '-')) --cut;
  out.video_id = stem.substr(0, cut);
  if (out.video_id.empty()) throw ParseError("image '" + filename + "' has no video id");
  return out;
}

double number_field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError(where + ": missing shape attribute '" + key + "'");
  const Json& v = obj.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return std::stod(v.get<std::string>());
  throw ParseError(where + ": shape attribute '" + key + "' is not numeric");
}

int parse_actor_id(const Json& v, const std::string& where) {
  try {
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_string()) {
      std::size_t used = 0;
      const int id = std::stoi(v.get<std::string>(), &used);
      if (used == v.get<std::string>().size()) return id;
    }
  } catch (const std::exception&) {
  }
  throw ParseError(where + ": category is not an actor id");
}

int lookup_behavior(const std::string& raw, const std::string& where) {
  std::string name = raw;
  while (!name.empty() && std::isspace(static_cast<unsigned char>(name.front()))) name.erase(name.begin());
  while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) name.pop_back();
  if (auto id = behavior_id_from_name(name)) return *id;
  throw VocabError(where + ": unknown behavior '" + name + "'");
}

std::set<int> parse_behaviors(const Json& v, const std::string& where) {
  std::set<int> out;
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    std::size_t start = 0;
    while (start <= s.size()) {
      const std::size_t pos = s.find_first_of(",;", start);
      const std::string part = s.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
      if (part.find_first_not_of(" \t") != std::string::npos) out.insert(lookup_behavior(part, where));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
  } else if (v.is_object()) {
    for (const auto& [name, flag] : v.items()) {
      if (flag.is_boolean() ? flag.get<bool>() : true) out.insert(lookup_behavior(name, where));
    }
  } else if (v.is_array()) {
    for (const auto& item : v) out.insert(lookup_behavior(item.get<std::string>(), where));
  } else {
    throw ParseError(where + ": behavior attribute has unsupported type");
  }
  if (out.empty()) throw ParseError(where + ": empty behavior attribute");
  return out;
}

// Smallest-move pixel value whose division by `extent` reproduces `norm`.
double pixel_for(double norm, double extent) {
  double p = norm * extent;
  if (p / extent == norm) return p;
  double lo = p, hi = p;
  for (int step = 0; step < 8; ++step) {
    lo = std::nextafter(lo, -INFINITY);
    hi = std::nextafter(hi, INFINITY);
    if (lo / extent == norm) return lo;
    if (hi / extent == norm) return hi;
  }
  return p;
}

}  // namespace

std::vector<ClipAnnotation> parse_via_text(const std::string& text, const ViaOptions& options) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid VIA JSON: ") + e.what());
  }
  if (root.contains("_via_img_metadata")) root = root.at("_via_img_metadata");
  if (!root.is_object()) throw ParseError("VIA export must be a JSON object keyed by image entry");

  std::vector<ClipAnnotation> clips;
  std::map<KeyframeKey, std::size_t> index;
  for (const auto& [entry_key, entry] : root.items()) {
    const std::string filename = entry.contains("filename") ? entry.at("filename").get<std::string>() : entry_key;
    const FrameName frame = split_frame_name(filename);
    KeyframeKey key{frame.video_id, static_cast<int>(frame.frame / options.frames_per_second)};
    auto [it, inserted] = index.emplace(key, clips.size());
    if (inserted) clips.push_back(ClipAnnotation{key.video_id, key.timestamp_s, {}});
    ClipAnnotation& clip = clips[it->second];

    if (!entry.contains("regions")) throw ParseError(filename + ": missing 'regions'");
    std::size_t region_no = 0;
    for (const auto& region : entry.at("regions")) {
      const std::string where = filename + " region " + std::to_string(region_no++);
      if (!region.contains("shape_attributes")) throw ParseError(where + ": missing shape_attributes");
      if (!region.contains("region_attributes")) throw ParseError(where + ": missing region_attributes");
      const Json& shape = region.at("shape_attributes");
      const Json& attrs = region.at("region_attributes");
      const std::string shape_name = shape.value("name", std::string());
      if (shape_name != "rect") throw UnsupportedShapeError(where + ": unsupported region shape '" + shape_name + "'");
      if (!attrs.contains("category")) throw ParseError(where + ": region_attributes missing 'category'");
      if (!attrs.contains("behavior")) throw ParseError(where + ": region_attributes missing 'behavior'");

      const double x = number_field(shape, "x", where);
      const double y = number_field(shape, "y", where);
      const double w = number_field(shape, "width", where);
      const double h = number_field(shape, "height", where);
      Box box{x / options.frame_width, y / options.frame_height, (x + w) / options.frame_width,
              (y + h) / options.frame_height};
      if (!box.is_valid()) throw ValidationError(where + ": rectangle outside the declared frame");

      const int actor_id = parse_actor_id(attrs.at("category"), where);
      std::set<int> behaviors = parse_behaviors(attrs.at("behavior"), where);
      auto actor = std::find_if(clip.actors.begin(), clip.actors.end(),
                                [&](const ActorAnnotation& a) { return a.actor_id == actor_id; });
      if (actor == clip.actors.end()) {
        clip.actors.push_back(ActorAnnotation{actor_id, box, std::move(behaviors)});
      } else {
        actor->behaviors.insert(behaviors.begin(), behaviors.end());
      }
    }
  }
  for (const auto& clip : clips) validate_annotation(clip);
  return clips;
}

std::vector<ClipAnnotation> parse_via_export(const std::filesystem::path& path, const ViaOptions& options) {
  return parse_via_text(read_text_file(path), options);
}

std::string serialize_via(const std::vector<ClipAnnotation>& clips, const ViaOptions& options) {
  Json root = Json::object();
  for (const auto& clip : clips) {
    char frame[32];
    std::snprintf(frame, sizeof(frame), "%06ld",
                  static_cast<long>(clip.timestamp_s) * static_cast<long>(options.frames_per_second));
    const std::string filename = clip.video_id + "_" + frame + ".png";
    Json regions = Json::array();
    for (const auto& actor : clip.actors) {
      const double x1 = pixel_for(actor.box.x1, options.frame_width);
      const double y1 = pixel_for(actor.box.y1, options.frame_height);
      const double x2 = pixel_for(actor.box.x2, options.frame_width);
      const double y2 = pixel_for(actor.box.y2, options.frame_height);
      std::string behavior;
      for (int b : actor.behaviors) {
        if (!behavior.empty()) behavior += ",";
        behavior += behavior_name(b);
      }
      Json shape = {{"name", "rect"}, {"x", x1}, {"y", y1}, {"width", x2 - x1}, {"height", y2 - y1}};
      Json attrs = {{"category", std::to_string(actor.actor_id)}, {"behavior", behavior}};
      regions.push_back({{"shape_attributes", shape}, {"region_attributes", attrs}});
    }
    root[filename] = {{"filename", filename}, {"size", -1}, {"regions", regions}, {"file_attributes", Json::object()}};
  }
  return root.dump(2) + "\n";
}

}  // namespace stpen
