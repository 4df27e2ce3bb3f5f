#include "stpen/split.hpp"

#include <cstdio>
#include <set>
#include <sstream>

#include "stpen/errors.hpp"
#include "stpen/random.hpp"

namespace stpen {

std::string partition_name(Partition p) {
  switch (p) {
    case Partition::kTrain:
      return "train";
    case Partition::kVal:
      return "val";
    case Partition::kTest:
      return "test";
  }
  return "train";
}

Partition partition_from_name(const std::string& name) {
  if (name == "train") return Partition::kTrain;
  if (name == "val") return Partition::kVal;
  if (name == "test") return Partition::kTest;
  throw ArgumentError("unknown partition '" + name + "'");
}

std::size_t SplitManifest::count(Partition p) const {
  std::size_t n = 0;
  for (const auto& [_, part] : assignment) n += part == p;
  return n;
}

std::vector<KeyframeKey> SplitManifest::keys(Partition p) const {
  std::vector<KeyframeKey> out;
  for (const auto& [key, part] : assignment) {
    if (part == p) out.push_back(key);
  }
  return out;
}

namespace {

// Block sizes for n units under 7:2:1; remainders go to train.
std::array<std::size_t, 3> block_sizes(std::size_t n, const std::array<int, 3>& ratios) {
  const std::size_t total = static_cast<std::size_t>(ratios[0] + ratios[1] + ratios[2]);
  const std::size_t val = n * static_cast<std::size_t>(ratios[1]) / total;
  const std::size_t test = n * static_cast<std::size_t>(ratios[2]) / total;
  return {n - val - test, val, test};
}

Partition partition_for_rank(std::size_t rank, const std::array<std::size_t, 3>& sizes) {
  if (rank < sizes[0]) return Partition::kTrain;
  if (rank < sizes[0] + sizes[1]) return Partition::kVal;
  return Partition::kTest;
}

}  // namespace

SplitManifest split_dataset(const std::vector<ClipAnnotation>& clips, std::uint64_t seed, SplitUnit unit) {
  std::set<KeyframeKey> unique_keys;
  for (const auto& c : clips) unique_keys.insert(c.key());
  if (unique_keys.size() < 10) {
    throw SizeError("split needs at least 10 keyframes, got " + std::to_string(unique_keys.size()));
  }
  SplitManifest m;
  m.seed = seed;
  m.unit = unit;
  Rng rng(seed);
  if (unit == SplitUnit::kKeyframe) {
    std::vector<KeyframeKey> keys(unique_keys.begin(), unique_keys.end());
    shuffle(keys, rng);
    const auto sizes = block_sizes(keys.size(), m.ratios);
    for (std::size_t i = 0; i < keys.size(); ++i) m.assignment[keys[i]] = partition_for_rank(i, sizes);
  } else {
    std::set<std::string> video_set;
    for (const auto& k : unique_keys) video_set.insert(k.video_id);
    std::vector<std::string> videos(video_set.begin(), video_set.end());
    shuffle(videos, rng);
    const auto sizes = block_sizes(videos.size(), m.ratios);
    std::map<std::string, Partition> video_part;
    for (std::size_t i = 0; i < videos.size(); ++i) video_part[videos[i]] = partition_for_rank(i, sizes);
    for (const auto& k : unique_keys) m.assignment[k] = video_part[k.video_id];
  }
  return m;
}

std::string serialize_split(const SplitManifest& manifest) {
  std::ostringstream out;
  out << "# seed=" << manifest.seed << " ratios=" << manifest.ratios[0] << ":" << manifest.ratios[1] << ":"
      << manifest.ratios[2] << " unit=" << (manifest.unit == SplitUnit::kKeyframe ? "keyframe" : "video") << "\n";
  for (const auto& [key, part] : manifest.assignment) {
    out << partition_name(part) << "\t" << key.video_id << "\t" << key.timestamp_s << "\n";
  }
  return out.str();
}

SplitManifest parse_split(const std::string& text) {
  SplitManifest m;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream header(line.substr(1));
      std::string token;
      while (header >> token) {
        if (token.rfind("seed=", 0) == 0) m.seed = std::stoull(token.substr(5));
        if (token.rfind("unit=", 0) == 0) m.unit = token.substr(5) == "video" ? SplitUnit::kVideo : SplitUnit::kKeyframe;
        if (token.rfind("ratios=", 0) == 0) {
          int a = 0, b = 0, c = 0;
          if (std::sscanf(token.c_str() + 7, "%d:%d:%d", &a, &b, &c) == 3) m.ratios = {a, b, c};
        }
      }
      continue;
    }
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw ParseError("expected partition<TAB>video_id<TAB>timestamp", line_no);
    Partition p;
    try {
      p = partition_from_name(line.substr(0, t1));
    } catch (const ArgumentError& e) {
      throw ParseError(e.what(), line_no);
    }
    KeyframeKey key{line.substr(t1 + 1, t2 - t1 - 1), 0};
    try {
      std::size_t used = 0;
      const std::string ts = line.substr(t2 + 1);
      key.timestamp_s = std::stoi(ts, &used);
      if (used != ts.size()) throw ParseError("bad timestamp", line_no);
    } catch (const std::logic_error&) {
      throw ParseError("bad timestamp", line_no);
    }
    if (!m.assignment.emplace(key, p).second) throw ParseError("duplicate keyframe", line_no);
  }
  return m;
}

std::vector<ClipAnnotation> select_partition(const std::vector<ClipAnnotation>& clips,
                                             const SplitManifest& manifest, Partition partition) {
  std::vector<ClipAnnotation> out;
  for (const auto& c : clips) {
    auto it = manifest.assignment.find(c.key());
    if (it != manifest.assignment.end() && it->second == partition) out.push_back(c);
  }
  return out;
}

}  // namespace stpen
