#include "stpen/synthetic.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "stpen/errors.hpp"
#include "stpen/random.hpp"

namespace stpen {
namespace {

constexpr std::array<const char*, kNumSynthBehaviors> kSynthNames{"stationary", "move_right", "move_left",
                                                                  "grow",       "shrink",     "blink"};

// stand, move, walk, stand_up, lie_down, investigating
constexpr std::array<int, kNumSynthBehaviors> kSynthLabels{4, 5, 6, 11, 12, 7};

// Grow/shrink height steps once per low-rate sampling interval.
constexpr std::size_t kHeightBlock = 8;

struct Extent {
  int width = 0;
  int height = 0;
};

int travel(const SyntheticSpec& spec) {
  return static_cast<int>(std::lround(spec.speed * static_cast<double>(spec.frames - 1)));
}

// Size of the region an actor sweeps over the whole clip.
Extent sweep_extent(const SyntheticSpec& spec, SynthBehavior b) {
  const int w = static_cast<int>(spec.actor_width);
  const int h = static_cast<int>(spec.actor_height);
  switch (b) {
    case SynthBehavior::kMoveRight:
    case SynthBehavior::kMoveLeft:
      return {w + travel(spec), h};
    case SynthBehavior::kGrow:
    case SynthBehavior::kShrink:
      return {w, static_cast<int>(spec.max_height)};
    default:
      return {w, h};
  }
}

PixelRect rect_at(const SyntheticSpec& spec, SynthBehavior b, int x0, int y0, std::size_t t) {
  const int w = static_cast<int>(spec.actor_width);
  const int h = static_cast<int>(spec.actor_height);
  const int shift = static_cast<int>(std::lround(spec.speed * static_cast<double>(t)));
  switch (b) {
    case SynthBehavior::kMoveRight:
      return {x0 + shift, y0, w, h};
    case SynthBehavior::kMoveLeft:
      return {x0 + travel(spec) - shift, y0, w, h};
    case SynthBehavior::kGrow:
    case SynthBehavior::kShrink: {
      const std::size_t step = b == SynthBehavior::kGrow ? t : spec.frames - 1 - t;
      const double span = static_cast<double>(spec.max_height - spec.min_height);
      double level = 0.0;
      if (spec.frames % kHeightBlock == 0 && spec.frames / kHeightBlock >= 3) {
        // Constant within 8-frame blocks with one repeated level at the centre:
        // reversal then maps the sampled frames of both rates onto themselves
        // and leaves the centre-frame box unchanged.
        const std::size_t blocks = spec.frames / kHeightBlock;
        const std::size_t block = step / kHeightBlock;
        const std::size_t index = block < blocks / 2 ? block : block - 1;
        level = static_cast<double>(index) / static_cast<double>(blocks - 2);
      } else {
        level = static_cast<double>(step) / static_cast<double>(spec.frames - 1);
      }
      const int height = static_cast<int>(spec.min_height) + static_cast<int>(std::lround(span * level));
      const int bottom = y0 + static_cast<int>(spec.max_height);
      return {x0, bottom - height, w, height};
    }
    default:
      return {x0, y0, w, h};
  }
}

void check_spec(const SyntheticSpec& spec) {
  if (spec.canvas < 2) throw SpecError("canvas must be at least 2 px");
  if (spec.frames < 2) throw SpecError("clip needs at least 2 frames");
  if (!(spec.fps > 0.0)) throw SpecError("fps must be positive");
  if (!(spec.speed >= 0.0) || !std::isfinite(spec.speed)) throw SpecError("speed must be finite and non-negative");
  if (spec.actor_width == 0 || spec.actor_height == 0) throw SpecError("actor size must be positive");
  if (spec.min_height == 0 || spec.min_height > spec.max_height) throw SpecError("need 0 < min_height <= max_height");
  if (spec.blink_phase == 0) throw SpecError("blink_phase must be positive");
  if (spec.actors.empty() && spec.num_actors == 0) throw SpecError("spec has no actors");
}

int pick_start(std::optional<int> requested, int extent, int canvas, Rng& rng, std::size_t actor, const char* axis) {
  const int slack = canvas - extent;
  // Draw unconditionally so the stream does not depend on overrides.
  const int drawn = slack >= 0 ? static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(slack) + 1)) : 0;
  if (slack < 0) {
    throw SpecError("actor " + std::to_string(actor) + " needs " + std::to_string(extent) + " px along " + axis +
                    " but the canvas is " + std::to_string(canvas));
  }
  if (!requested) return drawn;
  if (*requested < 0 || *requested > slack) {
    throw SpecError("actor " + std::to_string(actor) + " start " + axis + "=" + std::to_string(*requested) +
                    " leaves the canvas (valid 0.." + std::to_string(slack) + ")");
  }
  return *requested;
}

}  // namespace

std::string synth_behavior_name(SynthBehavior b) { return kSynthNames[static_cast<std::size_t>(b)]; }

SynthBehavior synth_behavior_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kNumSynthBehaviors; ++i) {
    if (name == kSynthNames[i]) return static_cast<SynthBehavior>(i);
  }
  throw SpecError("unknown synthetic behavior '" + name + "'");
}

int synth_behavior_label(SynthBehavior b) { return kSynthLabels[static_cast<std::size_t>(b)]; }

SyntheticClip generate_synthetic_clip(const SyntheticSpec& spec) {
  check_spec(spec);
  const int canvas = static_cast<int>(spec.canvas);
  const std::size_t n = spec.canvas;

  Rng background_rng(derive_seed(spec.seed, 0));
  Tensor background({3, n, n});
  for (auto& v : background.storage()) v = 0.3 * uniform01(background_rng);

  std::vector<SyntheticActor> actors = spec.actors;
  const std::size_t count = actors.empty() ? spec.num_actors : actors.size();
  std::vector<std::array<double, 3>> colors(count);
  std::vector<std::pair<int, int>> starts(count);
  for (std::size_t a = 0; a < count; ++a) {
    Rng rng(derive_seed(spec.seed, a + 1));
    const auto behavior_draw = static_cast<std::size_t>(uniform_index(rng, kNumSynthBehaviors));
    if (spec.actors.empty()) actors.push_back({static_cast<SynthBehavior>(behavior_draw), {}, {}});
    for (auto& c : colors[a]) c = uniform(rng, 0.6, 1.0);
    const Extent e = sweep_extent(spec, actors[a].behavior);
    starts[a].first = pick_start(actors[a].start_x, e.width, canvas, rng, a, "x");
    starts[a].second = pick_start(actors[a].start_y, e.height, canvas, rng, a, "y");
  }

  SyntheticClip clip{FrameStore(spec.video_id, spec.fps, n, n), {}, {}, {}, {}};
  clip.tracks.assign(count, {});
  clip.drawn.assign(count, {});
  for (std::size_t a = 0; a < count; ++a) {
    clip.behaviors.push_back(actors[a].behavior);
    for (std::size_t t = 0; t < spec.frames; ++t) {
      clip.tracks[a].push_back(rect_at(spec, actors[a].behavior, starts[a].first, starts[a].second, t));
      const bool off = actors[a].behavior == SynthBehavior::kBlink && (t / spec.blink_phase) % 2 == 1;
      clip.drawn[a].push_back(!off);
    }
  }

  for (std::size_t t = 0; t < spec.frames; ++t) {
    Tensor frame = background;
    for (std::size_t a = 0; a < count; ++a) {
      if (!clip.drawn[a][t]) continue;
      const PixelRect& r = clip.tracks[a][t];
      for (std::size_t c = 0; c < 3; ++c)
        for (int y = r.y; y < r.y + r.h; ++y)
          for (int x = r.x; x < r.x + r.w; ++x)
            frame[(c * n + static_cast<std::size_t>(y)) * n + static_cast<std::size_t>(x)] = colors[a][c];
    }
    quantize_8bit(frame);
    clip.store.push_back(std::move(frame));
  }

  ClipAnnotation ann{spec.video_id, spec.timestamp_s, {}};
  const std::size_t key = spec.frames / 2;
  const double side = static_cast<double>(spec.canvas);
  for (std::size_t a = 0; a < count; ++a) {
    const PixelRect& r = clip.tracks[a][key];
    Box box{r.x / side, r.y / side, (r.x + r.w) / side, (r.y + r.h) / side};
    ann.actors.push_back({static_cast<int>(a), box, {synth_behavior_label(actors[a].behavior)}});
  }
  clip.annotations.push_back(std::move(ann));
  return clip;
}

SyntheticSpec parse_synthetic_spec(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("synthetic spec: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("synthetic spec must be a JSON object");
  SyntheticSpec s;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "video_id") s.video_id = value.get<std::string>();
      else if (key == "canvas") s.canvas = value.get<std::size_t>();
      else if (key == "frames") s.frames = value.get<std::size_t>();
      else if (key == "fps") s.fps = value.get<double>();
      else if (key == "timestamp_s") s.timestamp_s = value.get<int>();
      else if (key == "num_actors") s.num_actors = value.get<std::size_t>();
      else if (key == "speed") s.speed = value.get<double>();
      else if (key == "actor_width") s.actor_width = value.get<std::size_t>();
      else if (key == "actor_height") s.actor_height = value.get<std::size_t>();
      else if (key == "min_height") s.min_height = value.get<std::size_t>();
      else if (key == "max_height") s.max_height = value.get<std::size_t>();
      else if (key == "blink_phase") s.blink_phase = value.get<std::size_t>();
      else if (key == "seed") s.seed = value.get<std::uint64_t>();
      else if (key == "actors") {
        for (const auto& a : value) {
          SyntheticActor actor;
          for (const auto& [akey, avalue] : a.items()) {
            if (akey == "behavior") actor.behavior = synth_behavior_from_name(avalue.get<std::string>());
            else if (akey == "start_x") actor.start_x = avalue.get<int>();
            else if (akey == "start_y") actor.start_y = avalue.get<int>();
            else throw ParseError("synthetic spec: unknown actor key '" + akey + "'");
          }
          s.actors.push_back(actor);
        }
      } else {
        throw ParseError("synthetic spec: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("synthetic spec: ") + e.what());
  }
  return s;
}

std::string serialize_synthetic_spec(const SyntheticSpec& s) {
  nlohmann::ordered_json j = {{"video_id", s.video_id},       {"canvas", s.canvas},
                              {"frames", s.frames},           {"fps", s.fps},
                              {"timestamp_s", s.timestamp_s}, {"num_actors", s.num_actors},
                              {"speed", s.speed},             {"actor_width", s.actor_width},
                              {"actor_height", s.actor_height}, {"min_height", s.min_height},
                              {"max_height", s.max_height},   {"blink_phase", s.blink_phase},
                              {"seed", s.seed}};
  auto actors = nlohmann::ordered_json::array();
  for (const auto& a : s.actors) {
    nlohmann::ordered_json actor = {{"behavior", synth_behavior_name(a.behavior)}};
    if (a.start_x) actor["start_x"] = *a.start_x;
    if (a.start_y) actor["start_y"] = *a.start_y;
    actors.push_back(actor);
  }
  j["actors"] = actors;
  return j.dump(2) + "\n";
}

SyntheticDatasetConfig synthetic_preset(const std::string& name, std::uint64_t seed) {
  SyntheticDatasetConfig cfg;
  cfg.seed = seed;
  if (name == "smoke") {
    cfg.prefix = "smoke";
    cfg.clips = 12;
  } else if (name == "benchmark_train") {
    cfg.prefix = "train";
    cfg.clips = 200;
  } else if (name == "benchmark_test") {
    cfg.prefix = "test";
    cfg.clips = 50;
    cfg.seed = derive_seed(seed, 0x7e57);
  } else {
    throw ArgumentError("unknown synthetic preset '" + name + "' (expected smoke, benchmark_train, benchmark_test)");
  }
  return cfg;
}

SyntheticDataset make_synthetic_dataset(const SyntheticDatasetConfig& cfg) {
  SyntheticDataset out;
  for (std::size_t i = 0; i < cfg.clips; ++i) {
    char id[64];
    std::snprintf(id, sizeof(id), "%s_%04zu", cfg.prefix.c_str(), i);
    SyntheticSpec spec;
    spec.video_id = id;
    spec.canvas = cfg.canvas;
    spec.speed = cfg.speed;
    spec.seed = derive_seed(cfg.seed, i);
    spec.actors = {{static_cast<SynthBehavior>(i % kNumSynthBehaviors), {}, {}}};
    SyntheticClip clip = generate_synthetic_clip(spec);
    out.stores.push_back(std::move(clip.store));
    out.clips.push_back(std::move(clip.annotations.front()));
    out.behaviors.push_back(clip.behaviors.front());
  }
  return out;
}

}  // namespace stpen
