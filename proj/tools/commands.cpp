#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "stpen/annotation.hpp"
#include "stpen/checkpoint.hpp"
#include "stpen/errors.hpp"
#include "stpen/evaluation.hpp"
#include "stpen/experiment.hpp"
#include "stpen/occlusion.hpp"
#include "stpen/split.hpp"
#include "stpen/synthetic.hpp"

namespace stpen::cli {
namespace {

namespace fs = std::filesystem;

/// Frames, annotations and partition assignment of one run.
struct LoadedData {
  std::vector<FrameStore> stores;
  std::vector<ClipAnnotation> clips;
  SplitManifest manifest;
};

void append(LoadedData& into, SyntheticDataset&& ds, Partition p) {
  for (const auto& c : ds.clips) into.manifest.assignment[c.key()] = p;
  for (auto& s : ds.stores) into.stores.push_back(std::move(s));
  for (auto& c : ds.clips) into.clips.push_back(std::move(c));
}

LoadedData synthetic_data(const std::string& name, std::uint64_t seed) {
  LoadedData d;
  if (name == "smoke") {
    SyntheticDataset ds = make_synthetic_dataset(synthetic_preset("smoke", seed));
    d.manifest = split_dataset(ds.clips, seed);
    d.stores = std::move(ds.stores);
    d.clips = std::move(ds.clips);
  } else if (name == "benchmark") {
    // Train and test come from disjoint generator seeds; val stays empty.
    d.manifest.seed = seed;
    append(d, make_synthetic_dataset(synthetic_preset("benchmark_train", seed)), Partition::kTrain);
    append(d, make_synthetic_dataset(synthetic_preset("benchmark_test", seed)), Partition::kTest);
  } else {
    throw UsageError("unknown synthetic dataset '" + name + "' (expected smoke or benchmark)");
  }
  return d;
}

std::vector<ClipAnnotation> read_annotations(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".csv") return parse_ava_csv(path);
  if (ext == ".json") return parse_via_export(path);
  throw UsageError("annotation file must be .csv (AVA) or .json (VIA): " + path.string());
}

std::vector<FrameStore> open_stores(const fs::path& dir, const std::vector<ClipAnnotation>& clips) {
  std::vector<FrameStore> stores;
  std::vector<std::string> seen;
  for (const auto& c : clips) {
    if (std::find(seen.begin(), seen.end(), c.video_id) != seen.end()) continue;
    seen.push_back(c.video_id);
    const fs::path video_dir = dir / c.video_id;
    if (!fs::exists(video_dir / "manifest.json")) {
      throw ArgumentError("no frame store for video '" + c.video_id + "' under " + dir.string());
    }
    stores.push_back(FrameStore::open(video_dir));
  }
  return stores;
}

bool has_file_data(const RunConfig& cfg) { return !cfg.data_dir.empty() || !cfg.annotations.empty(); }

LoadedData load_data(const RunConfig& cfg, bool need_frames = true) {
  if (!cfg.synth.empty()) {
    if (has_file_data(cfg)) throw UsageError("--synth cannot be combined with --data/--annotations");
    LoadedData d = synthetic_data(cfg.synth, cfg.seed);
    if (!cfg.split_file.empty()) d.manifest = parse_split(read_text_file(cfg.split_file));
    return d;
  }
  if (cfg.annotations.empty()) throw UsageError("missing data: pass --synth or --annotations (and --data)");
  if (need_frames && cfg.data_dir.empty()) throw UsageError("missing data: --data <frames dir> is required");
  LoadedData d;
  d.clips = read_annotations(cfg.annotations);
  d.manifest = cfg.split_file.empty() ? split_dataset(d.clips, cfg.seed)
                                      : parse_split(read_text_file(cfg.split_file));
  if (!cfg.data_dir.empty()) d.stores = open_stores(cfg.data_dir, d.clips);
  return d;
}

std::vector<DualRateSample> samples_for(const LoadedData& d, Partition p, const ModelConfig& model) {
  return build_samples(d.stores, select_partition(d.clips, d.manifest, p), sampling_for(model));
}

Partition requested_split(const RunConfig& cfg) {
  try {
    return partition_from_name(cfg.split);
  } catch (const ArgumentError&) {
    throw UsageError("--split must be train, val or test (got '" + cfg.split + "')");
  }
}

void require_out(const RunConfig& cfg) {
  if (cfg.out.empty()) throw UsageError("--out <dir> is required for " + mode_name(cfg.mode));
  fs::create_directories(cfg.out);
}

void require_checkpoint(const RunConfig& cfg) {
  if (cfg.checkpoint.empty()) throw UsageError("--checkpoint is required for " + mode_name(cfg.mode));
}

std::string checkpoint_name(std::size_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%03zu.ckpt", epoch);
  return buf;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_out(cfg);
  const LoadedData data = load_data(cfg);
  TrainConfig train = cfg.train;
  std::optional<TrainingState> state;
  if (!cfg.resume.empty()) {
    const Checkpoint ckpt = load_checkpoint(cfg.resume);
    state.emplace(state_from_checkpoint(ckpt));
    // A resumed run keeps the stored schedule; only the target epoch count is taken from the invocation.
    train = ckpt.train;
    train.epochs = cfg.train.epochs;
    if (train.epochs < state->epoch) {
      throw UsageError("--epochs " + std::to_string(train.epochs) + " is below the checkpoint's " +
                       std::to_string(state->epoch) + " completed epochs");
    }
  } else {
    state.emplace(fresh_state(cfg.model, train));
  }
  const ModelConfig& model_cfg = state->model.config();
  const std::vector<DualRateSample> samples = samples_for(data, Partition::kTrain, model_cfg);
  if (samples.empty()) throw EmptyEvalError("training split is empty");

  write_text_file(cfg.out / "split.tsv", serialize_split(data.manifest));
  const fs::path ckpt_dir = cfg.out / "checkpoints";
  fs::create_directories(ckpt_dir);
  const fs::path log_path = cfg.out / "train_log.csv";
  const bool append_log = !cfg.resume.empty() && fs::exists(log_path);
  std::ofstream log(log_path, append_log ? std::ios::app : std::ios::trunc);
  if (!log) throw Error("cannot write " + log_path.string());
  if (!append_log) log << epoch_log_header();

  double final_loss = 0.0;
  train_until(*state, samples, train, train.epochs, [&](const TrainingState& s, const EpochStats& stats) {
    save_checkpoint(ckpt_dir / checkpoint_name(s.epoch), make_checkpoint(s, train));
    log << epoch_log_line(stats);
    log.flush();
    err << "epoch " << s.epoch << "/" << train.epochs << " loss=" << format_value(stats.mean_loss) << '\n';
    final_loss = stats.mean_loss;
  });
  out << "final_loss=" << format_value(final_loss) << '\n';
  return 0;
}

void dump_gates(const fs::path& root, const DualRateSample& sample, const GateMaps& gates) {
  const fs::path dir = root / (sample.video_id + "_" + std::to_string(sample.timestamp_s));
  fs::create_directories(dir);
  for (const auto& [name, gate] : gates) write_gate_grid(dir / (name + ".bin"), gate);
}

struct LoadedModel {
  Checkpoint ckpt;
  Model model;
};

LoadedModel load_model(const RunConfig& cfg) {
  require_checkpoint(cfg);
  Checkpoint ckpt = load_checkpoint(cfg.checkpoint);
  require_compatible_vocab(ckpt.vocab);
  Model model(ckpt.model, ckpt.params);
  return {std::move(ckpt), std::move(model)};
}

std::vector<PredictionRecord> run_forward(const RunConfig& cfg, const Model& model,
                                          const std::vector<DualRateSample>& samples) {
  std::vector<PredictionRecord> records;
  for (const auto& s : samples) {
    GateMaps gates;
    auto r = model.forward(s, cfg.dump_attention ? &gates : nullptr);
    if (cfg.dump_attention) dump_gates(cfg.out / "attention", s, gates);
    for (auto& rec : r) records.push_back(std::move(rec));
  }
  return records;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_out(cfg);
  const Partition split = requested_split(cfg);
  const LoadedModel lm = load_model(cfg);
  const LoadedData data = load_data(cfg);
  const auto samples = samples_for(data, split, lm.model.config());
  const auto records = run_forward(cfg, lm.model, samples);
  write_text_file(cfg.out / "predictions.csv", serialize_records(records));
  const EvalReport report = mean_ap(records);
  write_text_file(cfg.out / "report.csv", report_csv(report));
  write_text_file(cfg.out / "report.txt", report_text(report));
  out << "mAP=" << format_value(report.map) << '\n';
  if (report.defined_classes() < kNumBehaviors) {
    err << report.note() << '\n';
    if (!cfg.allow_undefined) {
      err << "error: undefined classes in the evaluation split (pass --allow-undefined to accept)\n";
      return 1;
    }
  }
  return 0;
}

int cmd_infer(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require_out(cfg);
  const Partition split = requested_split(cfg);
  const LoadedModel lm = load_model(cfg);
  const LoadedData data = load_data(cfg);
  const auto samples = samples_for(data, split, lm.model.config());
  auto records = run_forward(cfg, lm.model, samples);
  for (auto& r : records) r.targets.clear();
  write_text_file(cfg.out / "predictions.csv", serialize_records(records));
  out << "records=" << records.size() << '\n';
  return 0;
}

void write_dataset(const fs::path& root, const LoadedData& d) {
  for (const auto& s : d.stores) s.save(root / "frames" / s.video_id());
  write_ava_csv(root / "annotations.csv", d.clips);
  write_text_file(root / "split.tsv", serialize_split(d.manifest));
}

int cmd_synth(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require_out(cfg);
  LoadedData d;
  if (!cfg.spec.empty()) {
    if (!cfg.synth.empty()) throw UsageError("--spec cannot be combined with --synth");
    SyntheticSpec spec = parse_synthetic_spec(read_text_file(cfg.spec));
    SyntheticClip clip = generate_synthetic_clip(spec);
    for (const auto& c : clip.annotations) d.manifest.assignment[c.key()] = Partition::kTrain;
    d.manifest.seed = cfg.seed;
    d.stores.push_back(std::move(clip.store));
    d.clips = std::move(clip.annotations);
  } else {
    d = synthetic_data(cfg.synth.empty() ? "smoke" : cfg.synth, cfg.seed);
  }
  write_dataset(cfg.out, d);
  out << "videos=" << d.stores.size() << " keyframes=" << d.clips.size() << '\n';
  return 0;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  validate_model_config(cfg.model);
  validate_train_config(cfg.train);
  LoadedData d = load_data(cfg, false);
  for (const auto& c : d.clips) validate_annotation(c);
  for (const auto& [key, p] : d.manifest.assignment) {
    const bool known = std::any_of(d.clips.begin(), d.clips.end(), [&](const ClipAnnotation& c) {
      return c.key() == key;
    });
    if (!known) {
      throw ConsistencyError("split assigns unknown keyframe " + key.video_id + "@" +
                             std::to_string(key.timestamp_s));
    }
  }
  std::size_t samples = 0;
  if (!d.stores.empty()) samples = build_samples(d.stores, d.clips, sampling_for(cfg.model)).size();
  const BehaviorCounts before = dataset_stats(d.clips);
  std::vector<ClipAnnotation> ruled = d.clips;
  const std::size_t newly_hidden = mark_hidden_actors(ruled);
  out << "keyframes=" << d.clips.size() << " samples=" << samples << " hidden=" << before.hidden
      << " hidden_by_rule=" << newly_hidden << '\n';
  for (std::size_t k = 0; k < kNumBehaviors; ++k) {
    out << behavior_name(static_cast<int>(k)) << '=' << before.per_class[k] << '\n';
  }
  out << "split train=" << d.manifest.count(Partition::kTrain) << " val=" << d.manifest.count(Partition::kVal)
      << " test=" << d.manifest.count(Partition::kTest) << '\n';
  return 0;
}

int cmd_ablate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_out(cfg);
  const Partition split = requested_split(cfg);
  const LoadedData data = load_data(cfg);
  const auto train = samples_for(data, Partition::kTrain, cfg.model);
  const auto test = samples_for(data, split, cfg.model);
  const auto runs = run_ablation(cfg.model, cfg.train, ablation_configs(), train, test, [&](const AblationRun& r) {
    err << r.toggles.name() << " mAP=" << format_value(r.report.map) << '\n';
  });
  const AblationTable table = ablation_report(runs);
  write_text_file(cfg.out / "ablation.csv", ablation_csv(table));
  write_text_file(cfg.out / "ablation.txt", ablation_text(table));
  out << "configurations=" << table.columns.size() << '\n';
  return 0;
}

}  // namespace

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  switch (cfg.mode) {
    case Mode::kTrain:
      return cmd_train(cfg, out, err);
    case Mode::kEval:
      return cmd_eval(cfg, out, err);
    case Mode::kInfer:
      return cmd_infer(cfg, out, err);
    case Mode::kSynth:
      return cmd_synth(cfg, out, err);
    case Mode::kValidate:
      return cmd_validate(cfg, out, err);
    case Mode::kAblate:
      return cmd_ablate(cfg, out, err);
  }
  return 2;
}

}  // namespace stpen::cli
