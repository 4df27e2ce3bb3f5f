// stpen: train, evaluate and ablate the dual-rate behavior recognizer.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "commands.hpp"
#include "run_config.hpp"
#include "stpen/errors.hpp"

namespace {

using stpen::cli::Mode;
using stpen::cli::RunConfig;
using stpen::cli::UsageError;

/// Flag values; unset optionals leave the config layers untouched.
struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<double> lr;
  std::optional<std::string> data, annotations, checkpoint, resume, split_file, spec, out, split, synth;
  bool no_fl_sam = false, no_kmfem = false, no_cl_sam = false, no_mfem = false;
  bool dump_attention = false, allow_undefined = false;
};

void add_common(CLI::App& sub, Flags& f) {
  sub.add_option("--config", f.config, "JSON run configuration");
  sub.add_option("--preset", f.preset, "Model preset")->check(CLI::IsMember({"desk", "paper"}));
  sub.add_option("--seed", f.seed, "Seed for initialization, splits and batch order");
  sub.add_option("--epochs", f.epochs, "Epochs to train (total, including resumed ones)");
  sub.add_option("--batch-size", f.batch_size, "Samples per SGD step");
  sub.add_option("--lr", f.lr, "Base learning rate");
  sub.add_flag("--no-fl-sam", f.no_fl_sam, "Disable FL-SAM");
  sub.add_flag("--no-kmfem", f.no_kmfem, "Disable KMFEM");
  sub.add_flag("--no-cl-sam", f.no_cl_sam, "Disable CL-SAM");
  sub.add_flag("--no-mfem", f.no_mfem, "Disable MFEM (temporal mean + projection instead)");
  sub.add_option("--data", f.data, "Directory of frame stores, one subdirectory per video");
  sub.add_option("--annotations", f.annotations, "Annotations (.csv AVA-style or .json VIA export)");
  sub.add_option("--synth", f.synth, "Built-in synthetic dataset")->check(CLI::IsMember({"smoke", "benchmark"}));
  sub.add_option("--split-file", f.split_file, "Partition manifest (split.tsv)");
  sub.add_option("--split", f.split, "Partition to evaluate")->check(CLI::IsMember({"train", "val", "test"}));
  sub.add_option("--checkpoint", f.checkpoint, "Checkpoint to evaluate");
  sub.add_option("--resume", f.resume, "Checkpoint to continue training from");
  sub.add_option("--spec", f.spec, "Synthetic clip spec (JSON)");
  sub.add_option("--out", f.out, "Output directory");
  sub.add_flag("--dump-attention", f.dump_attention, "Write gate grids per sample");
  sub.add_flag("--allow-undefined", f.allow_undefined, "Accept classes without positives in eval");
}

/// preset -> config file -> flags.
RunConfig build_config(Mode mode, const Flags& f) {
  RunConfig cfg;
  cfg.mode = mode;
  cfg.preset = f.preset.value_or("desk");
  cfg.model = stpen::cli::preset_model(cfg.preset);
  if (f.config) stpen::cli::apply_config_file(cfg, *f.config, f.preset);
  if (f.seed) cfg.seed = *f.seed;
  if (f.epochs) cfg.train.epochs = *f.epochs;
  if (f.batch_size) cfg.train.batch_size = *f.batch_size;
  if (f.lr) cfg.train.base_lr = *f.lr;
  if (f.no_fl_sam) cfg.model.toggles.fl_sam = false;
  if (f.no_kmfem) cfg.model.toggles.kmfem = false;
  if (f.no_cl_sam) cfg.model.toggles.cl_sam = false;
  if (f.no_mfem) cfg.model.toggles.mfem = false;
  if (f.data) cfg.data_dir = *f.data;
  if (f.annotations) cfg.annotations = *f.annotations;
  if (f.checkpoint) cfg.checkpoint = *f.checkpoint;
  if (f.resume) cfg.resume = *f.resume;
  if (f.split_file) cfg.split_file = *f.split_file;
  if (f.spec) cfg.spec = *f.spec;
  if (f.out) cfg.out = *f.out;
  if (f.split) cfg.split = *f.split;
  if (f.synth) cfg.synth = *f.synth;
  if (f.dump_attention) cfg.dump_attention = true;
  if (f.allow_undefined) cfg.allow_undefined = true;
  cfg.train.seed = cfg.seed;
  try {
    stpen::validate_model_config(cfg.model);
    stpen::validate_train_config(cfg.train);
  } catch (const stpen::ArgumentError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial-temporal perception and enhancement network for pig behavior recognition"};
  app.require_subcommand(1);
  Flags flags;
  const std::pair<const char*, Mode> modes[] = {
      {"train", Mode::kTrain}, {"eval", Mode::kEval},         {"infer", Mode::kInfer},
      {"synth", Mode::kSynth}, {"validate", Mode::kValidate}, {"ablate", Mode::kAblate}};
  const char* help[] = {"Train and write per-epoch checkpoints",
                        "Score a split and write the AP report",
                        "Write predictions without ground truth",
                        "Generate a synthetic dataset on disk",
                        "Check annotations, splits and configuration",
                        "Train and evaluate the eleven module configurations"};
  std::vector<std::pair<CLI::App*, Mode>> subs;
  for (std::size_t i = 0; i < std::size(modes); ++i) {
    CLI::App* sub = app.add_subcommand(modes[i].first, help[i]);
    add_common(*sub, flags);
    subs.emplace_back(sub, modes[i].second);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  Mode mode = Mode::kTrain;
  for (const auto& [sub, m] : subs) {
    if (sub->parsed()) mode = m;
  }
  try {
    const RunConfig cfg = build_config(mode, flags);
    return stpen::cli::run_command(cfg, std::cout, std::cerr);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
