#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "stpen/checkpoint.hpp"
#include "stpen/dual_rate.hpp"
#include "stpen/evaluation.hpp"
#include "stpen/model.hpp"
#include "stpen/training.hpp"

namespace stpen {

/// One sample per annotated keyframe, matched to its store by video id.
/// Throws ArgumentError when a clip's video has no store.
std::vector<DualRateSample> build_samples(const std::vector<FrameStore>& stores,
                                          const std::vector<ClipAnnotation>& clips, const SamplingConfig& cfg);

SamplingConfig sampling_for(const ModelConfig& cfg);

/// Model and optimizer state between epochs.
struct TrainingState {
  Model model;
  SgdOptimizer optimizer;
  std::size_t epoch = 0;  // completed epochs
};

TrainingState fresh_state(const ModelConfig& model_cfg, const TrainConfig& train_cfg);
TrainingState state_from_checkpoint(const Checkpoint& ckpt);
Checkpoint make_checkpoint(const TrainingState& state, const TrainConfig& train_cfg);

using EpochCallback = std::function<void(const TrainingState&, const EpochStats&)>;

/// Runs epochs state.epoch .. until_epoch - 1.
std::vector<EpochStats> train_until(TrainingState& state, const std::vector<DualRateSample>& samples,
                                    const TrainConfig& cfg, std::size_t until_epoch,
                                    const EpochCallback& on_epoch = {});

std::vector<PredictionRecord> predict(const Model& model, const std::vector<DualRateSample>& samples);

/// Trains one model per toggle vector from the same seed and evaluates it.
std::vector<AblationRun> run_ablation(const ModelConfig& base, const TrainConfig& train_cfg,
                                      const std::vector<ModuleToggles>& configs,
                                      const std::vector<DualRateSample>& train,
                                      const std::vector<DualRateSample>& test,
                                      const std::function<void(const AblationRun&)>& on_run = {});

}  // namespace stpen
