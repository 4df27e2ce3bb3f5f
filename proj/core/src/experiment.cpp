#include "stpen/experiment.hpp"

#include <map>
#include <sstream>

#include "stpen/errors.hpp"
#include "stpen/random.hpp"

namespace stpen {

std::vector<DualRateSample> build_samples(const std::vector<FrameStore>& stores,
                                          const std::vector<ClipAnnotation>& clips, const SamplingConfig& cfg) {
  std::map<std::string, const FrameStore*> by_id;
  for (const auto& s : stores) by_id[s.video_id()] = &s;
  std::vector<DualRateSample> out;
  out.reserve(clips.size());
  for (const auto& clip : clips) {
    auto it = by_id.find(clip.video_id);
    if (it == by_id.end()) throw ArgumentError("no frames for video '" + clip.video_id + "'");
    out.push_back(make_sample(*it->second, clip, cfg));
  }
  return out;
}

SamplingConfig sampling_for(const ModelConfig& cfg) {
  SamplingConfig s;
  s.frame_size = cfg.frame_size;
  return s;
}

TrainingState fresh_state(const ModelConfig& model_cfg, const TrainConfig& train_cfg) {
  Model model(model_cfg, train_cfg.seed);
  SgdOptimizer opt = SgdOptimizer::for_params(model.params());
  return {std::move(model), std::move(opt), 0};
}

TrainingState state_from_checkpoint(const Checkpoint& ckpt) {
  require_compatible_vocab(ckpt.vocab);
  Model model(ckpt.model, ckpt.params);
  for (const auto& [path, v] : model.params()) {
    if (!ckpt.velocity.contains(path) || ckpt.velocity.get(path).shape() != v.shape()) {
      throw ConsistencyError("checkpoint velocity does not match parameter '" + path + "'");
    }
  }
  return {std::move(model), SgdOptimizer(ckpt.velocity), ckpt.epoch};
}

Checkpoint make_checkpoint(const TrainingState& state, const TrainConfig& train_cfg) {
  Checkpoint c;
  c.model = state.model.config();
  c.train = train_cfg;
  c.epoch = state.epoch;
  c.params = state.model.params();
  c.velocity = state.optimizer.velocity();
  std::ostringstream rng;
  rng << Rng(derive_seed(train_cfg.seed, state.epoch));
  c.rng_state = rng.str();
  c.vocab = current_vocab();
  return c;
}

std::vector<EpochStats> train_until(TrainingState& state, const std::vector<DualRateSample>& samples,
                                    const TrainConfig& cfg, std::size_t until_epoch, const EpochCallback& on_epoch) {
  std::vector<EpochStats> log;
  while (state.epoch < until_epoch) {
    log.push_back(train_epoch(state.model, state.optimizer, samples, cfg, state.epoch));
    ++state.epoch;
    if (on_epoch) on_epoch(state, log.back());
  }
  return log;
}

std::vector<PredictionRecord> predict(const Model& model, const std::vector<DualRateSample>& samples) {
  std::vector<PredictionRecord> out;
  for (const auto& s : samples) {
    auto records = model.forward(s);
    out.insert(out.end(), std::make_move_iterator(records.begin()), std::make_move_iterator(records.end()));
  }
  return out;
}

std::vector<AblationRun> run_ablation(const ModelConfig& base, const TrainConfig& train_cfg,
                                      const std::vector<ModuleToggles>& configs,
                                      const std::vector<DualRateSample>& train,
                                      const std::vector<DualRateSample>& test,
                                      const std::function<void(const AblationRun&)>& on_run) {
  std::vector<AblationRun> runs;
  for (const auto& toggles : configs) {
    ModelConfig cfg = base;
    cfg.toggles = toggles;
    TrainingState state = fresh_state(cfg, train_cfg);
    train_until(state, train, train_cfg, train_cfg.epochs);
    runs.push_back({toggles, mean_ap(predict(state.model, test))});
    if (on_run) on_run(runs.back());
  }
  return runs;
}

}  // namespace stpen
