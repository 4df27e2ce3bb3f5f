#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stpen/dual_rate.hpp"
#include "stpen/model_config.hpp"
#include "stpen/param_set.hpp"
#include "stpen/perception.hpp"

namespace stpen {

/// x * sigmoid(x), elementwise.
Var cl_sam(const Var& roi_low);

/// LSTM over the per-frame spatial max of `roi_high`, final hidden state. When
/// MFEM is disabled: linear projection of the temporal mean of that sequence.
Var mfem(const Var& roi_high, const ParamBinding& params, const ModelConfig& cfg);

/// sigmoid(head.w [channel_mean(gated_low); temporal_vec] + head.b).
Var classify(const Var& gated_low, const Var& temporal_vec, const ParamBinding& params);

struct PredictionRecord {
  std::string video_id;
  int timestamp_s = 0;
  int actor_id = 0;
  std::vector<double> scores;
  /// Empty at inference.
  std::vector<int> targets;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

struct ActorScores {
  std::size_t actor_index = 0;
  int actor_id = 0;
  Var scores;  // [num_classes]
};

struct ForwardResult {
  std::vector<ActorScores> actors;
  GateMaps gates;
};

class Model {
 public:
  Model(ModelConfig cfg, std::uint64_t seed);
  Model(ModelConfig cfg, ParamSet params);

  const ModelConfig& config() const { return cfg_; }
  const ParamSet& params() const { return params_; }
  ParamSet& params() { return params_; }

  /// Differentiable pass over one sample using `binding` (built from params()).
  /// Stage failures are rethrown with the sample's location.
  ForwardResult forward_graph(const ParamBinding& binding, const DualRateSample& sample,
                              bool record_gates = false) const;
  /// Same with caller-provided clip tensors (e.g. leaves for input gradients).
  ForwardResult forward_graph(const ParamBinding& binding, const DualRateSample& sample, const Var& low,
                              const Var& high, bool record_gates = false) const;

  /// One record per non-hidden actor, targets filled from the sample.
  std::vector<PredictionRecord> forward(const DualRateSample& sample, GateMaps* gates = nullptr) const;

 private:
  ModelConfig cfg_;
  ParamSet params_;
};

/// `video_id,timestamp,actor_id,s0..s12[,t0..t12]` with six-decimal scores.
std::string serialize_records(const std::vector<PredictionRecord>& records);
std::vector<PredictionRecord> parse_records(const std::string& text);

/// Raw gate dump: u32 rank, u32 dims, then little-endian float32 values.
void write_gate_grid(const std::filesystem::path& path, const Tensor& gate);
Tensor read_gate_grid(const std::filesystem::path& path);

}  // namespace stpen
