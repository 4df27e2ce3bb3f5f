#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "stpen/dual_rate.hpp"
#include "stpen/model.hpp"
#include "stpen/param_set.hpp"

namespace stpen {

struct TrainConfig {
  std::size_t batch_size = 32;
  double base_lr = 0.001;
  double weight_decay = 0.02;
  double momentum = 0.9;
  double period = 60.0;  // epochs per cosine cycle
  double min_lr = 0.0;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Throws ArgumentError unless sizes are positive, 0 <= min_lr <= base_lr, momentum < 1 and period >= 1.
void validate_train_config(const TrainConfig& cfg);

/// min + (base - min) (1 + cos(pi e / period)) / 2 with e = epoch mod period.
double cosine_lr(double epoch, const TrainConfig& cfg);

/// SGD with momentum and decoupled weight decay:
///   p <- p (1 - lr wd);  v <- m v + g;  p <- p - lr v.
/// Parameters and velocities are kept at float precision so a float32
/// checkpoint captures the state exactly.
class SgdOptimizer {
 public:
  /// Zero velocity for every parameter.
  static SgdOptimizer for_params(const ParamSet& params) { return SgdOptimizer(params.zeros_like()); }
  explicit SgdOptimizer(ParamSet velocity) : velocity_(std::move(velocity)) {}

  /// Throws ConsistencyError naming the first parameter without a gradient.
  void step(ParamSet& params, const ParamSet& grads, double lr, const TrainConfig& cfg);

  const ParamSet& velocity() const { return velocity_; }

 private:
  ParamSet velocity_;
};

/// Sample indices grouped into batches; the order depends only on (seed, epoch).
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t sample_count, std::size_t batch_size,
                                                    std::uint64_t seed, std::size_t epoch);

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;  // over actor records
  double lr_start = 0.0;
  double lr_end = 0.0;
  std::size_t samples = 0;
  std::size_t records = 0;
  std::size_t batches = 0;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

/// Mean multi-label BCE over the non-hidden actors of `samples`, with its graph.
struct BatchLoss {
  Var loss;
  std::size_t records = 0;
};
BatchLoss batch_loss(const Model& model, const ParamBinding& binding, const std::vector<const DualRateSample*>& batch);

/// One pass over `samples`. Batch b of B uses lr = cosine_lr(epoch + b / B).
/// Throws NumericError with the batch position when a loss is not finite.
EpochStats train_epoch(Model& model, SgdOptimizer& optimizer, const std::vector<DualRateSample>& samples,
                       const TrainConfig& cfg, std::size_t epoch);

/// CSV log line for one epoch; header() gives the column names.
std::string epoch_log_header();
std::string epoch_log_line(const EpochStats& stats);

}  // namespace stpen
