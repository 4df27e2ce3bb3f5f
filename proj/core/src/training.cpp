#include "stpen/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "stpen/errors.hpp"
#include "stpen/ops.hpp"
#include "stpen/random.hpp"

namespace stpen {

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.batch_size == 0) throw ArgumentError("batch_size must be positive");
  if (!(cfg.base_lr >= 0.0)) throw ArgumentError("base_lr must be non-negative");
  if (!(cfg.min_lr >= 0.0) || cfg.min_lr > cfg.base_lr) throw ArgumentError("need 0 <= min_lr <= base_lr");
  if (!(cfg.weight_decay >= 0.0)) throw ArgumentError("weight_decay must be non-negative");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) throw ArgumentError("momentum must be in [0, 1)");
  if (!(cfg.period >= 1.0)) throw ArgumentError("cosine period must be >= 1 epoch");
  if (cfg.epochs == 0) throw ArgumentError("epochs must be positive");
}

double cosine_lr(double epoch, const TrainConfig& cfg) {
  const double e = std::fmod(std::max(0.0, epoch), cfg.period);
  return cfg.min_lr + (cfg.base_lr - cfg.min_lr) * (1.0 + std::cos(std::numbers::pi * e / cfg.period)) / 2.0;
}

void SgdOptimizer::step(ParamSet& params, const ParamSet& grads, double lr, const TrainConfig& cfg) {
  for (const auto& [path, _] : params) {
    if (!grads.contains(path)) throw ConsistencyError("missing gradient for parameter '" + path + "'");
    if (!velocity_.contains(path)) throw ConsistencyError("optimizer has no velocity for parameter '" + path + "'");
  }
  const double decay = 1.0 - lr * cfg.weight_decay;
  for (auto& [path, p] : params) {
    const Tensor& g = grads.get(path);
    Tensor& v = velocity_.get(path);
    if (g.shape() != p.shape()) throw ConsistencyError("gradient shape mismatch for '" + path + "'");
    auto pd = p.storage().data();
    auto vd = v.storage().data();
    auto gd = g.storage().data();
    for (std::size_t i = 0; i < p.numel(); ++i) {
      vd[i] = static_cast<float>(cfg.momentum * vd[i] + gd[i]);
      pd[i] = static_cast<float>(pd[i] * decay - lr * vd[i]);
    }
  }
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t sample_count, std::size_t batch_size,
                                                    std::uint64_t seed, std::size_t epoch) {
  if (batch_size == 0) throw ArgumentError("batch_size must be positive");
  std::vector<std::size_t> order(sample_count);
  for (std::size_t i = 0; i < sample_count; ++i) order[i] = i;
  Rng rng(derive_seed(seed, epoch));
  shuffle(order, rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < sample_count; i += batch_size) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(sample_count, i + batch_size)));
  }
  return batches;
}

BatchLoss batch_loss(const Model& model, const ParamBinding& binding, const std::vector<const DualRateSample*>& batch) {
  std::vector<Var> losses;
  for (const DualRateSample* s : batch) {
    const ForwardResult r = model.forward_graph(binding, *s);
    for (const auto& a : r.actors) losses.push_back(ops::bce_multilabel_loss(a.scores, s->targets[a.actor_index]));
  }
  BatchLoss out;
  out.records = losses.size();
  if (!losses.empty()) out.loss = ops::scale(ops::add_n(losses), 1.0 / static_cast<double>(losses.size()));
  return out;
}

EpochStats train_epoch(Model& model, SgdOptimizer& optimizer, const std::vector<DualRateSample>& samples,
                       const TrainConfig& cfg, std::size_t epoch) {
  validate_train_config(cfg);
  const auto batches = epoch_batches(samples.size(), cfg.batch_size, cfg.seed, epoch);
  EpochStats stats;
  stats.epoch = epoch;
  stats.samples = samples.size();
  stats.batches = batches.size();
  double loss_sum = 0.0;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const double lr = cosine_lr(static_cast<double>(epoch) + static_cast<double>(b) / static_cast<double>(batches.size()), cfg);
    if (b == 0) stats.lr_start = lr;
    stats.lr_end = lr;
    std::vector<const DualRateSample*> batch;
    for (std::size_t i : batches[b]) batch.push_back(&samples[i]);
    const ParamBinding binding(model.params());
    const BatchLoss bl = batch_loss(model, binding, batch);
    if (bl.records == 0) continue;
    const double loss = bl.loss.value()[0];
    if (!std::isfinite(loss)) {
      throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(b) + " of " +
                         std::to_string(batches.size()));
    }
    backward(bl.loss);
    optimizer.step(model.params(), binding.gradients(), lr, cfg);
    loss_sum += loss * static_cast<double>(bl.records);
    stats.records += bl.records;
  }
  stats.mean_loss = stats.records ? loss_sum / static_cast<double>(stats.records) : 0.0;
  return stats;
}

std::string epoch_log_header() { return "epoch,mean_loss,lr_start,lr_end,samples,records,batches\n"; }

std::string epoch_log_line(const EpochStats& s) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%zu,%zu,%zu\n", s.epoch, s.mean_loss, s.lr_start, s.lr_end,
                s.samples, s.records, s.batches);
  return buf;
}

}  // namespace stpen
