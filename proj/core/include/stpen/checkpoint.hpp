#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stpen/model_config.hpp"
#include "stpen/param_set.hpp"
#include "stpen/training.hpp"

namespace stpen {

inline constexpr std::uint16_t kCheckpointVersion = 1;

/// Resumable training state. `epoch` counts completed epochs.
struct Checkpoint {
  ModelConfig model;
  TrainConfig train;
  std::size_t epoch = 0;
  ParamSet params;
  ParamSet velocity;
  /// Text state of the generator that orders the next epoch.
  std::string rng_state;
  std::vector<std::string> vocab;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

// Layout: "STPEN", u16 version, u64 payload size, u64 FNV-1a digest of the
// payload, payload. The payload holds a JSON header (configs, epoch, rng,
// vocabulary) and two tables (parameters, velocities) of
// (path, shape, little-endian float32 values). All integers little-endian.
std::string encode_checkpoint(const Checkpoint& ckpt);
/// CheckpointError kinds distinguish bad magic, version, truncation, digest and format problems.
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Library vocabulary as stored in checkpoints.
std::vector<std::string> current_vocab();
/// Throws CompatibilityError when `vocab` differs from the library vocabulary.
void require_compatible_vocab(const std::vector<std::string>& vocab);

}  // namespace stpen
