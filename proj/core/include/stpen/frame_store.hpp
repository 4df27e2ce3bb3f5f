#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stpen/tensor.hpp"

namespace stpen {

/// Frames of one video as [3 x H x W] tensors in [0,1]. Either held in memory
/// or backed by a directory of `frame_NNNNNN.ppm` files plus `manifest.json`.
class FrameStore {
 public:
  FrameStore(std::string video_id, double fps, std::size_t width, std::size_t height);

  /// Opens a directory-backed store; frames are read on access.
  static FrameStore open(const std::filesystem::path& dir);
  /// Writes manifest and frames (8-bit binary PPM) to `dir`.
  void save(const std::filesystem::path& dir) const;

  void push_back(Tensor frame);

  const std::string& video_id() const { return video_id_; }
  double fps() const { return fps_; }
  std::size_t count() const { return count_; }
  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }

  /// Throws ArgumentError for an index outside [0, count).
  Tensor frame(std::size_t index) const;

 private:
  std::string video_id_;
  double fps_;
  std::size_t width_;
  std::size_t height_;
  std::size_t count_ = 0;
  std::vector<Tensor> frames_;
  std::optional<std::filesystem::path> dir_;
};

/// Binary PPM (P6, maxval 255) <-> [3 x H x W] tensor in [0,1].
Tensor read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Tensor& image);

/// Rounds each value to the nearest k/255 in [0,1].
void quantize_8bit(Tensor& image);

}  // namespace stpen
