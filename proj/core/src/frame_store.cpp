#include "stpen/frame_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "stpen/annotation.hpp"
#include "stpen/errors.hpp"

namespace stpen {
namespace {

std::string frame_filename(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06zu.ppm", index);
  return buf;
}

}  // namespace

FrameStore::FrameStore(std::string video_id, double fps, std::size_t width, std::size_t height)
    : video_id_(std::move(video_id)), fps_(fps), width_(width), height_(height) {
  if (width == 0 || height == 0) throw ArgumentError("frame store needs positive frame size");
  if (!(fps > 0.0)) throw ArgumentError("frame store needs positive fps");
}

FrameStore FrameStore::open(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(read_text_file(manifest_path));
    FrameStore store(m.at("video_id").get<std::string>(), m.at("fps").get<double>(),
                     m.at("width").get<std::size_t>(), m.at("height").get<std::size_t>());
    store.count_ = m.at("count").get<std::size_t>();
    store.dir_ = dir;
    return store;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(manifest_path.string() + ": " + e.what());
  }
}

void FrameStore::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < count_; ++i) write_ppm(dir / frame_filename(i), frame(i));
  nlohmann::ordered_json m = {
      {"video_id", video_id_}, {"fps", fps_}, {"count", count_}, {"width", width_}, {"height", height_}};
  write_text_file(dir / "manifest.json", m.dump(2) + "\n");
}

void FrameStore::push_back(Tensor frame) {
  if (dir_) throw ArgumentError("cannot append to a directory-backed frame store");
  if (frame.shape() != Shape{3, height_, width_}) {
    throw ShapeError("frame " + shape_to_string(frame.shape()) + " does not match store " +
                     shape_to_string({3, height_, width_}));
  }
  frames_.push_back(std::move(frame));
  ++count_;
}

Tensor FrameStore::frame(std::size_t index) const {
  if (index >= count_) {
    throw ArgumentError("frame " + std::to_string(index) + " outside [0, " + std::to_string(count_) + ") of " +
                        video_id_);
  }
  if (!dir_) return frames_[index];
  Tensor img = read_ppm(*dir_ / frame_filename(index));
  if (img.shape() != Shape{3, height_, width_}) {
    throw ShapeError("frame " + std::to_string(index) + " of " + video_id_ + " has shape " +
                     shape_to_string(img.shape()));
  }
  return img;
}

Tensor read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::string magic;
  std::size_t width = 0, height = 0, maxval = 0;
  in >> magic >> width >> height >> maxval;
  if (magic != "P6" || width == 0 || height == 0 || maxval != 255) {
    throw ParseError("'" + path.string() + "' is not an 8-bit binary PPM");
  }
  in.get();
  std::vector<unsigned char> bytes(3 * width * height);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) throw ParseError("'" + path.string() + "' truncated");
  Tensor img({3, height, width});
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x)
      for (std::size_t c = 0; c < 3; ++c) img[(c * height + y) * width + x] = bytes[(y * width + x) * 3 + c] / 255.0;
  return img;
}

void write_ppm(const std::filesystem::path& path, const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3) throw ShapeError("write_ppm expects [3 x H x W]");
  const std::size_t height = image.dim(1), width = image.dim(2);
  std::vector<unsigned char> bytes(3 * width * height);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = std::clamp(image[(c * height + y) * width + x], 0.0, 1.0);
        bytes[(y * width + x) * 3 + c] = static_cast<unsigned char>(std::lround(v * 255.0));
      }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "P6\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void quantize_8bit(Tensor& image) {
  for (auto& v : image.storage()) v = static_cast<double>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)) / 255.0;
}

}  // namespace stpen
