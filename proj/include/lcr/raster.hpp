#ifndef LCR_RASTER_HPP_
#define LCR_RASTER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "lcr/error.hpp"

namespace lcr {

inline constexpr std::uint8_t kInk = 255;
inline constexpr std::uint8_t kForegroundThreshold = 128;

// Row-major 8-bit grayscale grid. 0 is background, 255 is full ink.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, std::uint8_t fill = 0)
      : width_(width), height_(height) {
    if (width <= 0 || height <= 0)
      throw ArgumentError("raster extents must be positive, got " +
                          std::to_string(width) + "x" + std::to_string(height));
    pixels_.assign(static_cast<std::size_t>(width) * height, fill);
  }
  Raster(int width, int height, std::vector<std::uint8_t> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width <= 0 || height <= 0 ||
        pixels_.size() != static_cast<std::size_t>(width) * height)
      throw ArgumentError("raster pixel count does not match extents");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }
  std::size_t size() const { return pixels_.size(); }

  std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return pixels_[index(x, y)]; }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  bool foreground(int x, int y) const {
    return at(x, y) >= kForegroundThreshold;
  }

  const std::vector<std::uint8_t>& pixels() const { return pixels_; }
  std::vector<std::uint8_t>& pixels() { return pixels_; }

  std::size_t foreground_count() const {
    std::size_t n = 0;
    for (auto p : pixels_) n += p >= kForegroundThreshold;
    return n;
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

}  // namespace lcr

#endif  // LCR_RASTER_HPP_
