#pragma once

#include <cstdint>
#include <cstring>
#include <vector>

#include "sdg/common.hpp"

namespace sdg {

// Interleaved 8-bit image. channels is 1 (gray/mask), 3 (RGB) or 4 (RGBA).
struct ImageU8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  ImageU8() = default;
  ImageU8(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

  std::uint8_t* px(int x, int y) { return data.data() + (static_cast<std::size_t>(y) * width + x) * channels; }
  const std::uint8_t* px(int x, int y) const {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
  }

  bool empty() const { return data.empty(); }
  std::size_t size_bytes() const { return data.size(); }

  bool same_shape(const ImageU8& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

inline std::uint64_t content_hash(const ImageU8& img) {
  return fnv1a64(img.data.data(), img.data.size(),
                 fnv1a64(&img.width, sizeof img.width,
                         fnv1a64(&img.height, sizeof img.height,
                                 fnv1a64(&img.channels, sizeof img.channels))));
}

// Per-pixel boolean coverage, stored as 0/1 bytes.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Mask() = default;
  Mask(int w, int h, std::uint8_t fill = 0) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  void set(int x, int y, std::uint8_t v) { data[static_cast<std::size_t>(y) * width + x] = v; }

  std::size_t count() const {
    std::size_t n = 0;
    for (std::uint8_t v : data) n += v != 0;
    return n;
  }
};

inline std::uint8_t clamp_u8(double v) {
  if (v <= 0.0) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(v + 0.5);  // non-negative, so +0.5 rounds half away from zero
}

inline std::uint8_t clamp_u8_int(int v) {
  if (v <= 0) return 0;
  if (v >= 255) return 255;
  return static_cast<std::uint8_t>(v);
}

}  // namespace sdg
