#include "sdg/imgproc.hpp"

#include <algorithm>
#include <cmath>

namespace sdg {

ImageU8 resize_bilinear(const ImageU8& src, int out_w, int out_h) {
  require(out_w > 0 && out_h > 0, Errc::domain, "resize target must be positive");
  require(!src.empty(), Errc::domain, "cannot resize an empty image");
  ImageU8 out(out_w, out_h, src.channels);
  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, src.height - 1);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double ty = std::clamp(fy - y0, 0.0, 1.0);
    for (int x = 0; x < out_w; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const int x0 = std::clamp(static_cast<int>(std::floor(fx)), 0, src.width - 1);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double tx = std::clamp(fx - x0, 0.0, 1.0);
      const std::uint8_t* p00 = src.px(x0, y0);
      const std::uint8_t* p10 = src.px(x1, y0);
      const std::uint8_t* p01 = src.px(x0, y1);
      const std::uint8_t* p11 = src.px(x1, y1);
      std::uint8_t* dst = out.px(x, y);
      for (int c = 0; c < src.channels; ++c) {
        const double top = p00[c] + (p10[c] - p00[c]) * tx;
        const double bot = p01[c] + (p11[c] - p01[c]) * tx;
        dst[c] = clamp_u8(top + (bot - top) * ty);
      }
    }
  }
  return out;
}

ImageU8 crop(const ImageU8& src, int x0, int y0, int x1, int y1) {
  require(x0 >= 0 && y0 >= 0 && x1 <= src.width && y1 <= src.height && x0 < x1 && y0 < y1, Errc::domain,
          "crop rect out of bounds");
  ImageU8 out(x1 - x0, y1 - y0, src.channels);
  for (int y = y0; y < y1; ++y)
    std::copy_n(src.px(x0, y), static_cast<std::size_t>(x1 - x0) * src.channels, out.px(0, y - y0));
  return out;
}

ImageU8 center_crop_resize(const ImageU8& src, int out_w, int out_h) {
  const int side = std::min(src.width, src.height);
  const int x0 = (src.width - side) / 2;
  const int y0 = (src.height - side) / 2;
  return resize_bilinear(crop(src, x0, y0, x0 + side, y0 + side), out_w, out_h);
}

std::vector<double> gaussian_taps(int kernel_size) {
  require(kernel_size >= 1 && kernel_size % 2 == 1, Errc::domain,
          "blur kernel size must be odd and >= 1, got " + std::to_string(kernel_size));
  if (kernel_size == 1) return {1.0};
  const double sigma = 0.3 * ((kernel_size - 1) / 2.0 - 1.0) + 0.8;
  const int radius = kernel_size / 2;
  std::vector<double> taps(static_cast<std::size_t>(kernel_size));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[static_cast<std::size_t>(i + radius)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += taps[static_cast<std::size_t>(i + radius)];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

ImageU8 gaussian_blur(const ImageU8& src, int kernel_size) {
  const std::vector<double> taps = gaussian_taps(kernel_size);
  if (taps.size() == 1) return src;
  const int radius = kernel_size / 2;
  const int w = src.width, h = src.height, ch = src.channels;

  std::vector<double> tmp(static_cast<std::size_t>(w) * h * ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int xx = std::clamp(x + k, 0, w - 1);
          acc += taps[static_cast<std::size_t>(k + radius)] * src.px(xx, y)[c];
        }
        tmp[(static_cast<std::size_t>(y) * w + x) * ch + c] = acc;
      }

  ImageU8 out(w, h, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int yy = std::clamp(y + k, 0, h - 1);
          acc += taps[static_cast<std::size_t>(k + radius)] * tmp[(static_cast<std::size_t>(yy) * w + x) * ch + c];
        }
        out.px(x, y)[c] = clamp_u8(acc);
      }
  return out;
}

}  // namespace sdg
