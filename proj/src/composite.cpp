#include "sdg/composite.hpp"

#include <algorithm>
#include <cmath>

#include "sdg/common.hpp"
#include "sdg/imgproc.hpp"
#include "sdg/png_io.hpp"

namespace sdg {

namespace {

struct CoverageBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open
  bool empty = true;
};

CoverageBox coverage_box(const Mask& mask) {
  CoverageBox box;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) {
        if (box.empty) {
          box = {x, y, x + 1, y + 1, false};
        } else {
          box.x0 = std::min(box.x0, x);
          box.y0 = std::min(box.y0, y);
          box.x1 = std::max(box.x1, x + 1);
          box.y1 = std::max(box.y1, y + 1);
        }
      }
  return box;
}

}  // namespace

void AugmentParams::validate() const {
  require(rotation_deg >= -30.0 && rotation_deg <= 30.0, Errc::domain, "rotation out of [-30, 30] deg");
  require(blur_kernel == 1 || blur_kernel == 3 || blur_kernel == 5, Errc::domain,
          "blur kernel must be 1, 3 or 5");
  require(brightness_delta >= 0.0 && brightness_delta <= 50.0, Errc::domain,
          "brightness delta out of [0, 50]");
}

Background exposure_adjust(const Background& bg, double multiplier) {
  require(multiplier > 0.0, Errc::domain, "exposure multiplier must be positive");
  Background out = bg;
  for (std::uint8_t& v : out.rgb.data) v = clamp_u8(v * multiplier);
  return out;
}

Sprite rotate_sprite(const Sprite& sprite, double rotation_deg) {
  const int w = sprite.width(), h = sprite.height();
  const double rad = deg_to_rad(rotation_deg);
  const double c = std::cos(rad), s = std::sin(rad);

  const int out_w = static_cast<int>(std::ceil(std::abs(w * c) + std::abs(h * s))) + 1;
  const int out_h = static_cast<int>(std::ceil(std::abs(w * s) + std::abs(h * c))) + 1;
  const double cx_in = w / 2.0, cy_in = h / 2.0;
  const double cx_out = out_w / 2.0, cy_out = out_h / 2.0;

  Sprite out;
  out.rgba = ImageU8(out_w, out_h, 4);
  out.coverage = Mask(out_w, out_h);
  out.depth.assign(static_cast<std::size_t>(out_w) * out_h, std::numeric_limits<float>::infinity());

  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      // Inverse map of the output pixel center; bilinear in premultiplied alpha.
      const double dx = x + 0.5 - cx_out;
      const double dy = y + 0.5 - cy_out;
      const double fx = c * dx + s * dy + cx_in - 0.5;
      const double fy = -s * dx + c * dy + cy_in - 0.5;
      const int x0 = static_cast<int>(std::floor(fx));
      const int y0 = static_cast<int>(std::floor(fy));
      if (x0 < -1 || y0 < -1 || x0 >= w || y0 >= h) continue;
      const double tx = fx - x0, ty = fy - y0;

      double acc[4] = {0, 0, 0, 0};
      float depth = std::numeric_limits<float>::infinity();
      for (int j = 0; j <= 1; ++j)
        for (int i = 0; i <= 1; ++i) {
          const int sx = x0 + i, sy = y0 + j;
          if (sx < 0 || sy < 0 || sx >= w || sy >= h) continue;  // transparent outside
          const double weight = (i ? tx : 1.0 - tx) * (j ? ty : 1.0 - ty);
          if (weight <= 0.0) continue;
          const std::uint8_t* p = sprite.rgba.px(sx, sy);
          const double a = p[3];
          acc[0] += weight * p[0] * a;
          acc[1] += weight * p[1] * a;
          acc[2] += weight * p[2] * a;
          acc[3] += weight * a;
          if (a > 0) depth = std::min(depth, sprite.depth[static_cast<std::size_t>(sy) * w + sx]);
        }
      if (acc[3] <= 0.0) continue;
      std::uint8_t* dst = out.rgba.px(x, y);
      const std::uint8_t alpha = clamp_u8(acc[3] / 255.0);
      if (alpha == 0) continue;
      dst[0] = clamp_u8(acc[0] / acc[3]);
      dst[1] = clamp_u8(acc[1] / acc[3]);
      dst[2] = clamp_u8(acc[2] / acc[3]);
      dst[3] = alpha;
      out.coverage.set(x, y, 1);
      out.depth[static_cast<std::size_t>(y) * out_w + x] = depth;
    }
  }
  return out;
}

Sprite tight_crop(const Sprite& sprite, int pad) {
  const CoverageBox box = coverage_box(sprite.coverage);
  require(!box.empty, Errc::domain, "cannot crop a sprite with empty coverage");
  const int x0 = std::max(0, box.x0 - pad);
  const int y0 = std::max(0, box.y0 - pad);
  const int x1 = std::min(sprite.width(), box.x1 + pad);
  const int y1 = std::min(sprite.height(), box.y1 + pad);

  Sprite out;
  out.rgba = crop(sprite.rgba, x0, y0, x1, y1);
  out.coverage = Mask(x1 - x0, y1 - y0);
  out.depth.assign(static_cast<std::size_t>(x1 - x0) * (y1 - y0), std::numeric_limits<float>::infinity());
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      out.coverage.set(x - x0, y - y0, sprite.coverage.at(x, y));
      out.depth[static_cast<std::size_t>(y - y0) * (x1 - x0) + (x - x0)] =
          sprite.depth[static_cast<std::size_t>(y) * sprite.width() + x];
    }
  return out;
}

CompositeImage composite(const Sprite& sprite, const Background& bg, int place_x, int place_y) {
  require(bg.rgb.channels == 3, Errc::domain, "background must be RGB");
  const CoverageBox box = coverage_box(sprite.coverage);
  require(!box.empty, Errc::domain, "cannot composite a sprite with empty coverage");
  require(place_x + box.x0 >= 0 && place_y + box.y0 >= 0 && place_x + box.x1 <= bg.rgb.width &&
              place_y + box.y1 <= bg.rgb.height,
          Errc::frame, "placement puts sprite coverage outside the canvas");

  CompositeImage out;
  out.rgb = bg.rgb;
  out.mask = Mask(bg.rgb.width, bg.rgb.height);
  for (int sy = box.y0; sy < box.y1; ++sy) {
    for (int sx = box.x0; sx < box.x1; ++sx) {
      const std::uint8_t* sp = sprite.rgba.px(sx, sy);
      if (sp[3] == 0) continue;
      const double alpha = sp[3] / 255.0;
      std::uint8_t* dp = out.rgb.px(place_x + sx, place_y + sy);
      for (int c = 0; c < 3; ++c) dp[c] = clamp_u8(alpha * sp[c] + (1.0 - alpha) * dp[c]);
      out.mask.set(place_x + sx, place_y + sy, 1);
    }
  }
  return out;
}

ImageU8 finalize(const ImageU8& rgb, int blur_kernel, double brightness_delta) {
  require(blur_kernel == 1 || blur_kernel == 3 || blur_kernel == 5, Errc::domain,
          "blur kernel must be 1, 3 or 5");
  require(brightness_delta >= 0.0 && brightness_delta <= 50.0, Errc::domain,
          "brightness delta out of [0, 50]");
  ImageU8 out = gaussian_blur(rgb, blur_kernel);
  if (brightness_delta > 0.0)
    for (std::uint8_t& v : out.data) v = clamp_u8(v + brightness_delta);
  return out;
}

Background make_procedural_background(int id, std::uint64_t seed, int width, int height) {
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(id), 0xb6c0u}));
  Background bg;
  bg.id = id;
  bg.source = Background::Source::procedural;
  bg.rgb = ImageU8(width, height, 3);

  const double base = rng.uniform(95.0, 150.0);
  const double tint[3] = {rng.uniform(-9.0, 9.0), rng.uniform(-9.0, 9.0), rng.uniform(-9.0, 9.0)};
  const double grad_angle = rng.uniform(0.0, 2.0 * kPi);
  const double grad_amp = rng.uniform(22.0, 30.0);  // peak-to-peak 2x -> luminance std > 10
  const double gx = std::cos(grad_angle), gy = std::sin(grad_angle);

  // Band-limited noise: coarse value grid, bilinearly upsampled.
  const int cell = 32;
  const int nx = width / cell + 2, ny = height / cell + 2;
  std::vector<double> grid(static_cast<std::size_t>(nx) * ny);
  for (double& g : grid) g = rng.uniform(-1.0, 1.0);
  const double noise_amp = rng.uniform(6.0, 12.0);

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = (x - width / 2.0) / width;
      const double v = (y - height / 2.0) / height;
      const double ramp = 2.0 * (u * gx + v * gy);  // in [-~1.4, 1.4]

      const double fx = static_cast<double>(x) / cell, fy = static_cast<double>(y) / cell;
      const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
      const double tx = fx - ix, ty = fy - iy;
      const double n00 = grid[static_cast<std::size_t>(iy) * nx + ix];
      const double n10 = grid[static_cast<std::size_t>(iy) * nx + ix + 1];
      const double n01 = grid[static_cast<std::size_t>(iy + 1) * nx + ix];
      const double n11 = grid[static_cast<std::size_t>(iy + 1) * nx + ix + 1];
      const double noise = (n00 * (1 - tx) + n10 * tx) * (1 - ty) + (n01 * (1 - tx) + n11 * tx) * ty;

      const double lum = base + grad_amp * ramp + noise_amp * noise;
      std::uint8_t* p = bg.rgb.px(x, y);
      p[0] = clamp_u8(lum + tint[0]);
      p[1] = clamp_u8(lum + tint[1]);
      p[2] = clamp_u8(lum + tint[2]);
    }
  }

  // Low-contrast clutter rectangles.
  const int n_rects = 3 + static_cast<int>(rng.uniform_index(4));
  for (int r = 0; r < n_rects; ++r) {
    const int rw = 40 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(width / 3)));
    const int rh = 40 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(height / 3)));
    const int rx = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(std::max(1, width - rw))));
    const int ry = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(std::max(1, height - rh))));
    const double delta = rng.uniform(-16.0, 16.0);
    for (int y = ry; y < std::min(height, ry + rh); ++y)
      for (int x = rx; x < std::min(width, rx + rw); ++x) {
        std::uint8_t* p = bg.rgb.px(x, y);
        for (int ch = 0; ch < 3; ++ch) p[ch] = clamp_u8(p[ch] + delta);
      }
  }
  return bg;
}

Background load_background_file(const std::filesystem::path& path, int id, int width, int height) {
  ImageU8 img = read_png(path);
  if (img.channels == 1) {
    ImageU8 rgb(img.width, img.height, 3);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        const std::uint8_t v = img.px(x, y)[0];
        std::uint8_t* p = rgb.px(x, y);
        p[0] = p[1] = p[2] = v;
      }
    img = std::move(rgb);
  } else if (img.channels == 4) {
    ImageU8 rgb(img.width, img.height, 3);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) std::copy_n(img.px(x, y), 3, rgb.px(x, y));
    img = std::move(rgb);
  }
  Background bg;
  bg.id = id;
  bg.source = Background::Source::file;
  bg.rgb = center_crop_resize(img, width, height);
  return bg;
}

}  // namespace sdg
