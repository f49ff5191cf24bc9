#pragma once

#include <cstdint>
#include <filesystem>

#include "sdg/doe.hpp"
#include "sdg/image.hpp"
#include "sdg/render.hpp"
#include "sdg/rng.hpp"

namespace sdg {

struct Background {
  enum class Source { procedural, file };
  int id = 0;
  ImageU8 rgb;  // 3 channels, canvas-sized
  Source source = Source::procedural;
};

// Per-image augmentation draw. Ranges are fixed by the pipeline contract:
// rotation in [-30, 30] deg, blur kernel in {1,3,5}, brightness in [0, 50].
struct AugmentParams {
  double rotation_deg = 0.0;
  int blur_kernel = 1;
  double brightness_delta = 0.0;
  int place_x = 0;  // top-left of the (rotated) sprite in the canvas
  int place_y = 0;

  void validate() const;
};

struct CompositeImage {
  ImageU8 rgb;  // 3 channels
  Mask mask;    // transformed sprite support; bounding boxes come from this
  CompositePlan plan;
  AugmentParams params;
};

// clamp(round(v * multiplier)) per pixel. multiplier must be positive.
Background exposure_adjust(const Background& bg, double multiplier);

// Rotates rgba about the sprite center with bilinear resampling in
// premultiplied alpha; the canvas grows so nothing is clipped. The mask is
// alpha > 0 after resampling. Positive angles rotate clockwise on screen.
Sprite rotate_sprite(const Sprite& sprite, double rotation_deg);

// Crops a sprite to its coverage bounding box plus pad pixels.
Sprite tight_crop(const Sprite& sprite, int pad = 2);

// out = alpha * sprite + (1 - alpha) * background, rounded half away from
// zero. placement is the sprite's top-left pixel in the canvas; every covered
// sprite pixel must land inside it. Provenance fields are left to the caller.
CompositeImage composite(const Sprite& sprite, const Background& bg, int place_x, int place_y);

// Gaussian blur (kernel 1/3/5) then additive brightness, both over the whole
// image. Does not touch the coverage mask.
ImageU8 finalize(const ImageU8& rgb, int blur_kernel, double brightness_delta);

// Deterministic textured background: luminance gradient, band-limited noise
// and a few low-contrast clutter rectangles. Distinct appearance per id.
Background make_procedural_background(int id, std::uint64_t seed, int width = 640, int height = 640);

// User-supplied background image, center-cropped and resized to the canvas.
Background load_background_file(const std::filesystem::path& path, int id, int width = 640, int height = 640);

}  // namespace sdg
