#pragma once

#include "sdg/image.hpp"

namespace sdg {

// Bilinear resize, any channel count. Samples pixel centers; edge-clamped.
ImageU8 resize_bilinear(const ImageU8& src, int out_w, int out_h);

// Copies the half-open rect [x0,x1) x [y0,y1); must lie inside src.
ImageU8 crop(const ImageU8& src, int x0, int y0, int x1, int y1);

// Center square crop followed by bilinear resize (for user backgrounds).
ImageU8 center_crop_resize(const ImageU8& src, int out_w, int out_h);

// Separable Gaussian blur. kernel_size must be odd and >= 1; size 1 is the
// identity. sigma = 0.3*((k-1)/2 - 1) + 0.8, taps normalized to sum 1,
// replicate borders. Intermediate math in double, one final rounding.
ImageU8 gaussian_blur(const ImageU8& src, int kernel_size);

// The 1D taps gaussian_blur uses, exposed so tests can check them.
std::vector<double> gaussian_taps(int kernel_size);

}  // namespace sdg
