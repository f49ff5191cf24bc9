#pragma once

#include <limits>
#include <vector>

#include "sdg/geometry.hpp"
#include "sdg/image.hpp"
#include "sdg/vec.hpp"

namespace sdg {

// Pinhole camera, pixels. World -> camera: p_cam = rotation * p + translation.
// Camera frame: +x right, +y down (image convention), +z forward.
struct Camera {
  int image_width = 640;
  int image_height = 640;
  double focal_length = 1600.0;  // px
  Vec2 principal_point{320.0, 320.0};
  Mat3 rotation;
  Vec3 translation;

  void validate() const;

  // Eye/target in world units (mm); up is the world up used to level the image.
  static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double focal_length_px,
                        int width, int height);

  Vec3 eye() const;  // camera center in world coordinates
};

struct ProjectedPoint {
  Vec2 pixel;
  double depth = 0.0;  // camera-space z, world units
};

// Rectangular area light sampled on a fixed grid. Power in watts; irradiance
// at distance d (converted to meters) is power / (4 pi d^2), split evenly
// across samples.
struct AreaLight {
  Vec3 center;              // mm, world frame
  double extent_w = 200.0;  // mm
  double extent_h = 200.0;  // mm
  double power_watts = 10.0;
  int sample_count = 16;    // 4x4 grid

  void validate() const;
  std::vector<Vec3> sample_points() const;  // deterministic order
};

struct Material {
  Vec3 base_color{0.58, 0.58, 0.60};  // RGB in [0,1]
  double roughness = 0.4;             // (0,1]
  double metallic = 1.0;              // held constant across the dataset

  void validate() const;
};

// Rendered part on a transparent canvas. mask(x,y) != 0 iff alpha > 0.
// Depth is kept for debugging (infinity where uncovered).
struct Sprite {
  ImageU8 rgba;  // 4 channels
  Mask coverage;
  std::vector<float> depth;

  int width() const { return rgba.width; }
  int height() const { return rgba.height; }
};

ProjectedPoint project_vertex(const Camera& cam, const Vec3& p);

// Blinn-Phong with a fixed 0.03 ambient floor, Lambert diffuse (albedo/pi)
// and an energy-normalized specular lobe with exponent n = max(2, 2/r^2 - 2).
// Specular color is base_color mixed by the metallic factor. All direction
// vectors must be unit length; irradiance is the single-sample value.
// Output clamped to [0,1].
Vec3 shade(const Vec3& normal, const Vec3& view_dir, const Vec3& light_dir, const Material& material,
           double irradiance);

// Z-buffered rasterization at 2x2 supersampling with box downsample.
// Back-face culling on; flat (per-face) normals. Deterministic.
// Throws: domain error for an empty mesh or a vertex behind the camera,
// frame error if the part touches the canvas border.
Sprite render_sprite(const TriangleMesh& mesh, const Camera& cam, const AreaLight& light,
                     const Material& material, int canvas_w, int canvas_h);

// Silhouette only, through the identical projection/edge-test path. Used to
// check that coverage has no shading dependence.
Mask rasterize_coverage(const TriangleMesh& mesh, const Camera& cam, int canvas_w, int canvas_h);

// Debug dump (RGBA PNG).
void write_sprite_png(const std::filesystem::path& path, const Sprite& sprite);

}  // namespace sdg
