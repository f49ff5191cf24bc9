#include "sdg/render.hpp"

#include <algorithm>
#include <cmath>

#include "sdg/common.hpp"
#include "sdg/png_io.hpp"

namespace sdg {

namespace {

constexpr double kNearPlaneMm = 1.0;
constexpr double kAmbient = 0.03;
constexpr int kSupersample = 2;

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

double edge(const Vec2& a, const Vec2& b, double px, double py) {
  return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

struct SubpixelBuffer {
  int width = 0, height = 0;
  std::vector<double> depth;
  std::vector<int> triangle;  // -1 where uncovered

  SubpixelBuffer(int w, int h)
      : width(w), height(h), depth(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity()),
        triangle(static_cast<std::size_t>(w) * h, -1) {}
};

// Projects, culls back faces and fills depth + triangle id at subpixel
// resolution. Shared by the shaded and coverage-only paths.
SubpixelBuffer rasterize_subpixels(const TriangleMesh& mesh, const Camera& cam, int canvas_w, int canvas_h) {
  require(!mesh.vertices.empty() && !mesh.triangles.empty(), Errc::domain, "cannot render an empty mesh");
  cam.validate();
  require(cam.image_width == canvas_w && cam.image_height == canvas_h, Errc::domain,
          "canvas size must match camera resolution");

  const int sw = canvas_w * kSupersample;
  const int sh = canvas_h * kSupersample;
  SubpixelBuffer buf(sw, sh);

  // Project all vertices into the supersampled grid (2x focal length and
  // principal point give subpixel coordinates directly).
  std::vector<Vec2> screen(mesh.vertices.size());
  std::vector<double> inv_z(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3 pc = cam.rotation * mesh.vertices[i] + cam.translation;
    require(pc.z > kNearPlaneMm, Errc::domain, "mesh vertex behind the camera near plane");
    screen[i] = {kSupersample * (cam.principal_point.x + cam.focal_length * pc.x / pc.z),
                 kSupersample * (cam.principal_point.y + cam.focal_length * pc.y / pc.z)};
    inv_z[i] = 1.0 / pc.z;
  }

  const Vec3 eye = cam.eye();
  for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
    const auto& t = mesh.triangles[ti];
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(t[0])];
    const Vec3& b = mesh.vertices[static_cast<std::size_t>(t[1])];
    const Vec3& c = mesh.vertices[static_cast<std::size_t>(t[2])];

    // Back-face cull in world space: outward normal vs view ray.
    const Vec3 n = cross(b - a, c - a);
    if (dot(n, a - eye) >= 0.0) continue;

    const Vec2& sa = screen[static_cast<std::size_t>(t[0])];
    const Vec2& sb = screen[static_cast<std::size_t>(t[1])];
    const Vec2& sc = screen[static_cast<std::size_t>(t[2])];
    double area = edge(sa, sb, sc.x, sc.y);
    if (area == 0.0) continue;
    const double orient = area > 0.0 ? 1.0 : -1.0;
    area *= orient;

    const int x0 = std::max(0, static_cast<int>(std::floor(std::min({sa.x, sb.x, sc.x}))));
    const int x1 = std::min(sw - 1, static_cast<int>(std::ceil(std::max({sa.x, sb.x, sc.x}))));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min({sa.y, sb.y, sc.y}))));
    const int y1 = std::min(sh - 1, static_cast<int>(std::ceil(std::max({sa.y, sb.y, sc.y}))));

    const double w0 = inv_z[static_cast<std::size_t>(t[0])];
    const double w1 = inv_z[static_cast<std::size_t>(t[1])];
    const double w2 = inv_z[static_cast<std::size_t>(t[2])];

    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double px = x + 0.5, py = y + 0.5;
        const double e0 = orient * edge(sb, sc, px, py);
        if (e0 < 0.0) continue;
        const double e1 = orient * edge(sc, sa, px, py);
        if (e1 < 0.0) continue;
        const double e2 = orient * edge(sa, sb, px, py);
        if (e2 < 0.0) continue;

        // Screen-linear interpolation of 1/z is perspective correct.
        const double inv_depth = (e0 * w0 + e1 * w1 + e2 * w2) / area;
        const double z = 1.0 / inv_depth;
        const std::size_t idx = static_cast<std::size_t>(y) * sw + x;
        if (z < buf.depth[idx]) {
          buf.depth[idx] = z;
          buf.triangle[idx] = static_cast<int>(ti);
        }
      }
    }
  }
  return buf;
}

Vec3 direct_light_term(const Vec3& normal, const Vec3& view_dir, const Vec3& light_dir,
                       const Material& m, double irradiance) {
  const double ndl = std::max(0.0, dot(normal, light_dir));
  if (ndl <= 0.0 || irradiance <= 0.0) return {};
  const Vec3 diffuse = m.base_color * (ndl * irradiance / kPi);
  const Vec3 h = normalized(view_dir + light_dir);
  const double ndh = std::max(0.0, dot(normal, h));
  const double exponent = std::max(2.0, 2.0 / (m.roughness * m.roughness) - 2.0);
  // Energy-normalized lobe: narrower highlights are brighter, so peak
  // intensity orders with roughness.
  const double lobe = (exponent + 8.0) / (8.0 * kPi) * std::pow(ndh, exponent);
  const Vec3 spec_color{1.0 + (m.base_color.x - 1.0) * m.metallic, 1.0 + (m.base_color.y - 1.0) * m.metallic,
                        1.0 + (m.base_color.z - 1.0) * m.metallic};
  return diffuse + spec_color * (lobe * ndl * irradiance);
}

}  // namespace

void Camera::validate() const {
  require(image_width > 0 && image_height > 0, Errc::domain, "camera resolution must be positive");
  require(focal_length > 0.0, Errc::domain, "focal length must be positive");
  require(principal_point.x > 0.0 && principal_point.x < image_width && principal_point.y > 0.0 &&
              principal_point.y < image_height,
          Errc::domain, "principal point must lie inside the image");
  // Rows orthonormal within 1e-9.
  const Vec3 r0{rotation.m[0][0], rotation.m[0][1], rotation.m[0][2]};
  const Vec3 r1{rotation.m[1][0], rotation.m[1][1], rotation.m[1][2]};
  const Vec3 r2{rotation.m[2][0], rotation.m[2][1], rotation.m[2][2]};
  require(std::abs(norm(r0) - 1.0) < 1e-9 && std::abs(norm(r1) - 1.0) < 1e-9 && std::abs(norm(r2) - 1.0) < 1e-9,
          Errc::domain, "camera rotation rows must be unit length");
  require(std::abs(dot(r0, r1)) < 1e-9 && std::abs(dot(r0, r2)) < 1e-9 && std::abs(dot(r1, r2)) < 1e-9,
          Errc::domain, "camera rotation rows must be orthogonal");
}

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double focal_length_px,
                       int width, int height) {
  Camera cam;
  cam.image_width = width;
  cam.image_height = height;
  cam.focal_length = focal_length_px;
  cam.principal_point = {width / 2.0, height / 2.0};
  // +x right, +y down, +z forward.
  const Vec3 zaxis = normalized(target - eye);
  const Vec3 xaxis = normalized(cross(zaxis, up));
  const Vec3 yaxis = cross(zaxis, xaxis);
  cam.rotation = Mat3::from_rows(xaxis, yaxis, zaxis);
  cam.translation = (cam.rotation * eye) * -1.0;
  cam.validate();
  return cam;
}

Vec3 Camera::eye() const {
  // p_cam = R p + t = 0 at the camera center, so eye = -R^T t.
  const Vec3 c = translation * -1.0;
  return {rotation.m[0][0] * c.x + rotation.m[1][0] * c.y + rotation.m[2][0] * c.z,
          rotation.m[0][1] * c.x + rotation.m[1][1] * c.y + rotation.m[2][1] * c.z,
          rotation.m[0][2] * c.x + rotation.m[1][2] * c.y + rotation.m[2][2] * c.z};
}

void AreaLight::validate() const {
  require(power_watts >= 0.0, Errc::domain, "light power must be non-negative");
  require(sample_count >= 1, Errc::domain, "light sample count must be >= 1");
  require(extent_w > 0.0 && extent_h > 0.0, Errc::domain, "light extent must be positive");
}

std::vector<Vec3> AreaLight::sample_points() const {
  validate();
  int grid = static_cast<int>(std::lround(std::sqrt(static_cast<double>(sample_count))));
  while (grid * grid < sample_count) ++grid;

  // Light plane faces the origin (where the part sits).
  const Vec3 normal = normalized(center * -1.0);
  Vec3 up{0.0, 0.0, 1.0};
  if (std::abs(dot(normal, up)) > 0.99) up = {0.0, 1.0, 0.0};
  const Vec3 e1 = normalized(cross(normal, up));
  const Vec3 e2 = cross(normal, e1);

  std::vector<Vec3> points;
  points.reserve(static_cast<std::size_t>(sample_count));
  for (int j = 0; j < grid && static_cast<int>(points.size()) < sample_count; ++j)
    for (int i = 0; i < grid && static_cast<int>(points.size()) < sample_count; ++i)
      points.push_back(center + e1 * (((i + 0.5) / grid - 0.5) * extent_w) +
                       e2 * (((j + 0.5) / grid - 0.5) * extent_h));
  return points;
}

void Material::validate() const {
  for (double c : {base_color.x, base_color.y, base_color.z})
    require(c >= 0.0 && c <= 1.0, Errc::domain, "base color out of [0,1]");
  require(roughness > 0.0 && roughness <= 1.0, Errc::domain, "roughness out of (0,1]");
  require(metallic >= 0.0 && metallic <= 1.0, Errc::domain, "metallic out of [0,1]");
}

ProjectedPoint project_vertex(const Camera& cam, const Vec3& p) {
  const Vec3 pc = cam.rotation * p + cam.translation;
  require(pc.z > kNearPlaneMm, Errc::domain, "point behind the camera near plane");
  return {{cam.principal_point.x + cam.focal_length * pc.x / pc.z,
           cam.principal_point.y + cam.focal_length * pc.y / pc.z},
          pc.z};
}

Vec3 shade(const Vec3& normal, const Vec3& view_dir, const Vec3& light_dir, const Material& material,
           double irradiance) {
  const Vec3 ambient = material.base_color * kAmbient;
  const Vec3 lit = ambient + direct_light_term(normal, view_dir, light_dir, material, irradiance);
  return {clamp01(lit.x), clamp01(lit.y), clamp01(lit.z)};
}

Sprite render_sprite(const TriangleMesh& mesh, const Camera& cam, const AreaLight& light,
                     const Material& material, int canvas_w, int canvas_h) {
  material.validate();
  const SubpixelBuffer buf = rasterize_subpixels(mesh, cam, canvas_w, canvas_h);

  const std::vector<Vec3> light_samples = light.sample_points();
  const double per_sample_power = light.power_watts / static_cast<double>(light_samples.size());
  const Vec3 eye = cam.eye();
  const double inv_f2 = 1.0 / (kSupersample * cam.focal_length);
  const double cx2 = kSupersample * cam.principal_point.x;
  const double cy2 = kSupersample * cam.principal_point.y;

  // Camera rows for back-projection of covered subpixels.
  const Vec3 r0{cam.rotation.m[0][0], cam.rotation.m[0][1], cam.rotation.m[0][2]};
  const Vec3 r1{cam.rotation.m[1][0], cam.rotation.m[1][1], cam.rotation.m[1][2]};
  const Vec3 r2{cam.rotation.m[2][0], cam.rotation.m[2][1], cam.rotation.m[2][2]};

  std::vector<Vec3> face_normal(mesh.triangles.size());
  for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
    const auto& t = mesh.triangles[ti];
    face_normal[ti] = normalized(cross(mesh.vertices[static_cast<std::size_t>(t[1])] - mesh.vertices[static_cast<std::size_t>(t[0])],
                                       mesh.vertices[static_cast<std::size_t>(t[2])] - mesh.vertices[static_cast<std::size_t>(t[0])]));
  }

  std::vector<Vec3> shaded(static_cast<std::size_t>(buf.width) * buf.height);
  for (int y = 0; y < buf.height; ++y) {
    for (int x = 0; x < buf.width; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * buf.width + x;
      const int tri = buf.triangle[idx];
      if (tri < 0) continue;
      const double z = buf.depth[idx];
      const Vec3 pc{(x + 0.5 - cx2) * inv_f2 * z, (y + 0.5 - cy2) * inv_f2 * z, z};
      const Vec3 rel = pc - cam.translation;  // R^T (pc - t)
      const Vec3 world{r0.x * rel.x + r1.x * rel.y + r2.x * rel.z,
                       r0.y * rel.x + r1.y * rel.y + r2.y * rel.z,
                       r0.z * rel.x + r1.z * rel.y + r2.z * rel.z};
      const Vec3 view_dir = normalized(eye - world);
      Vec3 color = material.base_color * kAmbient;
      for (const Vec3& s : light_samples) {
        const Vec3 to_light = s - world;
        const double dist_m = norm(to_light) / 1000.0;
        const double irradiance = per_sample_power / (4.0 * kPi * dist_m * dist_m);
        color += direct_light_term(face_normal[static_cast<std::size_t>(tri)], view_dir,
                                   to_light / (dist_m * 1000.0), material, irradiance);
      }
      shaded[idx] = {clamp01(color.x), clamp01(color.y), clamp01(color.z)};
    }
  }

  // Box downsample; RGB is the mean over covered subpixels, alpha the
  // covered fraction.
  Sprite sprite;
  sprite.rgba = ImageU8(canvas_w, canvas_h, 4);
  sprite.coverage = Mask(canvas_w, canvas_h);
  sprite.depth.assign(static_cast<std::size_t>(canvas_w) * canvas_h, std::numeric_limits<float>::infinity());
  for (int y = 0; y < canvas_h; ++y) {
    for (int x = 0; x < canvas_w; ++x) {
      int covered = 0;
      Vec3 sum{};
      double min_depth = std::numeric_limits<double>::infinity();
      for (int sy = 0; sy < kSupersample; ++sy) {
        for (int sx = 0; sx < kSupersample; ++sx) {
          const std::size_t idx =
              static_cast<std::size_t>(y * kSupersample + sy) * buf.width + (x * kSupersample + sx);
          if (buf.triangle[idx] < 0) continue;
          ++covered;
          sum += shaded[idx];
          min_depth = std::min(min_depth, buf.depth[idx]);
        }
      }
      std::uint8_t* out = sprite.rgba.px(x, y);
      if (covered == 0) {
        out[0] = out[1] = out[2] = out[3] = 0;
        continue;
      }
      out[0] = clamp_u8(255.0 * sum.x / covered);
      out[1] = clamp_u8(255.0 * sum.y / covered);
      out[2] = clamp_u8(255.0 * sum.z / covered);
      out[3] = clamp_u8(255.0 * covered / (kSupersample * kSupersample));
      sprite.coverage.set(x, y, 1);
      sprite.depth[static_cast<std::size_t>(y) * canvas_w + x] = static_cast<float>(min_depth);
    }
  }

  // The part must be fully framed; a silhouette touching the border means the
  // caller has to reposition camera or part.
  for (int x = 0; x < canvas_w; ++x)
    require(!sprite.coverage.at(x, 0) && !sprite.coverage.at(x, canvas_h - 1), Errc::frame,
            "part clipped by the top/bottom image border");
  for (int y = 0; y < canvas_h; ++y)
    require(!sprite.coverage.at(0, y) && !sprite.coverage.at(canvas_w - 1, y), Errc::frame,
            "part clipped by the left/right image border");
  require(sprite.coverage.count() > 0, Errc::domain, "rendered sprite has empty coverage");
  return sprite;
}

Mask rasterize_coverage(const TriangleMesh& mesh, const Camera& cam, int canvas_w, int canvas_h) {
  const SubpixelBuffer buf = rasterize_subpixels(mesh, cam, canvas_w, canvas_h);
  Mask mask(canvas_w, canvas_h);
  for (int y = 0; y < canvas_h; ++y)
    for (int x = 0; x < canvas_w; ++x) {
      bool covered = false;
      for (int sy = 0; sy < kSupersample && !covered; ++sy)
        for (int sx = 0; sx < kSupersample && !covered; ++sx)
          covered = buf.triangle[static_cast<std::size_t>(y * kSupersample + sy) * buf.width +
                                 (x * kSupersample + sx)] >= 0;
      mask.set(x, y, covered ? 1 : 0);
    }
  return mask;
}

void write_sprite_png(const std::filesystem::path& path, const Sprite& sprite) {
  write_png(path, sprite.rgba);
}

}  // namespace sdg
