#include "sdg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sdg/common.hpp"

namespace sdg {

namespace {

constexpr double kAngleMatchTolDeg = 1e-9;
constexpr double kDegenerateAreaMm2 = 1e-9;

void append_box(TriangleMesh& mesh, const Vec3& lo, const Vec3& hi, int material) {
  const int base = static_cast<int>(mesh.vertices.size());
  mesh.vertices.push_back({lo.x, lo.y, lo.z});  // 0
  mesh.vertices.push_back({hi.x, lo.y, lo.z});  // 1
  mesh.vertices.push_back({hi.x, hi.y, lo.z});  // 2
  mesh.vertices.push_back({lo.x, hi.y, lo.z});  // 3
  mesh.vertices.push_back({lo.x, lo.y, hi.z});  // 4
  mesh.vertices.push_back({hi.x, lo.y, hi.z});  // 5
  mesh.vertices.push_back({hi.x, hi.y, hi.z});  // 6
  mesh.vertices.push_back({lo.x, hi.y, hi.z});  // 7

  // Quads wound CCW seen from outside.
  static constexpr int kFaces[6][4] = {
      {0, 3, 2, 1},  // -z
      {4, 5, 6, 7},  // +z
      {0, 1, 5, 4},  // -y
      {2, 3, 7, 6},  // +y
      {0, 4, 7, 3},  // -x
      {1, 2, 6, 5},  // +x
  };
  for (const auto& f : kFaces) {
    mesh.triangles.push_back({base + f[0], base + f[1], base + f[2]});
    mesh.triangles.push_back({base + f[0], base + f[2], base + f[3]});
    mesh.material_ids.push_back(material);
    mesh.material_ids.push_back(material);
  }
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * norm(cross(b - a, c - a));
}

}  // namespace

void TriangleMesh::validate() const {
  require(triangles.size() == material_ids.size(), Errc::domain, "material id count mismatch");
  const int n = static_cast<int>(vertices.size());
  for (const auto& t : triangles) {
    for (int idx : t)
      require(idx >= 0 && idx < n, Errc::domain, "triangle index out of range: " + std::to_string(idx));
    require(triangle_area(vertices[static_cast<std::size_t>(t[0])], vertices[static_cast<std::size_t>(t[1])],
                          vertices[static_cast<std::size_t>(t[2])]) > kDegenerateAreaMm2,
            Errc::domain, "degenerate triangle in mesh");
  }
}

Label label_from_string(const std::string& s) {
  if (s == "pass") return Label::pass;
  if (s == "fail") return Label::fail;
  fail(Errc::domain, "unknown label: " + s);
}

void BendSpec::validate(std::size_t vertex_count) const {
  require(bend_angle_deg >= -90.0 && bend_angle_deg <= 90.0, Errc::domain,
          "bend angle out of [-90, 90]: " + std::to_string(bend_angle_deg));
  require(std::abs(norm(hinge_dir) - 1.0) < 1e-9, Errc::domain, "hinge direction must be unit length");
  // The base plate lies in the XY plane; a valid hinge runs parallel to it.
  require(std::abs(hinge_dir.z) < 1e-9, Errc::domain, "hinge axis must be parallel to the base-plate plane");
  require(!tab_vertex_set.empty(), Errc::domain, "tab vertex set is empty");
  for (int idx : tab_vertex_set)
    require(idx >= 0 && static_cast<std::size_t>(idx) < vertex_count, Errc::domain,
            "tab vertex index out of range");
}

void AngleClassSpec::validate() const {
  require(!pass_angles_deg.empty() && !fail_angles_deg.empty(), Errc::domain, "angle sets must be nonempty");
  const double min_pass = *std::min_element(pass_angles_deg.begin(), pass_angles_deg.end());
  const double max_fail = *std::max_element(fail_angles_deg.begin(), fail_angles_deg.end());
  for (double p : pass_angles_deg)
    for (double f : fail_angles_deg)
      require(std::abs(p - f) > kAngleMatchTolDeg, Errc::domain,
              "pass and fail angle sets overlap at " + std::to_string(p));
  require(min_pass > max_fail, Errc::domain, "min(pass angles) must exceed max(fail angles)");
  require(decision_threshold_deg > max_fail && decision_threshold_deg < min_pass, Errc::domain,
          "decision threshold must lie strictly between the fail and pass angle sets");
}

TriangleMesh build_bracket_reference(const BracketDims& d) {
  TriangleMesh mesh;
  const double half_w = d.plate_w / 2.0;
  const double half_d = d.plate_d / 2.0;

  // Plate: centered on the origin, top surface at z = plate_t.
  append_box(mesh, {-half_w, -half_d, 0.0}, {half_w, half_d, d.plate_t}, 0);

  // Wall: along the back edge, slightly embedded in the plate to avoid a seam.
  const double wall_y1 = half_d;
  const double wall_y0 = half_d - d.wall_t;
  const double wall_z1 = d.plate_t + d.wall_h;
  append_box(mesh, {-d.wall_w / 2.0, wall_y0, d.plate_t - 0.2}, {d.wall_w / 2.0, wall_y1, wall_z1}, 1);

  // Tab: continues the wall upward at 0 deg, centered on the wall mid-plane,
  // with a short skirt below the hinge so rotation never opens a gap.
  const double wall_mid_y = (wall_y0 + wall_y1) / 2.0;
  append_box(mesh, {-d.tab_w / 2.0, wall_mid_y - d.tab_t / 2.0, wall_z1 - d.tab_skirt},
             {d.tab_w / 2.0, wall_mid_y + d.tab_t / 2.0, wall_z1 + d.tab_len}, 2);

  mesh.validate();
  return mesh;
}

BendSpec make_bend_spec(double bend_angle_deg, const BracketDims& d) {
  BendSpec bend;
  bend.bend_angle_deg = bend_angle_deg;
  const double wall_mid_y = d.plate_d / 2.0 - d.wall_t / 2.0;
  bend.hinge_origin = {0.0, wall_mid_y, d.plate_t + d.wall_h};
  bend.hinge_dir = {1.0, 0.0, 0.0};
  bend.tab_vertex_set.resize(8);
  for (int i = 0; i < 8; ++i) bend.tab_vertex_set[static_cast<std::size_t>(i)] = 16 + i;  // tab box vertices
  return bend;
}

TriangleMesh build_part_mesh(const BendSpec& bend, const BracketDims& dims) {
  TriangleMesh mesh = build_bracket_reference(dims);
  bend.validate(mesh.vertices.size());
  const double angle_rad = deg_to_rad(bend.bend_angle_deg);
  for (int idx : bend.tab_vertex_set)
    mesh.vertices[static_cast<std::size_t>(idx)] =
        rotate_about_axis(mesh.vertices[static_cast<std::size_t>(idx)], bend.hinge_origin, bend.hinge_dir, angle_rad);
  mesh.validate();
  return mesh;
}

Label classify_angle(double angle_deg, const AngleClassSpec& spec) {
  for (double p : spec.pass_angles_deg)
    if (std::abs(angle_deg - p) <= kAngleMatchTolDeg) return Label::pass;
  for (double f : spec.fail_angles_deg)
    if (std::abs(angle_deg - f) <= kAngleMatchTolDeg) return Label::fail;
  return angle_deg >= spec.decision_threshold_deg ? Label::pass : Label::fail;
}

Vec3 tab_front_normal(const TriangleMesh& mesh, const BracketDims&) {
  // Front (-y at 0 deg) face of the tab box: local corners 0, 1, 5.
  const Vec3& a = mesh.vertices[16];
  const Vec3& b = mesh.vertices[17];
  const Vec3& c = mesh.vertices[21];
  return normalized(cross(b - a, c - a));
}

void write_stl(const std::filesystem::path& path, const TriangleMesh& mesh, const std::string& name) {
  std::ofstream out(path);
  require(out.good(), Errc::io, "cannot open for writing: " + path.string());
  out << "solid " << name << "\n";
  out.precision(9);
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(t[0])];
    const Vec3& b = mesh.vertices[static_cast<std::size_t>(t[1])];
    const Vec3& c = mesh.vertices[static_cast<std::size_t>(t[2])];
    const Vec3 n = normalized(cross(b - a, c - a));
    out << "  facet normal " << n.x << " " << n.y << " " << n.z << "\n"
        << "    outer loop\n"
        << "      vertex " << a.x << " " << a.y << " " << a.z << "\n"
        << "      vertex " << b.x << " " << b.y << " " << b.z << "\n"
        << "      vertex " << c.x << " " << c.y << " " << c.z << "\n"
        << "    endloop\n"
        << "  endfacet\n";
  }
  out << "endsolid " << name << "\n";
  require(out.good(), Errc::io, "write failed: " + path.string());
}

}  // namespace sdg
