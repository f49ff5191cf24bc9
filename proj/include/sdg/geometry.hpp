#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sdg/vec.hpp"

namespace sdg {

// Indexed triangle mesh in the part-local frame, millimeters.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> material_ids;  // one per triangle

  void validate() const;  // index bounds, degenerate-triangle check (area > 1e-9 mm^2)
};

// The part label taxonomy: a part passes when its tab is bent far enough.
enum class Label : int { pass = 0, fail = 1 };

inline const char* to_string(Label l) { return l == Label::pass ? "pass" : "fail"; }
Label label_from_string(const std::string& s);

// Bracket dimensions (mm). Base plate lying in the XY plane, a vertical wall
// along its back edge, and a bendable tab on top of the wall. Defaults sized
// to read clearly at the default camera distance.
struct BracketDims {
  double plate_w = 60.0, plate_d = 40.0, plate_t = 3.0;
  double wall_w = 40.0, wall_h = 25.0, wall_t = 3.0;
  double tab_w = 20.0, tab_len = 12.0, tab_t = 2.0;
  double tab_skirt = 1.5;  // extension below the hinge so no gap opens when bent
};

struct BendSpec {
  double bend_angle_deg = 0.0;    // 0 = tab parallel to the wall; positive bends toward the plate front
  Vec3 hinge_origin;              // a point on the hinge line
  Vec3 hinge_dir;                 // unit direction; must be parallel to the base-plate plane
  std::vector<int> tab_vertex_set;

  void validate(std::size_t vertex_count) const;
};

// Pass/fail assignment from the bend angle. On-grid angles are matched
// exactly (1e-9 deg); anything else falls back to the decision threshold.
struct AngleClassSpec {
  std::vector<double> pass_angles_deg{15.0, 20.0, 25.0, 30.0};
  std::vector<double> fail_angles_deg{-5.0, 0.0, 5.0, 10.0};
  double decision_threshold_deg = 12.5;

  void validate() const;
};

// Reference bracket with the tab unbent (0 deg). Vertex order is stable:
// plate vertices first, then wall, then tab.
TriangleMesh build_bracket_reference(const BracketDims& dims = {});

// BendSpec for the built-in bracket: hinge along the top of the wall,
// tab_vertex_set covering every tab vertex.
BendSpec make_bend_spec(double bend_angle_deg, const BracketDims& dims = {});

// Bracket with the tab rotated rigidly about the hinge. Vertex and triangle
// counts are identical for every angle; only tab vertices move.
TriangleMesh build_part_mesh(const BendSpec& bend, const BracketDims& dims = {});

Label classify_angle(double angle_deg, const AngleClassSpec& spec);

// Outward face normal of the tab's front, for bend-angle checks.
Vec3 tab_front_normal(const TriangleMesh& mesh, const BracketDims& dims = {});

// Debug export, ASCII STL.
void write_stl(const std::filesystem::path& path, const TriangleMesh& mesh, const std::string& name = "part");

}  // namespace sdg
