#pragma once

// Triangle meshes (object CAD models) and the geometric queries the tracker
// and data generator need from them.

#include <array>
#include <vector>

#include "se3track/geometry.hpp"
#include "se3track/rng.hpp"

namespace se3track {

struct TriangleMesh {
  std::vector<Vec3> vertices;                 // object frame, meters
  std::vector<std::array<int, 3>> triangles;  // indices into vertices
  std::vector<Vec3> colors;                   // optional per-vertex RGB in [0,1]

  bool has_colors() const { return colors.size() == vertices.size(); }
};

// Throws std::invalid_argument when indices are out of range, vertices are
// non-finite, or (require_triangles) the mesh has no faces.
void validate_mesh(const TriangleMesh& mesh, bool require_triangles = true);

// Area-weighted average of incident face normals, normalized. Degenerate
// triangles contribute nothing; isolated vertices get a zero normal.
std::vector<Vec3> compute_vertex_normals(const TriangleMesh& mesh);

struct DiameterResult {
  double value = 0.0;
  bool exact = false;  // false when the farthest-point sweep heuristic ran
};

// Maximum pairwise vertex distance. Exact O(n^2) up to 5000 vertices, then a
// 3-sweep farthest-point heuristic. Throws for fewer than 2 vertices.
DiameterResult model_diameter_info(const TriangleMesh& mesh);
double model_diameter(const TriangleMesh& mesh);

struct SurfaceSample {
  Vec3 point;
  Vec3 normal;  // interpolated vertex normal, unit length
};

// Uniform-area surface samples with interpolated normals; deterministic for a
// given seed.
std::vector<SurfaceSample> sample_surface_points(const TriangleMesh& mesh, int count,
                                                 std::uint64_t seed);

// Procedural meshes used by the synthetic pipeline and tests.
TriangleMesh make_box(double sx, double sy, double sz);  // per-face colors
TriangleMesh make_icosphere(double radius, int subdivisions);

}  // namespace se3track
