#include "se3track/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace se3track {

void validate_mesh(const TriangleMesh& mesh, bool require_triangles) {
  const int n = static_cast<int>(mesh.vertices.size());
  for (const Vec3& v : mesh.vertices)
    if (!finite(v)) throw std::invalid_argument("mesh: non-finite vertex");
  for (const auto& t : mesh.triangles)
    for (int idx : t)
      if (idx < 0 || idx >= n) throw std::invalid_argument("mesh: triangle index out of range");
  if (require_triangles && mesh.triangles.empty())
    throw std::invalid_argument("mesh: no triangles");
  if (!mesh.colors.empty() && mesh.colors.size() != mesh.vertices.size())
    throw std::invalid_argument("mesh: color count does not match vertex count");
}

std::vector<Vec3> compute_vertex_normals(const TriangleMesh& mesh) {
  validate_mesh(mesh);
  std::vector<Vec3> normals(mesh.vertices.size(), Vec3{});
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    const Vec3 face = cross(b - a, c - a);  // length = 2 * area
    normals[t[0]] += face;
    normals[t[1]] += face;
    normals[t[2]] += face;
  }
  for (Vec3& nrm : normals) {
    const double len = norm(nrm);
    if (len > 0.0) nrm = nrm / len;
  }
  return normals;
}

DiameterResult model_diameter_info(const TriangleMesh& mesh) {
  const auto& v = mesh.vertices;
  const size_t n = v.size();
  if (n < 2) throw std::invalid_argument("model_diameter: need at least 2 vertices");

  if (n <= 5000) {
    double best = 0.0;
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) best = std::max(best, dot(v[i] - v[j], v[i] - v[j]));
    return {std::sqrt(best), true};
  }

  // Farthest-point sweeps: walk to the farthest vertex three times and keep
  // the longest leg seen. Lower bound of the true diameter.
  auto farthest_from = [&](size_t i) {
    size_t best_j = 0;
    double best = -1.0;
    for (size_t j = 0; j < n; ++j) {
      const double d = dot(v[i] - v[j], v[i] - v[j]);
      if (d > best) {
        best = d;
        best_j = j;
      }
    }
    return std::pair<size_t, double>{best_j, std::sqrt(best)};
  };
  size_t cur = 0;
  double best = 0.0;
  for (int sweep = 0; sweep < 3; ++sweep) {
    auto [j, d] = farthest_from(cur);
    best = std::max(best, d);
    cur = j;
  }
  return {best, false};
}

double model_diameter(const TriangleMesh& mesh) { return model_diameter_info(mesh).value; }

std::vector<SurfaceSample> sample_surface_points(const TriangleMesh& mesh, int count,
                                                 std::uint64_t seed) {
  validate_mesh(mesh);
  const std::vector<Vec3> normals = compute_vertex_normals(mesh);

  std::vector<double> cum_area(mesh.triangles.size());
  double total = 0.0;
  for (size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    total += 0.5 * norm(cross(mesh.vertices[t[1]] - mesh.vertices[t[0]],
                              mesh.vertices[t[2]] - mesh.vertices[t[0]]));
    cum_area[i] = total;
  }
  if (total <= 0.0) throw std::invalid_argument("sample_surface_points: zero surface area");

  Rng rng(seed);
  std::vector<SurfaceSample> samples;
  samples.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double pick = rng.uniform() * total;
    const size_t ti = std::lower_bound(cum_area.begin(), cum_area.end(), pick) - cum_area.begin();
    const auto& t = mesh.triangles[std::min(ti, mesh.triangles.size() - 1)];

    // Uniform barycentric coordinates via the sqrt trick.
    const double su = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const double b0 = 1.0 - su, b1 = su * (1.0 - r2), b2 = su * r2;

    SurfaceSample s;
    s.point = b0 * mesh.vertices[t[0]] + b1 * mesh.vertices[t[1]] + b2 * mesh.vertices[t[2]];
    Vec3 nrm = b0 * normals[t[0]] + b1 * normals[t[1]] + b2 * normals[t[2]];
    if (norm(nrm) < 1e-12) {
      nrm = cross(mesh.vertices[t[1]] - mesh.vertices[t[0]],
                  mesh.vertices[t[2]] - mesh.vertices[t[0]]);
    }
    s.normal = normalized(nrm);
    samples.push_back(s);
  }
  return samples;
}

TriangleMesh make_box(double sx, double sy, double sz) {
  TriangleMesh m;
  const double hx = sx / 2, hy = sy / 2, hz = sz / 2;
  // Six faces with distinct colors and duplicated vertices so each face is
  // flat-shaded with its own color (gives the network a texture signal).
  const std::array<Vec3, 6> face_colors = {Vec3{0.9, 0.2, 0.2}, Vec3{0.2, 0.9, 0.2},
                                           Vec3{0.2, 0.3, 0.9}, Vec3{0.9, 0.9, 0.2},
                                           Vec3{0.9, 0.3, 0.9}, Vec3{0.2, 0.9, 0.9}};
  struct Face {
    Vec3 corners[4];
  };
  const std::array<Face, 6> faces = {{
      {{{-hx, -hy, hz}, {hx, -hy, hz}, {hx, hy, hz}, {-hx, hy, hz}}},      // +z
      {{{hx, -hy, -hz}, {-hx, -hy, -hz}, {-hx, hy, -hz}, {hx, hy, -hz}}},  // -z
      {{{hx, -hy, hz}, {hx, -hy, -hz}, {hx, hy, -hz}, {hx, hy, hz}}},      // +x
      {{{-hx, -hy, -hz}, {-hx, -hy, hz}, {-hx, hy, hz}, {-hx, hy, -hz}}},  // -x
      {{{-hx, hy, hz}, {hx, hy, hz}, {hx, hy, -hz}, {-hx, hy, -hz}}},      // +y
      {{{-hx, -hy, -hz}, {hx, -hy, -hz}, {hx, -hy, hz}, {-hx, -hy, hz}}},  // -y
  }};
  for (int f = 0; f < 6; ++f) {
    const int base = static_cast<int>(m.vertices.size());
    for (int c = 0; c < 4; ++c) {
      m.vertices.push_back(faces[f].corners[c]);
      m.colors.push_back(face_colors[f]);
    }
    m.triangles.push_back({base, base + 1, base + 2});
    m.triangles.push_back({base, base + 2, base + 3});
  }
  return m;
}

TriangleMesh make_icosphere(double radius, int subdivisions) {
  // Icosahedron base.
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                             {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                             {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& v : verts) v = normalized(v);
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      verts.push_back(normalized(0.5 * (verts[a] + verts[b])));
      const int idx = static_cast<int>(verts.size()) - 1;
      midpoint[key] = idx;
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  TriangleMesh m;
  m.vertices.reserve(verts.size());
  m.colors.reserve(verts.size());
  for (const Vec3& v : verts) {
    m.vertices.push_back(radius * v);
    // Smooth position-derived coloring.
    m.colors.push_back({0.5 + 0.5 * v.x, 0.5 + 0.5 * v.y, 0.5 + 0.5 * v.z});
  }
  m.triangles = faces;
  return m;
}

}  // namespace se3track
