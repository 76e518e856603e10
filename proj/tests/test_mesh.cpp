#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "se3track/mesh.hpp"

using namespace se3track;
using namespace se3track::testing;

TEST_CASE("vertex normals: single CCW triangle in the xy-plane") {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.triangles = {{0, 1, 2}};
  for (const Vec3& n : compute_vertex_normals(m)) CHECK(norm(n - Vec3{0, 0, 1}) <= 1e-15);
}

TEST_CASE("vertex normals: shared-corner cube") {
  // Cube with shared corner vertices and a symmetric center-fan per face:
  // each corner normal comes out along (+-1,+-1,+-1)/sqrt(3) exactly.
  TriangleMesh m;
  for (int i = 0; i < 8; ++i)
    m.vertices.push_back({i & 1 ? 0.5 : -0.5, i & 2 ? 0.5 : -0.5, i & 4 ? 0.5 : -0.5});
  auto quad = [&](int a, int b, int c, int d) {
    const int center = static_cast<int>(m.vertices.size());
    m.vertices.push_back(0.25 * (m.vertices[a] + m.vertices[b] + m.vertices[c] + m.vertices[d]));
    m.triangles.push_back({a, b, center});
    m.triangles.push_back({b, c, center});
    m.triangles.push_back({c, d, center});
    m.triangles.push_back({d, a, center});
  };
  quad(0, 2, 3, 1);  // -z (faces wound so normals point outward)
  quad(4, 5, 7, 6);  // +z
  quad(0, 1, 5, 4);  // -y
  quad(2, 6, 7, 3);  // +y
  quad(0, 4, 6, 2);  // -x
  quad(1, 3, 7, 5);  // +x
  const auto normals = compute_vertex_normals(m);
  for (int i = 0; i < 8; ++i) {
    const Vec3 expect = normalized(m.vertices[i]);
    CHECK(norm(normals[i] - expect) <= 1e-12);
  }
}

TEST_CASE("vertex normals: icosphere is radial within 2 degrees") {
  const TriangleMesh m = make_icosphere(0.1, 2);
  const auto normals = compute_vertex_normals(m);
  for (size_t i = 0; i < m.vertices.size(); ++i) {
    const double cosang = dot(normals[i], normalized(m.vertices[i]));
    CHECK(std::acos(std::clamp(cosang, -1.0, 1.0)) <= 2.0 * M_PI / 180.0);
  }
}

TEST_CASE("model diameter") {
  TriangleMesh cube = make_box(1, 1, 1);
  const auto info = model_diameter_info(cube);
  CHECK(info.exact);
  CHECK(info.value == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));

  TriangleMesh two;
  two.vertices = {{0, 0, 0}, {0.2, 0, 0}};
  CHECK(model_diameter_info(two).value == doctest::Approx(0.2).epsilon(1e-15));

  TriangleMesh one;
  one.vertices = {{0, 0, 0}};
  CHECK_THROWS_AS(model_diameter(one), std::invalid_argument);
}

TEST_CASE("model diameter matches brute force on a random cloud") {
  Rng rng(202);
  TriangleMesh m;
  for (int i = 0; i < 100; ++i) m.vertices.push_back(random_vec3(rng, 0.3));
  double brute = 0.0;
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) brute = std::max(brute, norm(m.vertices[i] - m.vertices[j]));
  CHECK(model_diameter(m) == doctest::Approx(brute).epsilon(1e-15));
}

TEST_CASE("model diameter heuristic path on a dense sphere") {
  const TriangleMesh m = make_icosphere(0.05, 5);  // 10242 vertices
  REQUIRE(m.vertices.size() > 5000);
  const auto info = model_diameter_info(m);
  CHECK_FALSE(info.exact);
  CHECK(info.value == doctest::Approx(0.1).epsilon(0.01));
}

TEST_CASE("surface sampling lands on the surface with unit normals") {
  const TriangleMesh m = make_box(0.1, 0.2, 0.05);
  const auto samples = sample_surface_points(m, 500, 42);
  REQUIRE(samples.size() == 500);
  for (const auto& s : samples) {
    double dist = 1e9;
    for (const auto& t : m.triangles)
      dist = std::min(dist, point_triangle_distance(s.point, m.vertices[t[0]],
                                                    m.vertices[t[1]], m.vertices[t[2]]));
    CHECK(dist <= 1e-12);
    CHECK(std::abs(norm(s.normal) - 1.0) <= 1e-12);
  }
  // Deterministic for a fixed seed.
  const auto again = sample_surface_points(m, 500, 42);
  for (size_t i = 0; i < samples.size(); ++i) {
    CHECK(norm(samples[i].point - again[i].point) == 0.0);
  }
}

TEST_CASE("mesh validation") {
  TriangleMesh bad;
  bad.vertices = {{0, 0, 0}, {1, 0, 0}};
  bad.triangles = {{0, 1, 2}};
  CHECK_THROWS_AS(validate_mesh(bad), std::invalid_argument);

  TriangleMesh no_faces;
  no_faces.vertices = {{0, 0, 0}};
  CHECK_THROWS_AS(validate_mesh(no_faces, true), std::invalid_argument);
  CHECK_NOTHROW(validate_mesh(no_faces, false));
}
