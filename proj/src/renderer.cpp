#include "se3track/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace se3track {

namespace {

constexpr double kNearPlane = 1e-6;

struct ScreenVertex {
  double u, v;      // continuous pixel coordinates
  double inv_z;     // 1/z for perspective-correct interpolation
  Vec3 color_by_z;  // color * (1/z)
};

double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

// Top-left style tie rule. Antisymmetric in edge direction, so a pixel
// center lying exactly on the shared edge of two triangles is covered by
// exactly one of them.
bool edge_covers(double e, double ax, double ay, double bx, double by) {
  if (e > 0.0) return true;
  if (e < 0.0) return false;
  const double dx = bx - ax, dy = by - ay;
  return (dy == 0.0 && dx < 0.0) || dy < 0.0;
}

}  // namespace

RgbdImage render_rgbd(const TriangleMesh& mesh, const Pose& T, const CameraIntrinsics& k) {
  validate_mesh(mesh);
  RgbdImage img(k.width, k.height);

  std::vector<Vec3> cam_pts(mesh.vertices.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i)
    cam_pts[i] = transform_point(T, mesh.vertices[i]);

  const Vec3 default_color{0.7, 0.7, 0.7};

  for (const auto& tri : mesh.triangles) {
    const Vec3& p0 = cam_pts[tri[0]];
    const Vec3& p1 = cam_pts[tri[1]];
    const Vec3& p2 = cam_pts[tri[2]];
    // Triangles touching or crossing the near plane are skipped rather than
    // clipped; objects sit well in front of the camera in this pipeline.
    if (p0.z <= kNearPlane || p1.z <= kNearPlane || p2.z <= kNearPlane) continue;

    ScreenVertex sv[3];
    const Vec3* pts[3] = {&p0, &p1, &p2};
    for (int i = 0; i < 3; ++i) {
      sv[i].u = k.fx * pts[i]->x / pts[i]->z + k.cx;
      sv[i].v = k.fy * pts[i]->y / pts[i]->z + k.cy;
      sv[i].inv_z = 1.0 / pts[i]->z;
      const Vec3 c = mesh.has_colors() ? mesh.colors[tri[i]] : default_color;
      sv[i].color_by_z = sv[i].inv_z * c;
    }

    double area = edge(sv[0].u, sv[0].v, sv[1].u, sv[1].v, sv[2].u, sv[2].v);
    if (area == 0.0) continue;
    if (area < 0.0) {  // orient so edge functions are positive inside
      std::swap(sv[1], sv[2]);
      area = -area;
    }

    // Geometric face normal in the camera frame, for headlight shading.
    Vec3 face_n = cross(p1 - p0, p2 - p0);
    const double face_n_len = norm(face_n);
    if (face_n_len == 0.0) continue;
    face_n = face_n / face_n_len;

    const double min_u = std::min({sv[0].u, sv[1].u, sv[2].u});
    const double max_u = std::max({sv[0].u, sv[1].u, sv[2].u});
    const double min_v = std::min({sv[0].v, sv[1].v, sv[2].v});
    const double max_v = std::max({sv[0].v, sv[1].v, sv[2].v});
    const int c0 = std::max(0, static_cast<int>(std::ceil(min_u)));
    const int c1 = std::min(k.width - 1, static_cast<int>(std::floor(max_u)));
    const int r0 = std::max(0, static_cast<int>(std::ceil(min_v)));
    const int r1 = std::min(k.height - 1, static_cast<int>(std::floor(max_v)));

    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const double px = c, py = r;
        const double e0 = edge(sv[1].u, sv[1].v, sv[2].u, sv[2].v, px, py);
        const double e1 = edge(sv[2].u, sv[2].v, sv[0].u, sv[0].v, px, py);
        const double e2 = edge(sv[0].u, sv[0].v, sv[1].u, sv[1].v, px, py);
        if (!edge_covers(e0, sv[1].u, sv[1].v, sv[2].u, sv[2].v) ||
            !edge_covers(e1, sv[2].u, sv[2].v, sv[0].u, sv[0].v) ||
            !edge_covers(e2, sv[0].u, sv[0].v, sv[1].u, sv[1].v))
          continue;

        const double l0 = e0 / area, l1 = e1 / area, l2 = e2 / area;
        const double inv_z = l0 * sv[0].inv_z + l1 * sv[1].inv_z + l2 * sv[2].inv_z;
        const double z = 1.0 / inv_z;

        const double zb = img.depth.at(r, c);
        if (zb > 0.0 && zb <= z) continue;

        const Vec3 color =
            (1.0 / inv_z) * (l0 * sv[0].color_by_z + l1 * sv[1].color_by_z + l2 * sv[2].color_by_z);

        // Headlight Lambert, two-sided since CAD winding is unreliable.
        const Vec3 surf = backproject_pixel(r, c, z, k);
        const Vec3 view = normalized(-surf);
        Vec3 n = face_n;
        if (dot(n, view) < 0.0) n = -n;
        const double lambert = std::max(0.0, dot(n, view));

        img.depth.at(r, c) = z;
        for (int ch = 0; ch < 3; ++ch)
          img.rgb_at(r, c, ch) = std::clamp(color[ch] * lambert, 0.0, 1.0);
      }
    }
  }
  return img;
}

RgbdImage crop_and_zoom(const RgbdImage& img, const Pose& T, double diameter,
                        const CameraIntrinsics& k, int out_size, double pad) {
  const PixelCoord center = project(T.translation, k);  // throws when z <= 0
  const double side = pad * k.fx * diameter / center.z;
  return detail::resample_window(img, center.u, center.v, side, side, out_size, out_size);
}

CameraIntrinsics crop_intrinsics(const Pose& T, double diameter, const CameraIntrinsics& k,
                                 int out_size, double pad) {
  const PixelCoord center = project(T.translation, k);
  const double side = pad * k.fx * diameter / center.z;
  const double scale = out_size / side;
  CameraIntrinsics ck;
  ck.fx = k.fx * scale;
  ck.fy = k.fy * scale;
  ck.cx = (k.cx - center.u) * scale + out_size / 2.0 - 0.5;
  ck.cy = (k.cy - center.v) * scale + out_size / 2.0 - 0.5;
  ck.width = out_size;
  ck.height = out_size;
  return ck;
}

}  // namespace se3track
