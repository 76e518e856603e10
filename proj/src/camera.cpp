#include "se3track/camera.hpp"

#include <stdexcept>

namespace se3track {

PixelCoord project(const Vec3& p, const CameraIntrinsics& k) {
  if (p.z <= 0.0) throw std::domain_error("project: point is at or behind the camera");
  return {k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy, p.z};
}

Vec3 backproject_pixel(int row, int col, double depth, const CameraIntrinsics& k) {
  return {(col - k.cx) * depth / k.fx, (row - k.cy) * depth / k.fy, depth};
}

std::vector<Vec3> backproject(const DepthImage& d, const CameraIntrinsics& k) {
  std::vector<Vec3> cloud;
  cloud.reserve(d.valid_count());
  for (int r = 0; r < d.height; ++r)
    for (int c = 0; c < d.width; ++c) {
      const double z = d.at(r, c);
      if (z > 0.0) cloud.push_back(backproject_pixel(r, c, z, k));
    }
  return cloud;
}

}  // namespace se3track
