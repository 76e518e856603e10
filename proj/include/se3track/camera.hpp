#pragma once

// Pinhole camera model. Convention: pixel (row, col) has its center at
// continuous image coordinates (u, v) = (col, row).

#include <vector>

#include "se3track/geometry.hpp"
#include "se3track/image.hpp"

namespace se3track {

struct CameraIntrinsics {
  double fx = 0, fy = 0;  // focal lengths, pixels
  double cx = 0, cy = 0;  // principal point, pixels
  int width = 0, height = 0;
};

struct PixelCoord {
  double u = 0, v = 0;  // continuous image coordinates
  double z = 0;         // depth along the optical axis, meters
};

// Perspective projection of a camera-frame point. Throws std::domain_error
// for points at or behind the camera (z <= 0).
PixelCoord project(const Vec3& p, const CameraIntrinsics& k);

// Camera-frame point for one pixel of a depth image.
Vec3 backproject_pixel(int row, int col, double depth, const CameraIntrinsics& k);

// All valid pixels of a depth image as a camera-frame cloud, row-major order.
std::vector<Vec3> backproject(const DepthImage& d, const CameraIntrinsics& k);

}  // namespace se3track
