#pragma once

// Deterministic software z-buffer rasterizer and the object-centered
// crop-and-zoom used to build fixed-resolution estimator inputs.

#include "se3track/camera.hpp"
#include "se3track/geometry.hpp"
#include "se3track/image.hpp"
#include "se3track/mesh.hpp"

namespace se3track {

// Rasterizes the mesh posed by T (object -> camera). Perspective-correct
// interpolation, top-left fill rule, back-face culling disabled (two-sided
// headlight shading). Uncovered pixels stay rgb 0 / depth 0. Bit-identical
// output for identical inputs.
RgbdImage render_rgbd(const TriangleMesh& mesh, const Pose& T, const CameraIntrinsics& k);

inline constexpr double kDefaultCropPad = 1.4;

// Square window of side pad * fx * diameter / z centered on the projected
// object center, resampled to out_size x out_size (bilinear RGB, nearest
// depth). Throws std::domain_error when the object center is not in front of
// the camera.
RgbdImage crop_and_zoom(const RgbdImage& img, const Pose& T, double diameter,
                        const CameraIntrinsics& k, int out_size,
                        double pad = kDefaultCropPad);

// Intrinsics of the virtual camera the crop corresponds to: backprojecting
// crop pixels with these reproduces the original camera-frame geometry.
CameraIntrinsics crop_intrinsics(const Pose& T, double diameter, const CameraIntrinsics& k,
                                 int out_size, double pad = kDefaultCropPad);

}  // namespace se3track
