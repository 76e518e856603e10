#pragma once

// Classical point-to-plane Gauss-Newton registration against an observed
// depth image, with projective data association and a Huber robust loss.

#include <array>

#include "se3track/camera.hpp"
#include "se3track/geometry.hpp"
#include "se3track/image.hpp"
#include "se3track/mesh.hpp"

namespace se3track {

struct GaussNewtonConfig {
  int max_iterations = 30;
  double convergence_tol = 1e-6;       // |step twist| threshold
  double huber_delta = 0.005;          // meters
  double max_correspondence_dist = 0.05;  // meters
  double damping = 1e-9;               // added to the JtJ diagonal
  // Sign-folded normal-compatibility gate |n_model . n_observed| >= cos;
  // skipped where the observed normal is not resolvable (duplicated depth
  // samples in upscaled crops).
  double normal_compat_cos = 0.5;
};

// Normal equations of one linearization, ordered (t, w) to match Twist.
struct PointToPlaneSystem {
  std::array<double, 36> JtJ{};  // row-major 6x6, Huber-weighted
  std::array<double, 6> Jtr{};
  double weighted_sq_residual = 0.0;  // sum of w * r^2 (the Huber IRLS cost)
  double rms = 0.0;                   // unweighted inlier residual RMS, meters
  int inlier_count = 0;
};

// Residual r = n . (p - q) per model point p with unit normal n, where q is
// found by projecting p into the observed depth image and backprojecting.
// Jacobian row [n^T, (p x n)^T]. Rows beyond max_correspondence_dist are
// dropped; Huber weights w = min(1, delta/|r|) scale the accumulation.
// Throws std::runtime_error with fewer than 6 inlier correspondences.
PointToPlaneSystem build_point_to_plane_system(const std::vector<Vec3>& model_points,
                                               const std::vector<Vec3>& model_normals,
                                               const DepthImage& observed,
                                               const CameraIntrinsics& k,
                                               const GaussNewtonConfig& cfg);

// Solves (JtJ + damping I) dxi = -Jtr by Cholesky; escalates damping x10 up
// to 3 times before giving up with std::runtime_error.
Twist solve_normal_equations(const std::array<double, 36>& JtJ,
                             const std::array<double, 6>& Jtr, double damping);

// Linearized Huber cost 0.5 |W^(1/2)(r + J dxi)|^2 evaluated from the
// accumulated system; used to assert per-step cost decrease.
double linearized_cost(const PointToPlaneSystem& sys, const Twist& dxi);

struct IcpResult {
  Twist twist;         // log_se3(T_final * T_prev^-1)
  double residual_rms = 0.0;
  int iterations = 0;
};

// Iterates build/solve/left-apply starting from pose_prev until the step
// twist norm drops below convergence_tol. model_* are in the object frame.
IcpResult icp_register(const std::vector<Vec3>& model_points_obj,
                       const std::vector<Vec3>& model_normals_obj, const Pose& pose_prev,
                       const DepthImage& observed, const CameraIntrinsics& k,
                       const GaussNewtonConfig& cfg);

}  // namespace se3track
