#include "se3track/icp.hpp"

#include <cmath>
#include <stdexcept>

namespace se3track {

PointToPlaneSystem build_point_to_plane_system(const std::vector<Vec3>& model_points,
                                               const std::vector<Vec3>& model_normals,
                                               const DepthImage& observed,
                                               const CameraIntrinsics& k,
                                               const GaussNewtonConfig& cfg) {
  if (model_points.size() != model_normals.size() || model_points.size() < 6)
    throw std::invalid_argument("build_point_to_plane_system: need >= 6 model points");

  PointToPlaneSystem sys;
  double sq_sum = 0.0;

  for (size_t i = 0; i < model_points.size(); ++i) {
    const Vec3& p = model_points[i];
    const Vec3& n = model_normals[i];
    if (p.z <= 0.0) continue;

    // Projective association: look up the observed depth under p's pixel.
    const double u = k.fx * p.x / p.z + k.cx;
    const double v = k.fy * p.y / p.z + k.cy;
    const int col = static_cast<int>(std::lround(u));
    const int row = static_cast<int>(std::lround(v));
    if (!observed.in_bounds(row, col)) continue;
    const double depth = observed.at(row, col);
    if (depth <= 0.0) continue;
    const Vec3 q = backproject_pixel(row, col, depth, k);
    if (norm(p - q) > cfg.max_correspondence_dist) continue;

    // Normal compatibility: reject pairings across creases (a pixel showing
    // a different surface than the model point). Sign-folded so the gate is
    // insensitive to winding and to which side the surface is observed from.
    if (cfg.normal_compat_cos > 0.0 && observed.in_bounds(row - 1, col - 1) &&
        observed.in_bounds(row + 1, col + 1)) {
      const double dl = observed.at(row, col - 1), dr = observed.at(row, col + 1);
      const double du = observed.at(row - 1, col), dd = observed.at(row + 1, col);
      if (dl > 0.0 && dr > 0.0 && du > 0.0 && dd > 0.0) {
        const Vec3 ex = backproject_pixel(row, col + 1, dr, k) -
                        backproject_pixel(row, col - 1, dl, k);
        const Vec3 ey = backproject_pixel(row + 1, col, dd, k) -
                        backproject_pixel(row - 1, col, du, k);
        const Vec3 n_obs = cross(ex, ey);
        const double len = norm(n_obs);
        if (len > 1e-12 && std::abs(dot(n, n_obs)) / len < cfg.normal_compat_cos) continue;
      }
    }

    const double r = dot(n, p - q);
    const double w = std::abs(r) <= cfg.huber_delta ? 1.0 : cfg.huber_delta / std::abs(r);

    const Vec3 pxn = cross(p, n);
    const std::array<double, 6> jrow = {n.x, n.y, n.z, pxn.x, pxn.y, pxn.z};
    for (int a = 0; a < 6; ++a) {
      sys.Jtr[a] += w * jrow[a] * r;
      for (int b = a; b < 6; ++b) sys.JtJ[6 * a + b] += w * jrow[a] * jrow[b];
    }
    sys.weighted_sq_residual += w * r * r;
    sq_sum += r * r;
    ++sys.inlier_count;
  }

  if (sys.inlier_count < 6)
    throw std::runtime_error("build_point_to_plane_system: degenerate system (" +
                             std::to_string(sys.inlier_count) + " inliers)");

  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < a; ++b) sys.JtJ[6 * a + b] = sys.JtJ[6 * b + a];
  sys.rms = std::sqrt(sq_sum / sys.inlier_count);
  return sys;
}

namespace {

// Cholesky factorization in place; returns false if not positive definite.
bool cholesky6(std::array<double, 36>& a) {
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[6 * i + j];
      for (int kk = 0; kk < j; ++kk) s -= a[6 * i + kk] * a[6 * j + kk];
      if (i == j) {
        if (s <= 0.0) return false;
        a[6 * i + j] = std::sqrt(s);
      } else {
        a[6 * i + j] = s / a[6 * j + j];
      }
    }
  }
  return true;
}

}  // namespace

Twist solve_normal_equations(const std::array<double, 36>& JtJ,
                             const std::array<double, 6>& Jtr, double damping) {
  double lambda = damping;
  for (int attempt = 0; attempt <= 3; ++attempt, lambda *= 10.0) {
    std::array<double, 36> chol = JtJ;
    for (int i = 0; i < 6; ++i) chol[6 * i + i] += lambda;
    if (!cholesky6(chol)) continue;

    std::array<double, 6> x;
    for (int i = 0; i < 6; ++i) {  // forward: L y = -Jtr
      double s = -Jtr[i];
      for (int j = 0; j < i; ++j) s -= chol[6 * i + j] * x[j];
      x[i] = s / chol[6 * i + i];
    }
    for (int i = 5; i >= 0; --i) {  // backward: L^T x = y
      double s = x[i];
      for (int j = i + 1; j < 6; ++j) s -= chol[6 * j + i] * x[j];
      x[i] = s / chol[6 * i + i];
    }
    return Twist{{x[0], x[1], x[2]}, {x[3], x[4], x[5]}};
  }
  throw std::runtime_error("solve_normal_equations: singular system after damping escalation");
}

double linearized_cost(const PointToPlaneSystem& sys, const Twist& dxi) {
  const std::array<double, 6> x = {dxi.t.x, dxi.t.y, dxi.t.z, dxi.w.x, dxi.w.y, dxi.w.z};
  double cost = sys.weighted_sq_residual;
  for (int a = 0; a < 6; ++a) {
    cost += 2.0 * x[a] * sys.Jtr[a];
    for (int b = 0; b < 6; ++b) cost += x[a] * sys.JtJ[6 * a + b] * x[b];
  }
  return 0.5 * cost;
}

IcpResult icp_register(const std::vector<Vec3>& model_points_obj,
                       const std::vector<Vec3>& model_normals_obj, const Pose& pose_prev,
                       const DepthImage& observed, const CameraIntrinsics& k,
                       const GaussNewtonConfig& cfg) {
  Pose pose = pose_prev;
  IcpResult result;

  std::vector<Vec3> pts, nrm;
  pts.reserve(model_points_obj.size());
  nrm.reserve(model_points_obj.size());
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    pts.clear();
    nrm.clear();
    for (size_t i = 0; i < model_points_obj.size(); ++i) {
      const Vec3 p = transform_point(pose, model_points_obj[i]);
      const Vec3 n = pose.rotation * model_normals_obj[i];
      // Only camera-facing surface is observable; back-facing samples would
      // pair with the front surface through the projective lookup. Assumes
      // outward normals (exact visibility test for convex models).
      if (dot(n, p) >= 0.0) continue;
      pts.push_back(p);
      nrm.push_back(n);
    }
    PointToPlaneSystem sys;
    Twist step;
    try {
      sys = build_point_to_plane_system(pts, nrm, observed, k, cfg);
      step = solve_normal_equations(sys.JtJ, sys.Jtr, cfg.damping);
    } catch (const std::exception&) {
      // Degenerate on the very first linearization: nothing was estimated,
      // let the caller flag the frame. Later on, keep what we have.
      if (iter == 0) throw;
      break;
    }

    pose = apply_update(pose, step);
    pose.rotation = orthonormalized(pose.rotation);
    result.residual_rms = sys.rms;
    result.iterations = iter + 1;
    if (norm(step) < cfg.convergence_tol) break;
  }

  result.twist = log_se3(compose(pose, inverse(pose_prev)));
  return result;
}

}  // namespace se3track
