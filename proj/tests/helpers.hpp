#pragma once

// Shared fixtures and independent oracles for the test suites. Everything in
// here must stay independent of the implementation paths it is used to check.

#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "se3track/geometry.hpp"
#include "se3track/rng.hpp"

namespace se3track::testing {

// --- random domain values ---------------------------------------------------

inline Vec3 random_vec3(Rng& rng, double scale = 1.0) {
  return {rng.uniform(-scale, scale), rng.uniform(-scale, scale), rng.uniform(-scale, scale)};
}

inline Vec3 random_rotvec(Rng& rng, double max_angle = M_PI - 0.1) {
  Vec3 axis = normalized(Vec3{rng.normal(), rng.normal(), rng.normal()});
  return rng.uniform(1e-6, max_angle) * axis;
}

inline Pose random_pose(Rng& rng, double trans_scale = 1.0) {
  return Pose{exp_so3(random_rotvec(rng)), random_vec3(rng, trans_scale)};
}

// --- oracles -----------------------------------------------------------------

// Truncated matrix-exponential series sum_k [w]x^k / k!.
inline Mat3 matrix_exponential_series(const Vec3& w, int terms = 30) {
  const Mat3 wx = skew(w);
  Mat3 sum = Mat3::identity();
  Mat3 power = Mat3::identity();
  double factorial = 1.0;
  for (int k = 1; k <= terms; ++k) {
    power = power * wx;
    factorial *= k;
    sum = sum + (1.0 / factorial) * power;
  }
  return sum;
}

// 4x4 homogeneous matrix multiplication, independent of compose().
inline std::array<double, 16> to_homogeneous(const Pose& p) {
  std::array<double, 16> h{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) h[4 * r + c] = p.rotation(r, c);
  h[3] = p.translation.x;
  h[7] = p.translation.y;
  h[11] = p.translation.z;
  h[15] = 1.0;
  return h;
}

inline std::array<double, 16> matmul4(const std::array<double, 16>& a,
                                      const std::array<double, 16>& b) {
  std::array<double, 16> r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += a[4 * i + k] * b[4 * k + j];
      r[4 * i + j] = s;
    }
  return r;
}

inline double pose_distance(const Pose& a, const Pose& b) {
  return frobenius_norm(a.rotation - b.rotation) + norm(a.translation - b.translation);
}

// Dense LU solve with partial pivoting, any size; oracle for the 6x6 Cholesky.
inline std::vector<double> lu_solve(std::vector<double> a, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  std::vector<int> piv(n);
  for (int i = 0; i < n; ++i) piv[i] = i;
  for (int col = 0; col < n; ++col) {
    int p = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[p * n + col])) p = r;
    if (p != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[p * n + c]);
      std::swap(b[col], b[p]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * x[c];
    x[r] = s / a[r * n + r];
  }
  return x;
}

// Exact point-to-triangle distance (Eberly-style region decomposition).
inline double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b,
                                      const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0 && d2 <= 0) return norm(p - a);
  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0 && d4 <= d3) return norm(p - b);
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    const double v = d1 / (d1 - d3);
    return norm(p - (a + v * ab));
  }
  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0 && d5 <= d6) return norm(p - c);
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    const double w = d2 / (d2 - d6);
    return norm(p - (a + w * ac));
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return norm(p - (b + w * (c - b)));
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return norm(p - (a + v * ab + w * ac));
}

// --- scratch directories ------------------------------------------------------

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("se3track_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace se3track::testing
