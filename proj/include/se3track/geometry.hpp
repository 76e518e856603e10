#pragma once

// so(3)/se(3) Lie algebra and SE(3) group arithmetic.
// All storage is row-major, double precision. Every function here is pure.

#include <array>
#include <cmath>

namespace se3track {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
inline Vec3 operator*(const Vec3& a, double s) { return s * a; }
inline Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }
inline Vec3& operator+=(Vec3& a, const Vec3& b) { a = a + b; return a; }
inline Vec3& operator-=(Vec3& a, const Vec3& b) { a = a - b; return a; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) { return a / norm(a); }
inline bool finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

struct Mat3 {
  // Row-major: m[3*r + c].
  std::array<double, 9> m{};

  static Mat3 identity() {
    Mat3 r;
    r.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    return r;
  }

  double& operator()(int r, int c) { return m[3 * r + c]; }
  double operator()(int r, int c) const { return m[3 * r + c]; }
};

Mat3 operator*(const Mat3& a, const Mat3& b);
Vec3 operator*(const Mat3& a, const Vec3& v);
Mat3 operator+(const Mat3& a, const Mat3& b);
Mat3 operator-(const Mat3& a, const Mat3& b);
Mat3 operator*(double s, const Mat3& a);
Mat3 transpose(const Mat3& a);
double det(const Mat3& a);
double frobenius_norm(const Mat3& a);

// Local tangent-space parameterization of a rigid motion: translation t
// (meters) and rotation vector w (radians). Canonical log-map outputs keep
// |w| <= pi.
struct Twist {
  Vec3 t;
  Vec3 w;
};

inline double norm(const Twist& xi) {
  return std::sqrt(dot(xi.t, xi.t) + dot(xi.w, xi.w));
}

// Rigid transform: p_out = rotation * p_in + translation.
struct Pose {
  Mat3 rotation = Mat3::identity();
  Vec3 translation;
};

// Unit quaternion with the scalar part kept non-negative so q and -q never
// both appear as outputs.
struct UnitQuaternion {
  double x = 0.0, y = 0.0, z = 0.0, w = 1.0;
};

Mat3 skew(const Vec3& w);

// Rodrigues: R = I + [w]x/|w| sin|w| + [w]x^2/|w|^2 (1-cos|w|).
// Below |w| = 1e-8 switches to the 2nd-order series I + [w]x + 0.5 [w]x^2.
Mat3 exp_so3(const Vec3& w);

// Inverse of exp_so3; |result| <= pi. Throws std::invalid_argument when R
// violates the rotation invariants beyond 1e-6.
Vec3 log_so3(const Mat3& R);

// Literal [R t; 0 1] composition: translation passes through unchanged.
Pose exp_se3(const Twist& xi);
Twist log_se3(const Pose& T);

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& T);
Vec3 transform_point(const Pose& T, const Vec3& p);

// T_new = exp_se3(dxi) * T_prev.
Pose apply_update(const Pose& T_prev, const Twist& dxi);

UnitQuaternion quat_from_rotvec(const Vec3& w);
// Throws std::invalid_argument when |q| deviates from 1 beyond 1e-6.
Mat3 quat_to_mat(const UnitQuaternion& q);

bool is_rotation(const Mat3& R, double tol);

// Nearest rotation matrix (polar decomposition, Newton iteration).
Mat3 orthonormalized(const Mat3& M);

}  // namespace se3track
