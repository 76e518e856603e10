#include "se3track/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace se3track {

Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
      r(i, j) = s;
    }
  return r;
}

Vec3 operator*(const Mat3& a, const Vec3& v) {
  return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
          a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
          a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

Mat3 operator+(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r.m[i] = a.m[i] + b.m[i];
  return r;
}

Mat3 operator-(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r.m[i] = a.m[i] - b.m[i];
  return r;
}

Mat3 operator*(double s, const Mat3& a) {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r.m[i] = s * a.m[i];
  return r;
}

Mat3 transpose(const Mat3& a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = a(j, i);
  return r;
}

double det(const Mat3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

double frobenius_norm(const Mat3& a) {
  double s = 0.0;
  for (double v : a.m) s += v * v;
  return std::sqrt(s);
}

Mat3 skew(const Vec3& w) {
  Mat3 r;
  r.m = {0, -w.z, w.y, w.z, 0, -w.x, -w.y, w.x, 0};
  return r;
}

namespace {
constexpr double kSmallAngle = 1e-8;
}

Mat3 exp_so3(const Vec3& w) {
  const double theta = norm(w);
  const Mat3 wx = skew(w);
  if (theta < kSmallAngle) {
    return Mat3::identity() + wx + 0.5 * (wx * wx);
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::identity() + a * wx + b * (wx * wx);
}

bool is_rotation(const Mat3& R, double tol) {
  const Mat3 err = transpose(R) * R - Mat3::identity();
  return frobenius_norm(err) <= tol && std::abs(det(R) - 1.0) <= tol;
}

Vec3 log_so3(const Mat3& R) {
  if (!is_rotation(R, 1e-6))
    throw std::invalid_argument("log_so3: input is not a rotation matrix");

  const double trace_cos = std::clamp((R(0, 0) + R(1, 1) + R(2, 2) - 1.0) / 2.0, -1.0, 1.0);
  double theta = std::acos(trace_cos);

  // Antisymmetric part of R is sin(theta) * [u]x.
  const Vec3 v{R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1)};

  if (theta < kSmallAngle) {
    return 0.5 * v;
  }
  if (theta < M_PI - 1e-3) {
    return (theta / (2.0 * std::sin(theta))) * v;
  }

  // Near theta = pi the trace formula for theta is ill-conditioned; the
  // antisymmetric part gives sin(theta) directly. Axis from the diagonal of
  // (R + I)/2, largest component first.
  const double sin_theta = std::clamp(0.5 * norm(v), 0.0, 1.0);
  theta = M_PI - std::asin(sin_theta);
  const double cos_theta = std::cos(theta);
  const double one_minus_cos = 1.0 - cos_theta;
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (R(i, i) > R(k, k)) k = i;
  Vec3 u;
  u[k] = std::sqrt(std::max(0.0, (R(k, k) - cos_theta) / one_minus_cos));
  for (int i = 0; i < 3; ++i) {
    if (i == k) continue;
    u[i] = (R(i, k) + R(k, i)) / (2.0 * one_minus_cos * u[k]);
  }
  // Overall sign: from the antisymmetric part when it is resolvable, else
  // first nonzero component positive (deterministic tie-break at theta = pi).
  if (norm(v) > 1e-12) {
    if (dot(u, v) < 0.0) u = -u;
  } else {
    for (int i = 0; i < 3; ++i) {
      if (u[i] != 0.0) {
        if (u[i] < 0.0) u = -u;
        break;
      }
    }
  }
  return theta * normalized(u);
}

Pose exp_se3(const Twist& xi) {
  return Pose{exp_so3(xi.w), xi.t};
}

Twist log_se3(const Pose& T) {
  return Twist{T.translation, log_so3(T.rotation)};
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose{a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

Pose inverse(const Pose& T) {
  const Mat3 rt = transpose(T.rotation);
  return Pose{rt, -(rt * T.translation)};
}

Vec3 transform_point(const Pose& T, const Vec3& p) {
  return T.rotation * p + T.translation;
}

Pose apply_update(const Pose& T_prev, const Twist& dxi) {
  return compose(exp_se3(dxi), T_prev);
}

UnitQuaternion quat_from_rotvec(const Vec3& w) {
  const double theta = norm(w);
  double scale, qw;
  if (theta < kSmallAngle) {
    scale = 0.5 - theta * theta / 48.0;
    qw = 1.0 - theta * theta / 8.0;
  } else {
    scale = std::sin(theta / 2.0) / theta;
    qw = std::cos(theta / 2.0);
  }
  UnitQuaternion q{scale * w.x, scale * w.y, scale * w.z, qw};
  const double n = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z + q.w * q.w);
  q.x /= n; q.y /= n; q.z /= n; q.w /= n;
  // Canonical representative: scalar part >= 0, deterministic at w == 0.
  bool negate = q.w < 0.0;
  if (q.w == 0.0) {
    if (q.x != 0.0) negate = q.x < 0.0;
    else if (q.y != 0.0) negate = q.y < 0.0;
    else negate = q.z < 0.0;
  }
  if (negate) { q.x = -q.x; q.y = -q.y; q.z = -q.z; q.w = -q.w; }
  return q;
}

Mat3 quat_to_mat(const UnitQuaternion& q) {
  const double n = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z + q.w * q.w);
  if (std::abs(n - 1.0) > 1e-6)
    throw std::invalid_argument("quat_to_mat: quaternion is not unit norm");
  const double x = q.x, y = q.y, z = q.z, w = q.w;
  Mat3 r;
  r.m = {1 - 2 * (y * y + z * z), 2 * (x * y - z * w),     2 * (x * z + y * w),
         2 * (x * y + z * w),     1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
         2 * (x * z - y * w),     2 * (y * z + x * w),     1 - 2 * (x * x + y * y)};
  return r;
}

Mat3 orthonormalized(const Mat3& M) {
  // Higham's Newton iteration for the polar factor: X <- (X + X^-T)/2.
  Mat3 x = M;
  for (int iter = 0; iter < 32; ++iter) {
    const double d = det(x);
    if (d == 0.0) throw std::invalid_argument("orthonormalized: singular matrix");
    // Inverse transpose via adjugate.
    Mat3 inv_t;
    inv_t(0, 0) = (x(1, 1) * x(2, 2) - x(1, 2) * x(2, 1)) / d;
    inv_t(0, 1) = (x(1, 2) * x(2, 0) - x(1, 0) * x(2, 2)) / d;
    inv_t(0, 2) = (x(1, 0) * x(2, 1) - x(1, 1) * x(2, 0)) / d;
    inv_t(1, 0) = (x(0, 2) * x(2, 1) - x(0, 1) * x(2, 2)) / d;
    inv_t(1, 1) = (x(0, 0) * x(2, 2) - x(0, 2) * x(2, 0)) / d;
    inv_t(1, 2) = (x(0, 1) * x(2, 0) - x(0, 0) * x(2, 1)) / d;
    inv_t(2, 0) = (x(0, 1) * x(1, 2) - x(0, 2) * x(1, 1)) / d;
    inv_t(2, 1) = (x(0, 2) * x(1, 0) - x(0, 0) * x(1, 2)) / d;
    inv_t(2, 2) = (x(0, 0) * x(1, 1) - x(0, 1) * x(1, 0)) / d;
    const Mat3 next = 0.5 * (x + inv_t);
    if (frobenius_norm(next - x) < 1e-15) return next;
    x = next;
  }
  return x;
}

}  // namespace se3track
