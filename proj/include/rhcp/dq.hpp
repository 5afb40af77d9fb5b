#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>

namespace rhcp {

inline constexpr double kUnitTol = 1e-9;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct CoincidentPoints : std::invalid_argument {
  CoincidentPoints() : std::invalid_argument("line endpoints are coincident") {}
};
struct ZeroNormal : std::invalid_argument {
  ZeroNormal() : std::invalid_argument("plane normal has zero length") {}
};

/// Quaternion with coefficient order (w, x, y, z). Pure quaternions have w = 0;
/// rotations are unit quaternions. vec4() fixes the ordering used by every
/// Jacobian in the library.
struct Quaternion {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  Quaternion() = default;
  Quaternion(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

  static Quaternion pure(const Eigen::Vector3d& v) { return {0.0, v.x(), v.y(), v.z()}; }
  static Quaternion from_vec4(const Eigen::Vector4d& v) { return {v(0), v(1), v(2), v(3)}; }
  static Quaternion from_axis_angle(const Eigen::Vector3d& axis, double angle);

  Eigen::Vector3d vec3() const { return {x, y, z}; }
  Eigen::Vector4d vec4() const { return {w, x, y, z}; }

  Quaternion conj() const { return {w, -x, -y, -z}; }
  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  double dot(const Quaternion& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }
  Quaternion normalized() const;

  Quaternion operator*(const Quaternion& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z,
            w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x,
            w * o.z + x * o.y - y * o.x + z * o.w};
  }
  Quaternion operator*(double s) const { return {w * s, x * s, y * s, z * s}; }
  Quaternion operator+(const Quaternion& o) const { return {w + o.w, x + o.x, y + o.y, z + o.z}; }
  Quaternion operator-(const Quaternion& o) const { return {w - o.w, x - o.x, y - o.y, z - o.z}; }

  /// Rotates v by this (unit) quaternion: vec3(q * v * q').
  Eigen::Vector3d rotate(const Eigen::Vector3d& v) const;
  Eigen::Matrix3d rotation_matrix() const;

  /// Canonical representative of the double cover: flips sign so that w >= 0.
  Quaternion canonical() const { return w < 0.0 ? Quaternion{-w, -x, -y, -z} : *this; }
};

/// Hamilton operators: vec4(a*b) = hamilton_left(a) vec4(b) = hamilton_right(b) vec4(a).
Eigen::Matrix4d hamilton_left(const Quaternion& a);
Eigen::Matrix4d hamilton_right(const Quaternion& b);

struct DualQuaternion {
  Quaternion primary;
  Quaternion dual{0, 0, 0, 0};

  DualQuaternion() = default;
  DualQuaternion(const Quaternion& p, const Quaternion& d) : primary(p), dual(d) {}

  static DualQuaternion identity() { return {}; }
  /// Rigid transform x = r + eps (1/2) p r.
  static DualQuaternion from_pose(const Quaternion& r, const Eigen::Vector3d& p);

  DualQuaternion conj() const { return {primary.conj(), dual.conj()}; }
  DualQuaternion operator*(const DualQuaternion& o) const {
    return {primary * o.primary, primary * o.dual + dual * o.primary};
  }
  DualQuaternion operator*(double s) const { return {primary * s, dual * s}; }

  Quaternion rotation() const { return primary; }
  /// Translation: vec3(2 dual primary') for unit inputs; the squared-norm
  /// division makes this the exact inverse of from_pose for any scale, which
  /// keeps finite differences through the coefficients well defined.
  Eigen::Vector3d translation() const {
    const double n2 = primary.dot(primary);
    return ((dual * 2.0) * primary.conj()).vec3() / n2;
  }

  bool is_unit(double tol = kUnitTol) const {
    return std::abs(primary.norm() - 1.0) <= tol && std::abs(primary.dot(dual)) <= tol;
  }
};

/// Dual-quaternion product; unit x unit stays unit to 1e-9.
DualQuaternion multiply(const DualQuaternion& a, const DualQuaternion& b);

/// Exponential of a pure dual quaternion; the result is renormalized to a unit
/// dual quaternion (the one place, besides post-integration cleanup, where
/// renormalization is allowed).
DualQuaternion exp_unit(const DualQuaternion& xi);

/// Logarithm of a unit dual quaternion; inverse of exp_unit for |rotation| < pi.
DualQuaternion log_unit(const DualQuaternion& x);

/// Pluecker line: unit pure direction quaternion and pure moment, <dir, moment> = 0.
struct Line {
  Quaternion direction;
  Quaternion moment;

  Eigen::Vector3d dir3() const { return direction.vec3(); }
  Eigen::Vector3d moment3() const { return moment.vec3(); }
};

/// Plane n + eps <p, n>: unit pure normal and signed offset in meters.
struct Plane {
  Quaternion normal;
  double offset = 0.0;

  Eigen::Vector3d normal3() const { return normal.vec3(); }
};

Line line_from_points(const Eigen::Vector3d& p1, const Eigen::Vector3d& p2);
Line line_from_point_direction(const Eigen::Vector3d& p, const Eigen::Vector3d& d);
Plane plane_from_point_normal(const Eigen::Vector3d& p, const Eigen::Vector3d& n);

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

}  // namespace rhcp
