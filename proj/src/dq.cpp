#include "rhcp/dq.hpp"

#include <cmath>

namespace rhcp {

Quaternion Quaternion::from_axis_angle(const Eigen::Vector3d& axis, double angle) {
  const double n = axis.norm();
  if (n < 1e-12) return {};
  const double half = 0.5 * angle;
  const Eigen::Vector3d u = axis / n * std::sin(half);
  return {std::cos(half), u.x(), u.y(), u.z()};
}

Quaternion Quaternion::normalized() const {
  const double n = norm();
  if (n < 1e-15) throw std::domain_error("cannot normalize zero quaternion");
  return {w / n, x / n, y / n, z / n};
}

Eigen::Vector3d Quaternion::rotate(const Eigen::Vector3d& v) const {
  return ((*this) * Quaternion::pure(v) * conj()).vec3();
}

Eigen::Matrix3d Quaternion::rotation_matrix() const {
  Eigen::Matrix3d m;
  const double ww = w * w, xx = x * x, yy = y * y, zz = z * z;
  m << ww + xx - yy - zz, 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), ww - xx + yy - zz, 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), ww - xx - yy + zz;
  return m;
}

Eigen::Matrix4d hamilton_left(const Quaternion& a) {
  Eigen::Matrix4d m;
  m << a.w, -a.x, -a.y, -a.z,
       a.x,  a.w, -a.z,  a.y,
       a.y,  a.z,  a.w, -a.x,
       a.z, -a.y,  a.x,  a.w;
  return m;
}

Eigen::Matrix4d hamilton_right(const Quaternion& b) {
  Eigen::Matrix4d m;
  m << b.w, -b.x, -b.y, -b.z,
       b.x,  b.w,  b.z, -b.y,
       b.y, -b.z,  b.w,  b.x,
       b.z,  b.y, -b.x,  b.w;
  return m;
}

DualQuaternion DualQuaternion::from_pose(const Quaternion& r, const Eigen::Vector3d& p) {
  return {r, Quaternion::pure(p) * r * 0.5};
}

DualQuaternion multiply(const DualQuaternion& a, const DualQuaternion& b) { return a * b; }

DualQuaternion exp_unit(const DualQuaternion& xi) {
  const double phi = xi.primary.vec3().norm();
  Quaternion prim;
  if (phi > 1e-12) {
    const double s = std::sin(phi) / phi;
    prim = Quaternion{std::cos(phi), s * xi.primary.x, s * xi.primary.y, s * xi.primary.z};
  } else {
    // Second-order series keeps the limit smooth near phi = 0.
    const double s = 1.0 - phi * phi / 6.0;
    prim = Quaternion{std::cos(phi), s * xi.primary.x, s * xi.primary.y, s * xi.primary.z};
  }
  prim = prim.normalized();
  const Quaternion dual_pure = Quaternion::pure(xi.dual.vec3());
  return {prim, dual_pure * prim};
}

DualQuaternion log_unit(const DualQuaternion& x) {
  const Quaternion r = x.primary;
  const Eigen::Vector3d im = r.vec3();
  const double im_norm = im.norm();
  const double angle = std::atan2(im_norm, r.w);
  Eigen::Vector3d half_axis = Eigen::Vector3d::Zero();
  if (im_norm > 1e-12) half_axis = im / im_norm * angle;
  const Eigen::Vector3d p = x.translation();
  return {Quaternion::pure(half_axis), Quaternion::pure(0.5 * p)};
}

Line line_from_points(const Eigen::Vector3d& p1, const Eigen::Vector3d& p2) {
  const Eigen::Vector3d diff = p2 - p1;
  if (diff.norm() <= 1e-9) throw CoincidentPoints();
  const Eigen::Vector3d d = diff.normalized();
  return {Quaternion::pure(d), Quaternion::pure(p1.cross(d))};
}

Line line_from_point_direction(const Eigen::Vector3d& p, const Eigen::Vector3d& d) {
  if (d.norm() <= 1e-9) throw CoincidentPoints();
  const Eigen::Vector3d u = d.normalized();
  return {Quaternion::pure(u), Quaternion::pure(p.cross(u))};
}

Plane plane_from_point_normal(const Eigen::Vector3d& p, const Eigen::Vector3d& n) {
  if (n.norm() <= 1e-9) throw ZeroNormal();
  const Eigen::Vector3d u = n.normalized();
  return {Quaternion::pure(u), p.dot(u)};
}

}  // namespace rhcp
