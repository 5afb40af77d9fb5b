#include "rhcp/vfi.hpp"

namespace rhcp {

DistanceResult dist_point_plane(const Eigen::Vector3d& p, const Eigen::MatrixXd& J_p,
                                const Plane& plane) {
  const Eigen::Vector3d n = plane.normal3();
  return {p.dot(n) - plane.offset, n.transpose() * J_p};
}

DistanceResult dist_point_plane_sq(const Eigen::Vector3d& p, const Eigen::MatrixXd& J_p,
                                   const Plane& plane) {
  const DistanceResult d = dist_point_plane(p, J_p, plane);
  return {d.value * d.value, 2.0 * d.value * d.J};
}

DistanceResult dist_point_line_sq(const Eigen::Vector3d& p, const Eigen::MatrixXd& J_p,
                                  const Line& line) {
  const Eigen::Vector3d l = line.dir3();
  const Eigen::Vector3d e = p.cross(l) - line.moment3();
  return {e.squaredNorm(), -2.0 * e.transpose() * skew(l) * J_p};
}

DistanceResult dist_point_point_sq(const Eigen::Vector3d& p, const Eigen::MatrixXd& J_p,
                                   const Eigen::Vector3d& p_d) {
  const Eigen::Vector3d e = p - p_d;
  return {e.squaredNorm(), 2.0 * e.transpose() * J_p};
}

DistanceResult dist_axis_angle_sq(const Line& l, const Eigen::MatrixXd& J_l, const Line& l_d) {
  const Eigen::Vector3d e = l.dir3() - l_d.dir3();
  return {e.squaredNorm(), 2.0 * e.transpose() * J_l};
}

ConstraintRow keep_out_row(double d, const Eigen::RowVectorXd& J_d, double d_safe, double b_d,
                           double eta_d) {
  const double dtilde = d - d_safe;
  ConstraintRow row;
  row.kind = ConstraintRow::KeepOut;
  row.J_row = -J_d;
  row.rhs = eta_d * (dtilde - b_d);
  row.slack_max = std::max(0.0, -row.rhs);
  return row;
}

ConstraintRow keep_in_row(double d, const Eigen::RowVectorXd& J_d, double d_safe, double b_d,
                          double eta_d) {
  const double dtilde = d - d_safe;
  ConstraintRow row;
  row.kind = ConstraintRow::KeepIn;
  row.J_row = J_d;
  row.rhs = -eta_d * (dtilde + b_d);
  row.slack_max = std::max(0.0, -row.rhs);
  return row;
}

ConstraintBlock stack(const std::vector<ConstraintRow>& rows) {
  ConstraintBlock block;
  if (rows.empty()) {
    block.W.resize(0, 0);
    block.w.resize(0);
    block.s_max.resize(0);
    block.W_eq.resize(0, 0);
    block.w_eq.resize(0);
    return block;
  }
  const int n = static_cast<int>(rows.front().J_row.size());
  const int m = static_cast<int>(rows.size());
  block.W.resize(m, n);
  block.w.resize(m);
  block.s_max.resize(m);
  for (int i = 0; i < m; ++i) {
    if (rows[i].J_row.size() != n) throw DimensionMismatch();
    block.W.row(i) = rows[i].J_row;
    block.w(i) = rows[i].rhs;
    block.s_max(i) = rows[i].slack_max;
  }
  block.W_eq.resize(0, n);
  block.w_eq.resize(0);
  return block;
}

}  // namespace rhcp
