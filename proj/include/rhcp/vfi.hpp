#pragma once

#include <vector>

#include "rhcp/dq.hpp"

namespace rhcp {

struct DimensionMismatch : std::invalid_argument {
  DimensionMismatch() : std::invalid_argument("constraint rows disagree in dimension") {}
};

/// One relaxed velocity-level constraint row in the form
///   J_row qdot <= rhs + s,  0 <= s <= slack_max.
struct ConstraintRow {
  enum Kind { KeepOut, KeepIn } kind = KeepOut;
  Eigen::RowVectorXd J_row;
  double rhs = 0.0;
  double slack_max = 0.0;
};

/// Stacked inequality rows plus equality rows, the QP's raw material.
struct ConstraintBlock {
  Eigen::MatrixXd W;      // l_I x n
  Eigen::VectorXd w;      // l_I
  Eigen::VectorXd s_max;  // l_I
  Eigen::MatrixXd W_eq;   // l_E x n
  Eigen::VectorXd w_eq;   // l_E

  int rows() const { return static_cast<int>(W.rows()); }
};

struct DistanceResult {
  double value = 0.0;
  Eigen::RowVectorXd J;
};

/// Signed point-to-plane distance d = <p, n> - offset, J_d = n^T J_p.
DistanceResult dist_point_plane(const Eigen::Vector3d& p, const Eigen::MatrixXd& J_p,
                                const Plane& plane);

/// Square of the point-to-plane distance (differentiable everywhere).
DistanceResult dist_point_plane_sq(const Eigen::Vector3d& p, const Eigen::MatrixXd& J_p,
                                   const Plane& plane);

/// Point-to-line square distance D = ||p x l - m||^2.
DistanceResult dist_point_line_sq(const Eigen::Vector3d& p, const Eigen::MatrixXd& J_p,
                                  const Line& line);

/// Point-to-point square distance toward a fixed target p_d. For a pair of
/// moving points pass J_p = J_p1 - J_p2 and p_d = p2.
DistanceResult dist_point_point_sq(const Eigen::Vector3d& p, const Eigen::MatrixXd& J_p,
                                   const Eigen::Vector3d& p_d);

/// Squared chordal distance between two unit line directions,
/// D = ||vec3(l) - vec3(l_d)||^2; J_l maps qdot to d/dt vec3(l).
DistanceResult dist_axis_angle_sq(const Line& l, const Eigen::MatrixXd& J_l, const Line& l_d);

/// Keep-out: -J_d qdot <= eta (dtilde - b) + s, dtilde = d - d_safe,
/// slack_max = max(0, -eta (dtilde - b)). Squared-distance families pass the
/// squared quantities (d = D, d_safe = D_safe, b = b^2).
ConstraintRow keep_out_row(double d, const Eigen::RowVectorXd& J_d, double d_safe, double b_d,
                           double eta_d);

/// Keep-in: J_d qdot <= -eta (dtilde + b) + s, slack_max = max(0, eta (dtilde + b)).
ConstraintRow keep_in_row(double d, const Eigen::RowVectorXd& J_d, double d_safe, double b_d,
                          double eta_d);

/// Order-preserving vertical stack; equality rows start empty.
ConstraintBlock stack(const std::vector<ConstraintRow>& rows);

}  // namespace rhcp
