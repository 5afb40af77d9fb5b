#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rhcp/dq.hpp"

namespace rhcp {

struct UnknownFrame : std::invalid_argument {
  explicit UnknownFrame(const std::string& what) : std::invalid_argument(what) {}
};

/// Planner state coordinate: root orientation (unit quaternion), root position,
/// joint angles. The velocity layout is [vec4(rdot); pdot; thetadot], n = n_theta + 7.
struct Configuration {
  Quaternion r;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::VectorXd theta;

  int dim() const { return 7 + static_cast<int>(theta.size()); }

  Eigen::VectorXd to_vector() const;
  static Configuration from_vector(const Eigen::VectorXd& v);
};

/// Frame identifiers for fkm_pose / frame_jacobians.
struct FrameId {
  enum Kind { Foot, Knee, Torso, TorsoCorner } kind = Torso;
  int index = 0;  // leg index for Foot/Knee, corner index for TorsoCorner

  static FrameId foot(int leg) { return {Foot, leg}; }
  static FrameId knee(int leg) { return {Knee, leg}; }
  static FrameId torso() { return {Torso, 0}; }
  static FrameId torso_corner(int c) { return {TorsoCorner, c}; }
};

struct LegModel {
  Eigen::Vector3d mount;   // mount position in torso frame
  double mount_yaw = 0.0;  // yaw of the leg plane about torso z
  double l1 = 0.08, l2 = 0.15, l3 = 0.17;
  double joint_min = -2.0, joint_max = 2.0;
};

struct BodyPrimitive {
  enum Attachment { TorsoBody, LegKnee, LegFoot } attachment = TorsoBody;
  int index = 0;                                   // leg or corner index
  Eigen::Vector3d local = Eigen::Vector3d::Zero(); // offset in torso frame (torso spheres)
  double radius = 0.0;
};

/// Floating-base hexapod with per-leg coxa-yaw / femur-pitch / tibia-pitch chains.
/// Immutable after construction; every operation here is pure.
struct RobotModel {
  std::vector<LegModel> legs;
  Eigen::Vector3d torso_half = {0.15, 0.10, 0.05};
  double torso_mass = 2.5;
  double link_mass = 0.05;
  double torso_sphere_radius = 0.06;
  double point_radius = 0.01;
  double v_max_pose = 0.5;    // bound on |rdot_i|, |pdot_i|
  double v_max_joint = 1.0;   // rad/s

  int n_legs() const { return static_cast<int>(legs.size()); }
  int n_theta() const { return 3 * n_legs(); }
  int dim() const { return 7 + n_theta(); }
  double max_leg_extension() const;
  double total_mass() const { return torso_mass + 3 * n_legs() * link_mass; }

  Eigen::VectorXd q_min() const;
  Eigen::VectorXd q_max() const;
  Eigen::VectorXd qdot_min() const;
  Eigen::VectorXd qdot_max() const;

  bool within_limits(const Configuration& q, double tol = 1e-9) const;
};

RobotModel default_hexapod();

/// World pose of the named frame; the foot position is the translation part.
DualQuaternion fkm_pose(const RobotModel& model, const Configuration& q, FrameId frame);

inline Eigen::Vector3d fkm_position(const RobotModel& model, const Configuration& q, FrameId f) {
  return fkm_pose(model, q, f).translation();
}

struct FrameJacobians {
  Eigen::MatrixXd J_p;  // 3 x n, qdot -> world linear velocity of the frame origin
  Eigen::MatrixXd J_r;  // 4 x n, qdot -> vec4(rdot_frame)
};

FrameJacobians frame_jacobians(const RobotModel& model, const Configuration& q, FrameId frame);

/// qdot -> d/dt vec3(r_frame * axis * r_frame'), for the tilt constraint lines.
Eigen::MatrixXd axis_direction_jacobian(const RobotModel& model, const Configuration& q,
                                        FrameId frame, const Eigen::Vector3d& axis);

struct ComResult {
  Eigen::Vector3d com;
  Eigen::MatrixXd J;  // 3 x n
};

ComResult com_and_jacobian(const RobotModel& model, const Configuration& q);

struct PlacedPrimitive {
  BodyPrimitive body;
  Eigen::Vector3d position;
};

/// World positions of every primitive in the collision set (torso spheres,
/// knee and foot points per leg).
std::vector<PlacedPrimitive> collision_bodies(const RobotModel& model, const Configuration& q);

Eigen::MatrixXd primitive_jacobian(const RobotModel& model, const Configuration& q,
                                   const BodyPrimitive& body);

enum class IkBranch { KneeUp, KneeDown };

/// Analytic 3-DOF leg IK (yaw / pitch / pitch). KneeUp suits ground contacts;
/// KneeDown tucks the knee inboard for wall contacts.
/// Returns nullopt when the target is out of reach or violates joint limits.
std::optional<Eigen::Vector3d> leg_ik(const RobotModel& model, int leg,
                                      const Configuration& root_only,
                                      const Eigen::Vector3d& foot_world,
                                      IkBranch branch = IkBranch::KneeUp);

}  // namespace rhcp
