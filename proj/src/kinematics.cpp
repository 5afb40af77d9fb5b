#include "rhcp/kinematics.hpp"

#include <cmath>

namespace rhcp {
namespace {

Eigen::Matrix3d rot_z(double a) {
  Eigen::Matrix3d m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

Eigen::Matrix3d rot_y(double a) {
  Eigen::Matrix3d m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}

/// Leg chain quantities expressed in the torso frame.
struct LegChain {
  Eigen::Vector3d o1, o2, o3;  // joint origins
  Eigen::Vector3d a1, a2, a3;  // joint axes
  Eigen::Vector3d knee, foot;  // end of femur, end of tibia
  Eigen::Vector3d mid1, mid2, mid3;
  Quaternion r_local;          // torso-to-foot-frame rotation
  Quaternion r_local_knee;     // torso-to-knee-frame rotation
};

LegChain leg_chain(const LegModel& leg, const Eigen::Vector3d& th) {
  LegChain c;
  const Eigen::Matrix3d R0 = rot_z(leg.mount_yaw);
  const Eigen::Matrix3d R1 = R0 * rot_z(th(0));
  const Eigen::Matrix3d R2 = R1 * rot_y(th(1));
  const Eigen::Matrix3d R3 = R2 * rot_y(th(2));
  const Eigen::Vector3d ex(1, 0, 0);

  c.o1 = leg.mount;
  c.o2 = c.o1 + R1 * (leg.l1 * ex);
  c.knee = c.o2 + R2 * (leg.l2 * ex);
  c.o3 = c.knee;
  c.foot = c.o3 + R3 * (leg.l3 * ex);
  c.a1 = Eigen::Vector3d::UnitZ();
  c.a2 = R1.col(1);
  c.a3 = c.a2;
  c.mid1 = c.o1 + R1 * (0.5 * leg.l1 * ex);
  c.mid2 = c.o2 + R2 * (0.5 * leg.l2 * ex);
  c.mid3 = c.o3 + R3 * (0.5 * leg.l3 * ex);
  const Quaternion yaw = Quaternion::from_axis_angle(Eigen::Vector3d::UnitZ(), leg.mount_yaw + th(0));
  c.r_local = yaw * Quaternion::from_axis_angle(Eigen::Vector3d::UnitY(), th(1) + th(2));
  c.r_local_knee = yaw * Quaternion::from_axis_angle(Eigen::Vector3d::UnitY(), th(1));
  return c;
}

/// 3 x n Jacobian of a torso-frame point x attached to the given leg chain
/// (or to the torso: chain = nullptr), mapping qdot to the world velocity of
/// p + r x r'. Shared by frames, primitives and the COM.
Eigen::MatrixXd point_jacobian(const RobotModel& model, const Configuration& q, int leg,
                               const LegChain* chain, const Eigen::Vector3d& x_local,
                               int n_moving_joints) {
  const int n = model.dim();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3, n);

  // Root rotation block: d/dt (r x r') = 2 Im(rdot (x r')).
  const Quaternion xr = Quaternion::pure(x_local) * q.r.conj();
  J.block<3, 4>(0, 0) = 2.0 * hamilton_right(xr).block<3, 4>(1, 0);
  // Root translation block.
  J.block<3, 3>(0, 4) = Eigen::Matrix3d::Identity();

  if (chain != nullptr && n_moving_joints > 0) {
    const Eigen::Matrix3d R = q.r.rotation_matrix();
    const int col0 = 7 + 3 * leg;
    const Eigen::Vector3d* origins[3] = {&chain->o1, &chain->o2, &chain->o3};
    const Eigen::Vector3d* axes[3] = {&chain->a1, &chain->a2, &chain->a3};
    for (int j = 0; j < n_moving_joints; ++j) {
      const Eigen::Vector3d col_local = axes[j]->cross(x_local - *origins[j]);
      J.col(col0 + j) = R * col_local;
    }
  }
  return J;
}

}  // namespace

Eigen::VectorXd Configuration::to_vector() const {
  Eigen::VectorXd v(dim());
  v.head<4>() = r.vec4();
  v.segment<3>(4) = p;
  v.tail(theta.size()) = theta;
  return v;
}

Configuration Configuration::from_vector(const Eigen::VectorXd& v) {
  Configuration q;
  q.r = Quaternion::from_vec4(v.head<4>());
  q.p = v.segment<3>(4);
  q.theta = v.tail(v.size() - 7);
  return q;
}

double RobotModel::max_leg_extension() const {
  double m = 0;
  for (const auto& leg : legs) m = std::max(m, leg.l1 + leg.l2 + leg.l3);
  return m;
}

Eigen::VectorXd RobotModel::q_min() const {
  // Quaternion coordinates are governed by the topology constraint, not by
  // box limits; buffering a +-1 box would fight the unit norm at the poles.
  Eigen::VectorXd v(dim());
  v.head<4>().setConstant(-kInf);
  v.segment<3>(4).setConstant(-100.0);
  for (int i = 0; i < n_legs(); ++i) v.segment<3>(7 + 3 * i).setConstant(legs[i].joint_min);
  return v;
}

Eigen::VectorXd RobotModel::q_max() const {
  Eigen::VectorXd v(dim());
  v.head<4>().setConstant(kInf);
  v.segment<3>(4).setConstant(100.0);
  for (int i = 0; i < n_legs(); ++i) v.segment<3>(7 + 3 * i).setConstant(legs[i].joint_max);
  return v;
}

Eigen::VectorXd RobotModel::qdot_min() const { return -qdot_max(); }

Eigen::VectorXd RobotModel::qdot_max() const {
  Eigen::VectorXd v(dim());
  v.head<7>().setConstant(v_max_pose);
  v.tail(n_theta()).setConstant(v_max_joint);
  return v;
}

bool RobotModel::within_limits(const Configuration& q, double tol) const {
  const Eigen::VectorXd v = q.to_vector(), lo = q_min(), hi = q_max();
  for (int i = 0; i < v.size(); ++i)
    if (v(i) < lo(i) - tol || v(i) > hi(i) + tol) return false;
  return true;
}

RobotModel default_hexapod() {
  RobotModel m;
  const double hx = m.torso_half.x(), hy = m.torso_half.y();
  const double deg = M_PI / 180.0;
  // Leg order: FR, MR, RR, FL, ML, RL.
  m.legs = {
      {{hx, -hy, 0.0}, -30.0 * deg},  {{0.0, -hy, 0.0}, -90.0 * deg},
      {{-hx, -hy, 0.0}, -150.0 * deg}, {{hx, hy, 0.0}, 30.0 * deg},
      {{0.0, hy, 0.0}, 90.0 * deg},    {{-hx, hy, 0.0}, 150.0 * deg},
  };
  return m;
}

DualQuaternion fkm_pose(const RobotModel& model, const Configuration& q, FrameId frame) {
  switch (frame.kind) {
    case FrameId::Torso:
      return DualQuaternion::from_pose(q.r, q.p);
    case FrameId::TorsoCorner: {
      if (frame.index < 0 || frame.index > 3) throw UnknownFrame("bad torso corner");
      const double sx = (frame.index & 1) ? -1.0 : 1.0;
      const double sy = (frame.index & 2) ? -1.0 : 1.0;
      const Eigen::Vector3d local(sx * model.torso_half.x(), sy * model.torso_half.y(), 0.0);
      return DualQuaternion::from_pose(q.r, q.p + q.r.rotate(local));
    }
    case FrameId::Foot:
    case FrameId::Knee: {
      if (frame.index < 0 || frame.index >= model.n_legs()) throw UnknownFrame("bad leg index");
      const LegChain c = leg_chain(model.legs[frame.index], q.theta.segment<3>(3 * frame.index));
      const bool foot = frame.kind == FrameId::Foot;
      return DualQuaternion::from_pose(q.r * (foot ? c.r_local : c.r_local_knee),
                                       q.p + q.r.rotate(foot ? c.foot : c.knee));
    }
  }
  throw UnknownFrame("unhandled frame kind");
}

FrameJacobians frame_jacobians(const RobotModel& model, const Configuration& q, FrameId frame) {
  const int n = model.dim();
  FrameJacobians out;
  out.J_r = Eigen::MatrixXd::Zero(4, n);

  switch (frame.kind) {
    case FrameId::Torso: {
      out.J_p = point_jacobian(model, q, -1, nullptr, Eigen::Vector3d::Zero(), 0);
      out.J_r.block<4, 4>(0, 0) = Eigen::Matrix4d::Identity();
      return out;
    }
    case FrameId::TorsoCorner: {
      if (frame.index < 0 || frame.index > 3) throw UnknownFrame("bad torso corner");
      const double sx = (frame.index & 1) ? -1.0 : 1.0;
      const double sy = (frame.index & 2) ? -1.0 : 1.0;
      const Eigen::Vector3d local(sx * model.torso_half.x(), sy * model.torso_half.y(), 0.0);
      out.J_p = point_jacobian(model, q, -1, nullptr, local, 0);
      out.J_r.block<4, 4>(0, 0) = Eigen::Matrix4d::Identity();
      return out;
    }
    case FrameId::Foot:
    case FrameId::Knee: {
      const int leg = frame.index;
      if (leg < 0 || leg >= model.n_legs()) throw UnknownFrame("bad leg index");
      const Eigen::Vector3d th = q.theta.segment<3>(3 * leg);
      const LegChain c = leg_chain(model.legs[leg], th);
      const bool foot = frame.kind == FrameId::Foot;
      out.J_p = point_jacobian(model, q, leg, &c, foot ? c.foot : c.knee, foot ? 3 : 2);

      // Orientation Jacobian: r_f = r r_l; the rdot block is right
      // multiplication by r_l, each joint contributes (1/2) r a_j r_l.
      const Quaternion r_local = foot ? c.r_local : c.r_local_knee;
      out.J_r.block<4, 4>(0, 0) = hamilton_right(r_local);
      const Eigen::Vector3d* axes[3] = {&c.a1, &c.a2, &c.a3};
      const int n_joints = foot ? 3 : 2;
      for (int j = 0; j < n_joints; ++j) {
        const Quaternion col = (q.r * Quaternion::pure(*axes[j]) * r_local) * 0.5;
        out.J_r.col(7 + 3 * leg + j) = col.vec4();
      }
      return out;
    }
  }
  throw UnknownFrame("unhandled frame kind");
}

Eigen::MatrixXd axis_direction_jacobian(const RobotModel& model, const Configuration& q,
                                        FrameId frame, const Eigen::Vector3d& axis) {
  const FrameJacobians fj = frame_jacobians(model, q, frame);
  const Quaternion r_f = fkm_pose(model, q, frame).rotation();
  // d/dt vec3(r_f axis r_f') = 2 rows_xyz(H_R(axis r_f')) vec4(rdot_f).
  const Eigen::Matrix<double, 3, 4> m =
      2.0 * hamilton_right(Quaternion::pure(axis) * r_f.conj()).block<3, 4>(1, 0);
  return m * fj.J_r;
}

ComResult com_and_jacobian(const RobotModel& model, const Configuration& q) {
  const int n = model.dim();
  const double M = model.total_mass();
  Eigen::Vector3d com_local = model.torso_mass * Eigen::Vector3d::Zero();
  Eigen::MatrixXd J_joints = Eigen::MatrixXd::Zero(3, n);  // joint columns, torso frame

  const Eigen::Matrix3d R = q.r.rotation_matrix();
  for (int leg = 0; leg < model.n_legs(); ++leg) {
    const LegChain c = leg_chain(model.legs[leg], q.theta.segment<3>(3 * leg));
    const Eigen::Vector3d* pts[3] = {&c.mid1, &c.mid2, &c.mid3};
    const Eigen::Vector3d* origins[3] = {&c.o1, &c.o2, &c.o3};
    const Eigen::Vector3d* axes[3] = {&c.a1, &c.a2, &c.a3};
    for (int link = 0; link < 3; ++link) {
      com_local += model.link_mass * (*pts[link]);
      // Link `link` moves with joints 0..link of this leg.
      for (int j = 0; j <= link; ++j) {
        J_joints.col(7 + 3 * leg + j) +=
            (model.link_mass / M) * (R * axes[j]->cross(*pts[link] - *origins[j]));
      }
    }
  }
  com_local /= M;

  ComResult out;
  out.com = q.p + q.r.rotate(com_local);
  out.J = Eigen::MatrixXd::Zero(3, n);
  const Quaternion xr = Quaternion::pure(com_local) * q.r.conj();
  out.J.block<3, 4>(0, 0) = 2.0 * hamilton_right(xr).block<3, 4>(1, 0);
  out.J.block<3, 3>(0, 4) = Eigen::Matrix3d::Identity();
  out.J += J_joints;
  return out;
}

std::vector<PlacedPrimitive> collision_bodies(const RobotModel& model, const Configuration& q) {
  std::vector<PlacedPrimitive> out;
  out.reserve(4 + 2 * model.n_legs());
  for (int c = 0; c < 4; ++c) {
    const double sx = (c & 1) ? -1.0 : 1.0;
    const double sy = (c & 2) ? -1.0 : 1.0;
    BodyPrimitive b;
    b.attachment = BodyPrimitive::TorsoBody;
    b.index = c;
    b.local = {sx * model.torso_half.x(), sy * model.torso_half.y(), 0.0};
    b.radius = model.torso_sphere_radius;
    out.push_back({b, q.p + q.r.rotate(b.local)});
  }
  for (int leg = 0; leg < model.n_legs(); ++leg) {
    const LegChain c = leg_chain(model.legs[leg], q.theta.segment<3>(3 * leg));
    BodyPrimitive knee{BodyPrimitive::LegKnee, leg, Eigen::Vector3d::Zero(), model.point_radius};
    out.push_back({knee, q.p + q.r.rotate(c.knee)});
    BodyPrimitive foot{BodyPrimitive::LegFoot, leg, Eigen::Vector3d::Zero(), model.point_radius};
    out.push_back({foot, q.p + q.r.rotate(c.foot)});
  }
  return out;
}

Eigen::MatrixXd primitive_jacobian(const RobotModel& model, const Configuration& q,
                                   const BodyPrimitive& body) {
  switch (body.attachment) {
    case BodyPrimitive::TorsoBody:
      return point_jacobian(model, q, -1, nullptr, body.local, 0);
    case BodyPrimitive::LegKnee: {
      const LegChain c = leg_chain(model.legs[body.index], q.theta.segment<3>(3 * body.index));
      return point_jacobian(model, q, body.index, &c, c.knee, 2);
    }
    case BodyPrimitive::LegFoot: {
      const LegChain c = leg_chain(model.legs[body.index], q.theta.segment<3>(3 * body.index));
      return point_jacobian(model, q, body.index, &c, c.foot, 3);
    }
  }
  throw std::logic_error("unhandled primitive attachment");
}

std::optional<Eigen::Vector3d> leg_ik(const RobotModel& model, int leg,
                                      const Configuration& root_only,
                                      const Eigen::Vector3d& foot_world, IkBranch branch) {
  const LegModel& L = model.legs[leg];
  // Target in the mount frame (after mount yaw).
  const Eigen::Vector3d in_torso = root_only.r.conj().rotate(foot_world - root_only.p) - L.mount;
  const Eigen::Vector3d f = rot_z(-L.mount_yaw) * in_torso;

  const double q1 = std::atan2(f.y(), f.x());
  const double radial = std::hypot(f.x(), f.y());
  const double u = radial - L.l1;
  const double v = -f.z();  // positive pitch bends the leg down
  const double d2 = u * u + v * v;
  const double D = (d2 - L.l2 * L.l2 - L.l3 * L.l3) / (2.0 * L.l2 * L.l3);
  if (D > 1.0 - 1e-12 || D < -1.0 + 1e-12) {
    if (std::abs(D) > 1.0) return std::nullopt;
  }
  const double sign = branch == IkBranch::KneeUp ? 1.0 : -1.0;
  const double q3 = std::atan2(sign * std::sqrt(std::max(0.0, 1.0 - D * D)), D);
  const double q2 = std::atan2(v, u) - std::atan2(L.l3 * std::sin(q3), L.l2 + L.l3 * std::cos(q3));

  const Eigen::Vector3d th(q1, q2, q3);
  for (int i = 0; i < 3; ++i)
    if (th(i) < L.joint_min || th(i) > L.joint_max) return std::nullopt;
  return th;
}

}  // namespace rhcp
