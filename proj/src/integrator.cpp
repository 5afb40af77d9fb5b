#include "rhcp/integrator.hpp"

#include "rhcp/vfi.hpp"

namespace rhcp {

Configuration integrate(const Configuration& q, const Eigen::VectorXd& qdot, double tau) {
  const Quaternion rdot = Quaternion::from_vec4(qdot.head<4>());
  const Quaternion pdot = Quaternion::pure(qdot.segment<3>(4));

  const DualQuaternion x = DualQuaternion::from_pose(q.r, q.p);
  const DualQuaternion xdot{rdot, (pdot * q.r + Quaternion::pure(q.p) * rdot) * 0.5};
  DualQuaternion xi = (xdot * x.conj()) * tau;
  // The topology row keeps r' r orthogonal, so the real parts are solver
  // noise; exp expects a pure dual quaternion.
  xi.primary.w = 0.0;
  xi.dual.w = 0.0;

  const DualQuaternion x_next = exp_unit(xi) * x;
  Configuration out;
  out.r = x_next.primary.normalized();
  out.p = x_next.translation();
  out.theta = q.theta + tau * qdot.tail(q.theta.size());
  return out;
}

void qdot_box(const RobotModel& model, const Configuration& q, double eta_d, double b_d,
              Eigen::VectorXd& lb, Eigen::VectorXd& ub) {
  const Eigen::VectorXd v = q.to_vector();
  const Eigen::VectorXd w_min = eta_d * (model.q_min() - v).array() + eta_d * b_d;
  const Eigen::VectorXd w_max = eta_d * (model.q_max() - v).array() - eta_d * b_d;
  lb = w_min.cwiseMax(model.qdot_min());
  ub = w_max.cwiseMin(model.qdot_max());
  // Guard against inverted boxes when q sits inside both margins.
  for (int i = 0; i < lb.size(); ++i)
    if (lb(i) > ub(i)) lb(i) = ub(i) = 0.5 * (lb(i) + ub(i));
}

std::optional<Configuration> correct_drift(const RobotModel& model, const Configuration& q,
                                           const std::vector<FixedTarget>& fixed,
                                           const DriftParams& params) {
  Configuration cur = q;
  if (fixed.empty()) return cur;
  const int n = model.dim();
  const double r2 = params.r_slip * params.r_slip;
  const double target2 = r2 * params.target_factor * params.target_factor;

  // Hysteresis: engage only past r_slip, then correct down to the tighter
  // target so subsequent steps start with headroom.
  bool engaged = false;
  for (int iter = 0; iter < params.max_iters; ++iter) {
    Eigen::MatrixXd J_drift(fixed.size(), n);
    Eigen::VectorXd D(fixed.size());
    bool compliant = true;
    for (size_t i = 0; i < fixed.size(); ++i) {
      const FrameJacobians fj = frame_jacobians(model, cur, FrameId::foot(fixed[i].patch));
      const Eigen::Vector3d p = fkm_position(model, cur, FrameId::foot(fixed[i].patch));
      const auto d = dist_point_point_sq(p, fj.J_p, fixed[i].position);
      J_drift.row(i) = fixed[i].weight * d.J;
      D(i) = fixed[i].weight * d.value;
      if (d.value > (engaged ? target2 : r2)) compliant = false;
    }
    if (compliant) return cur;
    engaged = true;

    QpProblem qp;
    qp.H = 2.0 * (J_drift.transpose() * J_drift +
                  params.lambda * params.lambda * Eigen::MatrixXd::Identity(n, n));
    qp.g = 2.0 * params.eta_o * J_drift.transpose() * D;
    qp.A.resize(0, n);
    qp.b.resize(0);
    qp.C = Eigen::MatrixXd::Zero(1, n);
    qp.C.block<1, 4>(0, 0) = cur.r.vec4().transpose();
    qp.d = Eigen::VectorXd::Zero(1);
    qdot_box(model, cur, params.eta_d, params.b_d, qp.lb, qp.ub);
    const QpResult r = solve_qp(qp);
    if (!r.ok()) return std::nullopt;
    cur = integrate(cur, r.u, params.tau);
  }

  for (const auto& f : fixed) {
    const Eigen::Vector3d p = fkm_position(model, cur, FrameId::foot(f.patch));
    if ((p - f.position).squaredNorm() > r2) return std::nullopt;
  }
  return cur;
}

std::optional<StepResult> step_with_backoff(const RobotModel& model, const Configuration& q,
                                            const Eigen::VectorXd& qdot,
                                            const std::vector<FixedTarget>& fixed,
                                            const std::function<bool(const Configuration&)>& valid,
                                            const StepParams& step, const DriftParams& drift) {
  double tau = step.tau_max;
  while (true) {
    const Configuration candidate = integrate(q, qdot, tau);
    const auto corrected = correct_drift(model, candidate, fixed, drift);
    if (corrected && valid(*corrected)) return StepResult{*corrected, tau};
    if (tau <= step.tau_min + 1e-12) return std::nullopt;
    tau = std::max(step.tau_min, tau - step.delta_tau);
  }
}

}  // namespace rhcp
