#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rhcp/kinematics.hpp"
#include "rhcp/qp.hpp"

namespace rhcp {

struct StepParams {
  double tau_max = 0.10;
  double tau_min = 0.01;
  double delta_tau = 0.01;
};

struct DriftParams {
  // The squared-distance task gradient vanishes near the target, so the drift
  // loop runs stiffer than the stage controllers (eta_o tau < 1 for stability).
  double eta_o = 8.0;
  double lambda = 1e-2;
  double eta_d = 2.0;
  double b_d = 0.005;
  double r_slip = 0.005;
  // Correct down to this fraction of r_slip so the next steps start with
  // headroom instead of hugging the tolerance boundary.
  double target_factor = 0.5;
  double tau = 0.10;
  int max_iters = 50;
};

struct FixedTarget {
  int patch = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double weight = 1.0;
};

/// One exponential-map integration step:
///   x(t+tau) = exp(tau xdot x*) x(t), theta(t+tau) = theta + tau thetadot.
/// The root quaternion is renormalized after composition.
Configuration integrate(const Configuration& q, const Eigen::VectorXd& qdot, double tau);

/// Box bounds on qdot combining the configuration-limit rows
/// eta (q_min - q + b) <= qdot <= eta (q_max - q - b) with the velocity bounds.
void qdot_box(const RobotModel& model, const Configuration& q, double eta_d, double b_d,
              Eigen::VectorXd& lb, Eigen::VectorXd& ub);

/// Secondary controller pulling fixed feet back to their targets; stops when
/// all squared drifts are at most r_slip^2. nullopt when uncorrectable.
std::optional<Configuration> correct_drift(const RobotModel& model, const Configuration& q,
                                           const std::vector<FixedTarget>& fixed,
                                           const DriftParams& params);

struct StepResult {
  Configuration q;
  double tau_used = 0.0;
};

/// Integrate with tau = tau_max, correct drift, test validity; on failure
/// decrement tau by delta_tau and retry down to tau_min.
std::optional<StepResult> step_with_backoff(const RobotModel& model, const Configuration& q,
                                            const Eigen::VectorXd& qdot,
                                            const std::vector<FixedTarget>& fixed,
                                            const std::function<bool(const Configuration&)>& valid,
                                            const StepParams& step, const DriftParams& drift);

}  // namespace rhcp
