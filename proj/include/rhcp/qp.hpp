#pragma once

#include <Eigen/Dense>

#include "rhcp/dq.hpp"

namespace rhcp {

/// Strictly convex QP:
///   min 1/2 u^T H u + g^T u
///   s.t. A u <= b,  C u = d,  lb <= u <= ub.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd C;
  Eigen::VectorXd d;
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIterations, NotPositiveDefinite };

struct QpResult {
  SolveStatus status = SolveStatus::Optimal;
  Eigen::VectorXd u;
  double objective = 0.0;

  bool ok() const { return status == SolveStatus::Optimal; }
};

/// Dual active-set solve; KKT residuals (stationarity, primal feasibility,
/// complementarity) below tol on success.
QpResult solve_qp(const QpProblem& p, double tol = 1e-8);

struct LpResult {
  SolveStatus status = SolveStatus::Optimal;
  Eigen::VectorXd x;
  double objective = 0.0;

  bool ok() const { return status == SolveStatus::Optimal; }
};

/// Two-phase dense simplex, minimize c^T x subject to
/// A_ub x <= b_ub, A_eq x = b_eq, lb <= x <= ub. Bounds may be +-inf.
LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& A_ub,
                  const Eigen::VectorXd& b_ub, const Eigen::MatrixXd& A_eq,
                  const Eigen::VectorXd& b_eq, const Eigen::VectorXd& lb,
                  const Eigen::VectorXd& ub);

}  // namespace rhcp
