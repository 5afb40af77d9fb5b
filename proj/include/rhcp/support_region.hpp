#pragma once

#include <optional>
#include <vector>

#include "rhcp/dq.hpp"
#include "rhcp/qp.hpp"

namespace rhcp {

struct SolverFailure : std::runtime_error {
  explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};
struct DegenerateRegion : std::runtime_error {
  DegenerateRegion() : std::runtime_error("support region has fewer than 3 vertices") {}
};

/// One point contact for the balance problem.
struct ContactSpec {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double mu = 0.5;
  int pyramid_sides = 4;
};

struct BalanceParams {
  Eigen::Vector3d f_min = {-50.0, -50.0, 0.0};
  Eigen::Vector3d f_max = {50.0, 50.0, 50.0};
  double eps_area = 1e-4;  // m^2, expansion stopping threshold
  double gravity = 9.81;
};

/// Convex cross-section of statically balanced COM (x, y) positions.
/// vertices are CCW; empty when no balanced COM exists, a single point for
/// degenerate (e.g. single-contact) cases.
struct SupportRegion {
  std::vector<Eigen::Vector2d> vertices;

  bool empty() const { return vertices.empty(); }
  bool degenerate() const { return vertices.size() < 3; }
  double area() const;
  Eigen::Vector2d centroid() const;
  bool contains(const Eigen::Vector2d& p, double tol = 1e-9) const;
  /// Signed distance to the polygon boundary (< 0 inside). Degenerate regions
  /// measure distance to the point/segment.
  double signed_distance(const Eigen::Vector2d& p) const;
};

struct WrenchCertificate {
  bool feasible = false;
  std::vector<Eigen::Vector3d> forces;
};

/// True iff contact forces exist, each inside its friction pyramid and the
/// force box, with zero net force and moment for a COM above com_xy.
WrenchCertificate wrench_feasible(const std::vector<ContactSpec>& contacts,
                                  const Eigen::Vector2d& com_xy, double mass,
                                  const BalanceParams& params);

/// Inner approximation by directional-support expansion: repeatedly maximize
/// a . com_xy over the feasible set and refine the edge with the largest
/// possible area gain until it drops below eps_area.
SupportRegion compute_region(const std::vector<ContactSpec>& contacts, double mass,
                             const BalanceParams& params);

/// One vertical plane per CCW edge, outward normals; interior points have
/// negative signed distance to every plane.
std::vector<Plane> region_planes(const SupportRegion& region);

/// Vertical line through the polygon's area centroid.
Line centroid_line(const SupportRegion& region);

/// Orthonormal tangent basis for a unit normal, deterministic.
void tangent_basis(const Eigen::Vector3d& n, Eigen::Vector3d& t1, Eigen::Vector3d& t2);

}  // namespace rhcp
