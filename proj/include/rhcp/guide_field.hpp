#pragma once

#include <vector>

#include "rhcp/environment.hpp"
#include "rhcp/kinematics.hpp"
#include "rhcp/vfi.hpp"

namespace rhcp {

struct TooFewWaypoints : std::invalid_argument {
  TooFewWaypoints() : std::invalid_argument("guide path needs at least 2 waypoints") {}
};
struct WrongPatchCount : std::invalid_argument {
  WrongPatchCount() : std::invalid_argument("near/mid/far allocation is defined for 6 patches") {}
};

struct FieldParams {
  double alpha = 1.0;     // weight of the plane + lump terms
  double b_offset = 0.5;  // near/far weighting offset, in [0, 1)
};

/// Per-patch workspace polyline induced by the waypoint configurations.
struct PatchPath {
  std::vector<Eigen::Vector3d> waypoints;
  struct Segment {
    Eigen::Vector3d a, b;
    Line line;
    Plane plane;        // at b, normal -direction
    double lump_after;  // sum of squared segment lengths past this segment
  };
  std::vector<Segment> segments;  // coincident-waypoint segments are dropped
};

struct GuidePath {
  std::vector<Configuration> configs;
  std::vector<PatchPath> patches;  // one per contact patch (foot)

  int n_waypoints() const { return static_cast<int>(configs.size()); }
};

GuidePath build_path(const RobotModel& model, const std::vector<Configuration>& waypoints);

/// Index of the finite segment closest to p; ties resolved by the lower
/// resulting sub-field value, then the larger index.
int closest_segment(const GuidePath& path, const FieldParams& params, int patch,
                    const Eigen::Vector3d& p);

/// Sub-field value at a bare workspace point.
double subfield_value(const GuidePath& path, const FieldParams& params, int patch,
                      const Eigen::Vector3d& p);

/// Sub-field value and its row Jacobian (differentiating the line and plane
/// terms only; the lump term is constant for a fixed closest segment).
DistanceResult patch_subfield(const GuidePath& path, const FieldParams& params, int patch,
                              const Eigen::Vector3d& p, const Eigen::MatrixXd& J_p);

enum class PatchSet { Near, Mid, Far };

/// Hexapod allocation: nearest two patches to the goal-stance mean are Near,
/// farthest two Far, the rest Mid; ties by ascending patch index.
std::vector<PatchSet> assign_patch_sets(const RobotModel& model, const Configuration& q,
                                        const Eigen::Vector3d& goal_mean);

double patch_weight(PatchSet set, const FieldParams& params);

/// Weighted total field sum beta_i U_i; with b_offset = 0 this is the plain sum.
double total_field(const GuidePath& path, const FieldParams& params, const RobotModel& model,
                   const Configuration& q, const Eigen::Vector3d& goal_mean);

std::vector<double> subfield_values(const GuidePath& path, const FieldParams& params,
                                    const RobotModel& model, const Configuration& q);

/// Mean world position of a stance's contacts.
Eigen::Vector3d stance_mean_position(const Stance& stance, const std::vector<ContactArea>& areas);

/// Root orientation of the waypoint whose root position is nearest to q's.
Quaternion nearest_waypoint_orientation(const GuidePath& path, const Configuration& q);

}  // namespace rhcp
