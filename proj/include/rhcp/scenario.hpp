#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rhcp/environment.hpp"
#include "rhcp/guide_field.hpp"
#include "rhcp/integrator.hpp"
#include "rhcp/kinematics.hpp"
#include "rhcp/support_region.hpp"

namespace rhcp {

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct PgParams {
  double eta_o = 2.0;
  double eta_d = 2.0;
  // Damping below ~2 b_d keeps the squared-distance tasks from stalling
  // right at the stage exit thresholds.
  double lambda = 2e-3;
  double beta = 1e2;
  double b_d = 0.005;
  double r_slip = 0.005;
  double d_safe = 0.02;          // collision clearance
  double d_safe_balance = 0.01;  // margin inside the support region
  double d_safe_cross = 0.03;    // limb-crossing clearance
  double d_safe_tilt = 2.0 * (1.0 - std::cos(20.0 * M_PI / 180.0));  // squared chordal
  double row_horizon = 0.08;     // rows farther than this from their boundary are skipped
  int max_iters = 500;
  double u_zero_tol = 1e-4;
  double max_step = kInf;  // cap on new-contact travel from its previous position
};

struct PlannerParams {
  int horizon = 2;  // kappa_max
  double d_min = 0.02;
  int gamma = 3;
  double time_limit_s = 7200.0;
  int workers = 1;
  double reach_factor = 1.2;
  unsigned long long seed = 0;
  std::vector<int> gait;  // optional fixed cyclic patch order
};

struct Scenario {
  int schema_version = 1;
  std::string name = "scenario";
  RobotModel robot;
  std::vector<Obstacle> obstacles;
  std::vector<ContactArea> areas;
  std::vector<Configuration> guide_waypoints;
  Configuration start_config;
  Stance start_stance;
  Stance goal_stance;
  PlannerParams planner;
  PgParams pg;
  StepParams step;
  FieldParams field;
  BalanceParams balance;

  void validate() const;  // structural invariants only (fast)
};

/// Everything the posture generator and planner read; immutable during a run.
struct World {
  RobotModel robot;
  std::vector<Obstacle> obstacles;
  std::vector<ContactArea> areas;
  BalanceParams balance;
  PgParams pg;
  StepParams step;
  FieldParams field;
  GuidePath guide;
  Stance goal_stance;
  Eigen::Vector3d goal_mean = Eigen::Vector3d::Zero();

  Eigen::Vector3d contact_position(const Contact& c) const { return areas[c.area].point_at(c.uv); }
  ContactSpec contact_spec(const Contact& c) const;
};

World make_world(const Scenario& scenario);

// ---- scenario_io ----

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);
std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);

/// Desk-scale renditions of the four study environments.
std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name, unsigned long long seed = 0);

}  // namespace rhcp
