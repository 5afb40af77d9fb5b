#include <fstream>
#include <json.hpp>
#include <random>

#include "rhcp/posture_gen.hpp"
#include "rhcp/scenario.hpp"

namespace rhcp {
namespace {

using nlohmann::json;

json vec_to_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }
json vec2_to_json(const Eigen::Vector2d& v) { return json::array({v.x(), v.y()}); }

Eigen::Vector3d vec_from_json(const json& j) {
  return Eigen::Vector3d(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}
Eigen::Vector2d vec2_from_json(const json& j) {
  return Eigen::Vector2d(j.at(0).get<double>(), j.at(1).get<double>());
}

json config_to_json(const Configuration& q) {
  json j;
  j["r"] = json::array({q.r.w, q.r.x, q.r.y, q.r.z});
  j["p"] = vec_to_json(q.p);
  j["theta"] = std::vector<double>(q.theta.data(), q.theta.data() + q.theta.size());
  return j;
}

Configuration config_from_json(const json& j) {
  Configuration q;
  q.r = Quaternion{j.at("r").at(0), j.at("r").at(1), j.at("r").at(2), j.at("r").at(3)};
  q.p = vec_from_json(j.at("p"));
  const auto& th = j.at("theta");
  q.theta.resize(th.size());
  for (size_t i = 0; i < th.size(); ++i) q.theta(i) = th.at(i);
  return q;
}

json stance_to_json(const Stance& s) {
  json arr = json::array();
  for (const auto& c : s.contacts) {
    json jc;
    jc["patch"] = c.patch;
    jc["area"] = c.area;
    jc["uv"] = vec2_to_json(c.uv);
    arr.push_back(jc);
  }
  return arr;
}

Stance stance_from_json(const json& j) {
  Stance s;
  for (const auto& jc : j) s.set({jc.at("patch"), jc.at("area"), vec2_from_json(jc.at("uv"))});
  return s;
}

}  // namespace

void Scenario::validate() const {
  if (robot.legs.empty()) throw ValidationError("robot has no legs");
  for (const auto& leg : robot.legs) {
    if (leg.l1 <= 0 || leg.l2 <= 0 || leg.l3 <= 0) throw ValidationError("link lengths must be positive");
    if (leg.joint_min >= leg.joint_max) throw ValidationError("joint limits inverted");
  }
  if (robot.torso_mass <= 0 || robot.link_mass < 0) throw ValidationError("masses must be positive");
  for (const auto& o : obstacles) o.validate();
  for (const auto& a : areas) {
    a.validate();
    if (a.id < 0 || a.id >= static_cast<int>(areas.size()))
      throw ValidationError("area ids must index the area list");
  }
  if (guide_waypoints.size() < 2) throw ValidationError("guide path needs at least 2 waypoints");
  auto check_stance = [&](const Stance& s, const char* which) {
    for (const auto& c : s.contacts) {
      if (c.patch < 0 || c.patch >= robot.n_legs()) throw ValidationError(std::string(which) + ": bad patch");
      if (c.area < 0 || c.area >= static_cast<int>(areas.size()))
        throw ValidationError(std::string(which) + ": bad area");
      const auto& half = areas[c.area].half_extents;
      if (std::abs(c.uv.x()) > half.x() + 1e-9 || std::abs(c.uv.y()) > half.y() + 1e-9)
        throw ValidationError(std::string(which) + ": contact outside its area");
    }
  };
  check_stance(start_stance, "start stance");
  check_stance(goal_stance, "goal stance");
  if (static_cast<int>(start_config.theta.size()) != robot.n_theta())
    throw ValidationError("start configuration has the wrong joint count");
  if (std::abs(start_config.r.norm() - 1.0) > 1e-9)
    throw ValidationError("start root quaternion is not unit");
}

World make_world(const Scenario& scenario) {
  World w;
  w.robot = scenario.robot;
  w.obstacles = scenario.obstacles;
  w.areas = scenario.areas;
  w.balance = scenario.balance;
  w.pg = scenario.pg;
  w.step = scenario.step;
  w.field = scenario.field;
  w.guide = build_path(scenario.robot, scenario.guide_waypoints);
  w.goal_stance = scenario.goal_stance;
  w.goal_mean = stance_mean_position(scenario.goal_stance, scenario.areas);
  return w;
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["schema_version"] = s.schema_version;
  j["name"] = s.name;

  json robot;
  robot["torso_half"] = vec_to_json(s.robot.torso_half);
  robot["torso_mass"] = s.robot.torso_mass;
  robot["link_mass"] = s.robot.link_mass;
  robot["torso_sphere_radius"] = s.robot.torso_sphere_radius;
  robot["point_radius"] = s.robot.point_radius;
  robot["v_max_pose"] = s.robot.v_max_pose;
  robot["v_max_joint"] = s.robot.v_max_joint;
  robot["legs"] = json::array();
  for (const auto& leg : s.robot.legs) {
    json jl;
    jl["mount"] = vec_to_json(leg.mount);
    jl["mount_yaw"] = leg.mount_yaw;
    jl["l1"] = leg.l1;
    jl["l2"] = leg.l2;
    jl["l3"] = leg.l3;
    jl["joint_min"] = leg.joint_min;
    jl["joint_max"] = leg.joint_max;
    robot["legs"].push_back(jl);
  }
  j["robot"] = robot;

  j["obstacles"] = json::array();
  for (const auto& o : s.obstacles) {
    json jo;
    jo["id"] = o.id;
    jo["faces"] = json::array();
    for (const auto& f : o.faces) {
      json jf;
      jf["normal"] = vec_to_json(f.normal3());
      jf["offset"] = f.offset;
      jo["faces"].push_back(jf);
    }
    jo["vertices"] = json::array();
    for (const auto& v : o.vertices) jo["vertices"].push_back(vec_to_json(v));
    j["obstacles"].push_back(jo);
  }

  j["areas"] = json::array();
  for (const auto& a : s.areas) {
    json ja;
    ja["id"] = a.id;
    ja["center"] = vec_to_json(a.centroid);
    ja["normal"] = vec_to_json(a.plane.normal3());
    ja["tangent"] = vec_to_json(a.t1);
    ja["half_extents"] = vec2_to_json(a.half_extents);
    ja["mu"] = a.mu;
    ja["pyramid_sides"] = a.pyramid_sides;
    ja["obstacle"] = a.obstacle_id;
    j["areas"].push_back(ja);
  }

  j["guide_waypoints"] = json::array();
  for (const auto& q : s.guide_waypoints) j["guide_waypoints"].push_back(config_to_json(q));
  j["start"]["config"] = config_to_json(s.start_config);
  j["start"]["stance"] = stance_to_json(s.start_stance);
  j["goal_stance"] = stance_to_json(s.goal_stance);

  json planner;
  planner["horizon"] = s.planner.horizon;
  planner["d_min"] = s.planner.d_min;
  planner["gamma"] = s.planner.gamma;
  planner["time_limit_s"] = s.planner.time_limit_s;
  planner["workers"] = s.planner.workers;
  planner["reach_factor"] = s.planner.reach_factor;
  planner["seed"] = s.planner.seed;
  planner["gait"] = s.planner.gait;
  j["planner"] = planner;

  json pg;
  pg["eta_o"] = s.pg.eta_o;
  pg["eta_d"] = s.pg.eta_d;
  pg["lambda"] = s.pg.lambda;
  pg["beta"] = s.pg.beta;
  pg["b_d"] = s.pg.b_d;
  pg["r_slip"] = s.pg.r_slip;
  pg["d_safe"] = s.pg.d_safe;
  pg["d_safe_balance"] = s.pg.d_safe_balance;
  pg["d_safe_cross"] = s.pg.d_safe_cross;
  pg["d_safe_tilt"] = s.pg.d_safe_tilt;
  pg["row_horizon"] = s.pg.row_horizon;
  pg["max_iters"] = s.pg.max_iters;
  pg["u_zero_tol"] = s.pg.u_zero_tol;
  if (s.pg.max_step < kInf)
    pg["max_step"] = s.pg.max_step;
  else
    pg["max_step"] = nullptr;
  j["pg"] = pg;

  j["step"]["tau_max"] = s.step.tau_max;
  j["step"]["tau_min"] = s.step.tau_min;
  j["step"]["delta_tau"] = s.step.delta_tau;
  j["field"]["alpha"] = s.field.alpha;
  j["field"]["b_offset"] = s.field.b_offset;
  j["balance"]["f_min"] = vec_to_json(s.balance.f_min);
  j["balance"]["f_max"] = vec_to_json(s.balance.f_max);
  j["balance"]["eps_area"] = s.balance.eps_area;
  j["balance"]["gravity"] = s.balance.gravity;
  return j.dump(2);
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  try {
    Scenario s;
    s.schema_version = j.value("schema_version", 1);
    s.name = j.value("name", "scenario");

    s.robot = default_hexapod();
    if (j.contains("robot")) {
      const json& r = j["robot"];
      if (r.contains("torso_half")) s.robot.torso_half = vec_from_json(r["torso_half"]);
      s.robot.torso_mass = r.value("torso_mass", s.robot.torso_mass);
      s.robot.link_mass = r.value("link_mass", s.robot.link_mass);
      s.robot.torso_sphere_radius = r.value("torso_sphere_radius", s.robot.torso_sphere_radius);
      s.robot.point_radius = r.value("point_radius", s.robot.point_radius);
      s.robot.v_max_pose = r.value("v_max_pose", s.robot.v_max_pose);
      s.robot.v_max_joint = r.value("v_max_joint", s.robot.v_max_joint);
      if (r.contains("legs")) {
        s.robot.legs.clear();
        for (const auto& jl : r["legs"]) {
          LegModel leg;
          leg.mount = vec_from_json(jl.at("mount"));
          leg.mount_yaw = jl.at("mount_yaw");
          leg.l1 = jl.value("l1", leg.l1);
          leg.l2 = jl.value("l2", leg.l2);
          leg.l3 = jl.value("l3", leg.l3);
          leg.joint_min = jl.value("joint_min", leg.joint_min);
          leg.joint_max = jl.value("joint_max", leg.joint_max);
          s.robot.legs.push_back(leg);
        }
      }
    }

    for (const auto& jo : j.value("obstacles", json::array())) {
      Obstacle o;
      o.id = jo.at("id");
      for (const auto& jf : jo.at("faces")) {
        o.faces.push_back(
            Plane{Quaternion::pure(vec_from_json(jf.at("normal")).normalized()), jf.at("offset")});
      }
      for (const auto& jv : jo.at("vertices")) o.vertices.push_back(vec_from_json(jv));
      s.obstacles.push_back(o);
    }

    for (const auto& ja : j.value("areas", json::array())) {
      s.areas.push_back(ContactArea::rectangle(
          ja.at("id"), vec_from_json(ja.at("center")), vec_from_json(ja.at("normal")),
          vec_from_json(ja.at("tangent")), vec2_from_json(ja.at("half_extents")),
          ja.value("mu", 0.5), ja.value("obstacle", -1)));
      s.areas.back().pyramid_sides = ja.value("pyramid_sides", 4);
    }

    for (const auto& jq : j.value("guide_waypoints", json::array()))
      s.guide_waypoints.push_back(config_from_json(jq));
    if (j.contains("start")) {
      s.start_config = config_from_json(j["start"].at("config"));
      s.start_stance = stance_from_json(j["start"].at("stance"));
    }
    if (j.contains("goal_stance")) s.goal_stance = stance_from_json(j["goal_stance"]);

    if (j.contains("planner")) {
      const json& p = j["planner"];
      s.planner.horizon = p.value("horizon", s.planner.horizon);
      s.planner.d_min = p.value("d_min", s.planner.d_min);
      s.planner.gamma = p.value("gamma", s.planner.gamma);
      s.planner.time_limit_s = p.value("time_limit_s", s.planner.time_limit_s);
      s.planner.workers = p.value("workers", s.planner.workers);
      s.planner.reach_factor = p.value("reach_factor", s.planner.reach_factor);
      s.planner.seed = p.value("seed", s.planner.seed);
      s.planner.gait = p.value("gait", s.planner.gait);
    }
    if (j.contains("pg")) {
      const json& p = j["pg"];
      s.pg.eta_o = p.value("eta_o", s.pg.eta_o);
      s.pg.eta_d = p.value("eta_d", s.pg.eta_d);
      s.pg.lambda = p.value("lambda", s.pg.lambda);
      s.pg.beta = p.value("beta", s.pg.beta);
      s.pg.b_d = p.value("b_d", s.pg.b_d);
      s.pg.r_slip = p.value("r_slip", s.pg.r_slip);
      s.pg.d_safe = p.value("d_safe", s.pg.d_safe);
      s.pg.d_safe_balance = p.value("d_safe_balance", s.pg.d_safe_balance);
      s.pg.d_safe_cross = p.value("d_safe_cross", s.pg.d_safe_cross);
      s.pg.d_safe_tilt = p.value("d_safe_tilt", s.pg.d_safe_tilt);
      s.pg.row_horizon = p.value("row_horizon", s.pg.row_horizon);
      s.pg.max_iters = p.value("max_iters", s.pg.max_iters);
      s.pg.u_zero_tol = p.value("u_zero_tol", s.pg.u_zero_tol);
      if (p.contains("max_step") && !p["max_step"].is_null()) s.pg.max_step = p["max_step"];
    }
    if (j.contains("step")) {
      s.step.tau_max = j["step"].value("tau_max", s.step.tau_max);
      s.step.tau_min = j["step"].value("tau_min", s.step.tau_min);
      s.step.delta_tau = j["step"].value("delta_tau", s.step.delta_tau);
    }
    if (j.contains("field")) {
      s.field.alpha = j["field"].value("alpha", s.field.alpha);
      s.field.b_offset = j["field"].value("b_offset", s.field.b_offset);
    }
    if (j.contains("balance")) {
      const json& b = j["balance"];
      if (b.contains("f_min")) s.balance.f_min = vec_from_json(b["f_min"]);
      if (b.contains("f_max")) s.balance.f_max = vec_from_json(b["f_max"]);
      s.balance.eps_area = b.value("eps_area", s.balance.eps_area);
      s.balance.gravity = b.value("gravity", s.balance.gravity);
    }

    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return scenario_from_json(text);
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file: " + path);
  out << scenario_to_json(s);
  if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Built-in scenarios
// ---------------------------------------------------------------------------

namespace {

Configuration nominal_pose(const RobotModel& robot, const Eigen::Vector3d& root) {
  Configuration q;
  q.p = root;
  q.theta = Eigen::VectorXd::Zero(robot.n_theta());
  for (int leg = 0; leg < robot.n_legs(); ++leg) {
    q.theta(3 * leg + 1) = 0.5;
    q.theta(3 * leg + 2) = 1.0;
  }
  return q;
}

/// IK the legs onto the stance contacts; wall contacts take the knee-down
/// branch so the knee tucks inboard. Returns nullopt when out of reach.
std::optional<Configuration> pose_for_stance(const RobotModel& robot,
                                             const std::vector<ContactArea>& areas,
                                             const Stance& stance, const Configuration& root_pose) {
  Configuration q = root_pose;
  for (const auto& c : stance.contacts) {
    const bool wall = std::abs(areas[c.area].plane.normal3().z()) < 0.5;
    const auto th = leg_ik(robot, c.patch, root_pose, areas[c.area].point_at(c.uv),
                           wall ? IkBranch::KneeDown : IkBranch::KneeUp);
    if (!th) return std::nullopt;
    q.theta.segment<3>(3 * c.patch) = *th;
  }
  return q;
}

/// Seeded start perturbation: +-2 cm contact positions (clamped to the area),
/// +-1 cm root xy; legs re-IKed, so joints shift by a few hundredths of a rad.
void perturb_start(Scenario& s, unsigned long long seed) {
  if (seed == 0) return;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d2(-0.02, 0.02), d1(-0.01, 0.01);
  for (double scale : {1.0, 0.5, 0.25, 0.0}) {
    Stance stance = s.start_stance;
    for (auto& c : stance.contacts) {
      const auto& half = s.areas[c.area].half_extents;
      c.uv.x() = std::clamp(c.uv.x() + scale * d2(rng), -half.x(), half.x());
      c.uv.y() = std::clamp(c.uv.y() + scale * d2(rng), -half.y(), half.y());
    }
    Configuration root = s.start_config;
    root.p.x() += scale * d1(rng);
    root.p.y() += scale * d1(rng);
    const auto q = pose_for_stance(s.robot, s.areas, stance, root);
    if (q) {
      s.start_stance = stance;
      s.start_config = *q;
      return;
    }
  }
}

/// Straight-line guide: nominal poses from start root to goal root.
std::vector<Configuration> straight_guide(const RobotModel& robot, const Eigen::Vector3d& from,
                                          const Eigen::Vector3d& to, int count) {
  std::vector<Configuration> wps;
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / (count - 1);
    wps.push_back(nominal_pose(robot, from + t * (to - from)));
  }
  return wps;
}

/// Contacts under the nominal pose's feet, projected onto the given area, so
/// the guide field's terminal waypoints and the stance coincide.
Stance stance_from_pose(const RobotModel& robot, int area, const std::vector<ContactArea>& areas,
                        const Configuration& pose) {
  Stance s;
  for (int leg = 0; leg < robot.n_legs(); ++leg) {
    const Eigen::Vector3d p = fkm_position(robot, pose, FrameId::foot(leg));
    s.set({leg, area, areas[area].uv_of(p)});
  }
  return s;
}

Scenario corridor_scenario() {
  Scenario s;
  s.name = "corridor";
  s.robot = default_hexapod();
  s.obstacles.push_back(Obstacle::box(0, {0.5, 0.0, -0.05}, {2.6, 0.9, 0.1}));
  s.areas.push_back(ContactArea::rectangle(0, {0.5, 0.0, 0.0}, Eigen::Vector3d::UnitZ(),
                                           Eigen::Vector3d::UnitX(), {1.25, 0.42}, 0.8, 0));

  const Eigen::Vector3d root0(0.0, 0.0, 0.24);
  s.start_stance = stance_from_pose(s.robot, 0, s.areas, nominal_pose(s.robot, root0));
  s.goal_stance = stance_from_pose(s.robot, 0, s.areas,
                                   nominal_pose(s.robot, root0 + Eigen::Vector3d(1, 0, 0)));
  s.start_config = *pose_for_stance(s.robot, s.areas, s.start_stance, nominal_pose(s.robot, root0));
  s.guide_waypoints = straight_guide(s.robot, root0, root0 + Eigen::Vector3d(1, 0, 0), 3);

  s.planner.horizon = 1;
  s.planner.d_min = 0.05;
  s.planner.gait = {2, 5, 1, 4, 0, 3};  // rear to front, alternating sides
  s.pg.max_step = 0.10;
  s.pg.max_iters = 200;
  return s;
}

Scenario stepping_stones_scenario() {
  Scenario s;
  s.name = "stepping-stones";
  s.robot = default_hexapod();
  // Start platform, two stones over the gap, a decoy stone, goal platform.
  s.obstacles.push_back(Obstacle::box(0, {-0.10, 0.0, -0.05}, {0.76, 0.9, 0.1}));
  s.obstacles.push_back(Obstacle::box(1, {0.42, -0.18, -0.05}, {0.16, 0.16, 0.1}));
  s.obstacles.push_back(Obstacle::box(2, {0.42, 0.18, -0.05}, {0.16, 0.16, 0.1}));
  s.obstacles.push_back(Obstacle::box(3, {0.38, 0.0, -0.05}, {0.12, 0.12, 0.1}));
  s.obstacles.push_back(Obstacle::box(4, {0.95, 0.0, -0.05}, {0.76, 0.9, 0.1}));

  s.areas.push_back(ContactArea::rectangle(0, {-0.10, 0.0, 0.0}, Eigen::Vector3d::UnitZ(),
                                           Eigen::Vector3d::UnitX(), {0.36, 0.42}, 0.8, 0));
  s.areas.push_back(ContactArea::rectangle(1, {0.42, -0.18, 0.0}, Eigen::Vector3d::UnitZ(),
                                           Eigen::Vector3d::UnitX(), {0.07, 0.07}, 0.8, 1));
  s.areas.push_back(ContactArea::rectangle(2, {0.42, 0.18, 0.0}, Eigen::Vector3d::UnitZ(),
                                           Eigen::Vector3d::UnitX(), {0.07, 0.07}, 0.8, 2));
  s.areas.push_back(ContactArea::rectangle(3, {0.38, 0.0, 0.0}, Eigen::Vector3d::UnitZ(),
                                           Eigen::Vector3d::UnitX(), {0.05, 0.05}, 0.8, 3));
  s.areas.push_back(ContactArea::rectangle(4, {0.95, 0.0, 0.0}, Eigen::Vector3d::UnitZ(),
                                           Eigen::Vector3d::UnitX(), {0.36, 0.42}, 0.8, 4));

  const Eigen::Vector3d root0(-0.10, 0.0, 0.24);
  const Eigen::Vector3d root_goal(0.95, 0.0, 0.24);
  s.start_stance = stance_from_pose(s.robot, 0, s.areas, nominal_pose(s.robot, root0));
  s.goal_stance = stance_from_pose(s.robot, 4, s.areas, nominal_pose(s.robot, root_goal));
  s.start_config = *pose_for_stance(s.robot, s.areas, s.start_stance, nominal_pose(s.robot, root0));
  s.guide_waypoints = straight_guide(s.robot, root0, root_goal, 4);

  s.planner.horizon = 2;
  s.planner.d_min = 0.05;
  s.planner.reach_factor = 1.1;
  s.pg.max_step = 0.24;
  s.pg.max_iters = 120;
  return s;
}

Scenario wall_walking_scenario() {
  Scenario s;
  s.name = "wall-walking";
  s.robot = default_hexapod();
  // Narrow corridor: the usable ground strip hugs the left wall and is out of
  // reach for the right legs, which must walk the right wall. Widths are the
  // study's one-meter corridor scaled to this robot.
  s.obstacles.push_back(Obstacle::box(0, {0.3, 0.145, -0.05}, {1.8, 0.75, 0.1}));  // floor
  s.obstacles.push_back(Obstacle::box(1, {0.3, -0.23, 0.2}, {1.8, 0.10, 0.5}));    // right wall
  s.obstacles.push_back(Obstacle::box(2, {0.3, 0.57, 0.2}, {1.8, 0.10, 0.5}));     // left wall

  s.areas.push_back(ContactArea::rectangle(0, {0.3, 0.34, 0.0}, Eigen::Vector3d::UnitZ(),
                                           Eigen::Vector3d::UnitX(), {0.85, 0.10}, 0.8, 0));
  s.areas.push_back(ContactArea::rectangle(1, {0.3, -0.18, 0.12}, Eigen::Vector3d::UnitY(),
                                           Eigen::Vector3d::UnitX(), {0.85, 0.10}, 0.9, 1));

  // Balance lives over the ground strip: the wall contacts are friction
  // limited, so the torso rides the left side of the corridor.
  const Eigen::Vector3d root0(0.0, 0.22, 0.26);
  const Eigen::Vector3d root_goal(0.6, 0.22, 0.26);
  auto stance_at = [&](const Eigen::Vector3d& root) {
    Stance st;
    for (int leg = 0; leg < 6; ++leg) {
      const LegModel& L = s.robot.legs[leg];
      if (L.mount.y() < 0) {
        const Eigen::Vector3d p(root.x() + L.mount.x() + 0.06 * std::cos(L.mount_yaw), -0.18,
                                0.12);
        st.set({leg, 1, s.areas[1].uv_of(p)});
      } else {
        const Eigen::Vector3d p(root.x() + L.mount.x() + 0.20 * std::cos(L.mount_yaw), 0.34, 0.0);
        st.set({leg, 0, s.areas[0].uv_of(p)});
      }
    }
    return st;
  };
  s.start_stance = stance_at(root0);
  s.goal_stance = stance_at(root_goal);
  const auto q0 = pose_for_stance(s.robot, s.areas, s.start_stance, nominal_pose(s.robot, root0));
  s.start_config = q0 ? *q0 : nominal_pose(s.robot, root0);
  std::vector<Configuration> wps;
  for (int i = 0; i < 3; ++i) {
    Configuration w = s.start_config;
    w.p = root0 + (i / 2.0) * (root_goal - root0);
    wps.push_back(w);
  }
  s.guide_waypoints = wps;

  s.planner.horizon = 2;
  s.planner.d_min = 0.04;
  s.pg.max_step = 0.16;
  s.pg.max_iters = 120;
  return s;
}

Scenario chimney_walking_scenario() {
  Scenario s;
  s.name = "chimney-walking";
  s.robot = default_hexapod();
  // Ground on both sides of a gap; two vertical walls span the gap, and only
  // wall contacts can cross it.
  s.obstacles.push_back(Obstacle::box(0, {-0.25, 0.0, -0.05}, {0.76, 0.68, 0.1}));  // start ground
  s.obstacles.push_back(Obstacle::box(1, {0.85, 0.0, -0.05}, {0.76, 0.68, 0.1}));   // far ground
  s.obstacles.push_back(Obstacle::box(2, {0.3, -0.42, 0.15}, {1.7, 0.10, 0.7}));    // right wall
  s.obstacles.push_back(Obstacle::box(3, {0.3, 0.42, 0.15}, {1.7, 0.10, 0.7}));     // left wall

  s.areas.push_back(ContactArea::rectangle(0, {-0.25, 0.0, 0.0}, Eigen::Vector3d::UnitZ(),
                                           Eigen::Vector3d::UnitX(), {0.36, 0.33}, 0.8, 0));
  s.areas.push_back(ContactArea::rectangle(1, {0.85, 0.0, 0.0}, Eigen::Vector3d::UnitZ(),
                                           Eigen::Vector3d::UnitX(), {0.36, 0.33}, 0.8, 1));
  s.areas.push_back(ContactArea::rectangle(2, {0.3, -0.37, 0.18}, Eigen::Vector3d::UnitY(),
                                           Eigen::Vector3d::UnitX(), {0.8, 0.14}, 0.9, 2));
  s.areas.push_back(ContactArea::rectangle(3, {0.3, 0.37, 0.18}, -Eigen::Vector3d::UnitY(),
                                           Eigen::Vector3d::UnitX(), {0.8, 0.14}, 0.9, 3));

  const Eigen::Vector3d root0(-0.25, 0.0, 0.24);
  const Eigen::Vector3d root_goal(0.85, 0.0, 0.24);
  s.start_stance = stance_from_pose(s.robot, 0, s.areas, nominal_pose(s.robot, root0));
  s.goal_stance = stance_from_pose(s.robot, 1, s.areas, nominal_pose(s.robot, root_goal));
  s.start_config = *pose_for_stance(s.robot, s.areas, s.start_stance, nominal_pose(s.robot, root0));
  s.guide_waypoints = straight_guide(s.robot, root0, root_goal, 4);

  s.planner.horizon = 2;
  s.pg.max_step = 0.20;
  s.pg.max_iters = 120;
  return s;
}

Scenario chimney_climbing_scenario() {
  Scenario s;
  s.name = "chimney-climbing";
  s.robot = default_hexapod();
  // Vertical ascent between two walls on wall contacts alone.
  s.obstacles.push_back(Obstacle::box(0, {0.0, -0.38, 0.45}, {0.9, 0.12, 0.9}));  // right wall
  s.obstacles.push_back(Obstacle::box(1, {0.0, 0.38, 0.45}, {0.9, 0.12, 0.9}));   // left wall

  s.areas.push_back(ContactArea::rectangle(0, {0.0, -0.32, 0.45}, Eigen::Vector3d::UnitY(),
                                           Eigen::Vector3d::UnitX(), {0.42, 0.33}, 0.9, 0));
  s.areas.push_back(ContactArea::rectangle(1, {0.0, 0.32, 0.45}, -Eigen::Vector3d::UnitY(),
                                           Eigen::Vector3d::UnitX(), {0.42, 0.33}, 0.9, 1));

  const Eigen::Vector3d root0(0.0, 0.0, 0.30);
  const Eigen::Vector3d root_goal(0.0, 0.0, 0.70);
  auto stance_at = [&](const Eigen::Vector3d& root) {
    Stance st;
    for (int leg = 0; leg < 6; ++leg) {
      const LegModel& L = s.robot.legs[leg];
      const bool right = L.mount.y() < 0;
      const int area = right ? 0 : 1;
      const double wall_y = right ? -0.32 : 0.32;
      const Eigen::Vector3d p(root.x() + L.mount.x() + 0.10 * std::cos(L.mount_yaw), wall_y,
                              root.z() - 0.14);
      st.set({leg, area, s.areas[area].uv_of(p)});
    }
    return st;
  };
  s.start_stance = stance_at(root0);
  s.goal_stance = stance_at(root_goal);
  const auto q0 = pose_for_stance(s.robot, s.areas, s.start_stance, nominal_pose(s.robot, root0));
  s.start_config = q0 ? *q0 : nominal_pose(s.robot, root0);
  std::vector<Configuration> wps;
  for (int i = 0; i < 3; ++i) {
    Configuration w = s.start_config;
    w.p = root0 + (i / 2.0) * (root_goal - root0);
    wps.push_back(w);
  }
  s.guide_waypoints = wps;

  s.planner.horizon = 2;
  s.pg.max_step = 0.16;
  s.pg.max_iters = 120;
  return s;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  return {"corridor", "stepping-stones", "wall-walking", "chimney-walking", "chimney-climbing"};
}

Scenario builtin_scenario(const std::string& name, unsigned long long seed) {
  Scenario s;
  if (name == "corridor") s = corridor_scenario();
  else if (name == "stepping-stones") s = stepping_stones_scenario();
  else if (name == "wall-walking") s = wall_walking_scenario();
  else if (name == "chimney-walking") s = chimney_walking_scenario();
  else if (name == "chimney-climbing") s = chimney_climbing_scenario();
  else throw ParseError("unknown builtin scenario: " + name);
  s.planner.seed = seed;
  perturb_start(s, seed);
  s.validate();
  return s;
}

}  // namespace rhcp
