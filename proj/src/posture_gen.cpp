#include "rhcp/posture_gen.hpp"

#include <cstring>
#include <functional>

#include "rhcp/qp.hpp"
#include "rhcp/vfi.hpp"

namespace rhcp {

const char* config_invalid_reason(const World& world, const StageContext& ctx,
                                  const Configuration& q);

namespace {

// Leg order FR, MR, RR, FL, ML, RL: a patch is blocked by the next leg
// forward on its own body side; front legs are unblocked.
constexpr int kBlockingLimb[6] = {-1, 0, 1, -1, 3, 4};

constexpr int kAdjacentPairs[6][2] = {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {0, 3}, {2, 5}};

struct TaskTerm {
  Eigen::RowVectorXd J;
  double err = 0.0;
};

const Plane* best_face(const Obstacle& o, const Eigen::Vector3d& p, double& d_out) {
  double best = -kInf;
  const Plane* face = nullptr;
  for (const auto& f : o.faces) {
    const double d = p.dot(f.normal3()) - f.offset;
    if (d > best) {
      best = d;
      face = &f;
    }
  }
  d_out = best;
  return face;
}

bool foot_exempt_from(const StageContext& ctx, int leg, int obstacle_id) {
  if (leg < 0 || leg >= static_cast<int>(ctx.foot_exempt.size())) return false;
  for (int id : ctx.foot_exempt[leg])
    if (id == obstacle_id) return true;
  return false;
}

void add_collision_rows(const World& world, const StageContext& ctx,
                        const std::vector<PlacedPrimitive>& bodies, const Configuration& q,
                        std::vector<ConstraintRow>& rows) {
  const PgParams& pg = world.pg;
  for (const auto& placed : bodies) {
    const bool is_foot = placed.body.attachment == BodyPrimitive::LegFoot;
    Eigen::MatrixXd J_p;  // computed lazily, shared across this body's rows
    bool have_jac = false;
    for (const auto& obstacle : world.obstacles) {
      if (is_foot && foot_exempt_from(ctx, placed.body.index, obstacle.id)) continue;
      double d_face = 0.0;
      const Plane* face = best_face(obstacle, placed.position, d_face);
      if (face == nullptr) continue;
      const double d = d_face - placed.body.radius;
      if (d - pg.d_safe >= pg.row_horizon) continue;  // far from the boundary
      if (!have_jac) {
        J_p = primitive_jacobian(world.robot, q, placed.body);
        have_jac = true;
      }
      const auto dist = dist_point_plane(placed.position, J_p, *face);
      rows.push_back(keep_out_row(dist.value - placed.body.radius, dist.J, pg.d_safe, pg.b_d,
                                  pg.eta_d));
    }
  }
}

void add_self_collision_rows(const World& world, const std::vector<PlacedPrimitive>& bodies,
                             const Configuration& q, std::vector<ConstraintRow>& rows) {
  const PgParams& pg = world.pg;
  const double d_safe_lin = 2.0 * world.robot.point_radius + pg.d_safe;
  const int n_legs = world.robot.n_legs();
  std::vector<Eigen::Vector3d> foot(n_legs), knee(n_legs);
  for (const auto& placed : bodies) {
    if (placed.body.attachment == BodyPrimitive::LegFoot) foot[placed.body.index] = placed.position;
    if (placed.body.attachment == BodyPrimitive::LegKnee) knee[placed.body.index] = placed.position;
  }
  for (const auto& pair : kAdjacentPairs) {
    for (const auto kind : {FrameId::Foot, FrameId::Knee}) {
      const Eigen::Vector3d pa = kind == FrameId::Foot ? foot[pair[0]] : knee[pair[0]];
      const Eigen::Vector3d pb = kind == FrameId::Foot ? foot[pair[1]] : knee[pair[1]];
      const double dist = (pa - pb).norm();
      if (dist - d_safe_lin >= pg.row_horizon) continue;
      const FrameId fa{kind, pair[0]}, fb{kind, pair[1]};
      const Eigen::MatrixXd J =
          frame_jacobians(world.robot, q, fa).J_p - frame_jacobians(world.robot, q, fb).J_p;
      const auto d = dist_point_point_sq(pa, J, pb);
      rows.push_back(
          keep_out_row(d.value, d.J, d_safe_lin * d_safe_lin, pg.b_d * pg.b_d, pg.eta_d));
    }
  }
}

void add_balance_rows(const World& world, const std::vector<Plane>& planes,
                      const Configuration& q, std::vector<ConstraintRow>& rows) {
  if (planes.empty()) return;
  const PgParams& pg = world.pg;
  const ComResult com = com_and_jacobian(world.robot, q);
  const Eigen::Vector3d c = com.com;
  for (const auto& plane : planes) {
    const auto d = dist_point_plane(c, com.J, plane);
    if (-d.value - pg.d_safe_balance >= pg.row_horizon) continue;  // deep inside
    rows.push_back(keep_in_row(d.value, d.J, -pg.d_safe_balance, pg.b_d, pg.eta_d));
  }
}

void add_slip_rows(const World& world, const std::vector<FixedTarget>& fixed,
                   const Configuration& q, std::vector<ConstraintRow>& rows) {
  const PgParams& pg = world.pg;
  for (const auto& target : fixed) {
    const FrameJacobians fj = frame_jacobians(world.robot, q, FrameId::foot(target.patch));
    const Eigen::Vector3d p = fkm_position(world.robot, q, FrameId::foot(target.patch));
    const auto d = dist_point_point_sq(p, fj.J_p, target.position);
    rows.push_back(keep_in_row(d.value, d.J, pg.r_slip * pg.r_slip, pg.b_d * pg.b_d, pg.eta_d));
  }
}

void add_tilt_rows(const World& world, const Configuration& q, std::vector<ConstraintRow>& rows) {
  const PgParams& pg = world.pg;
  const Quaternion r_d = nearest_waypoint_orientation(world.guide, q);
  for (const auto& axis :
       {Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitZ()}) {
    const Eigen::Vector3d dir = q.r.rotate(axis);
    const Eigen::Vector3d dir_d = r_d.rotate(axis);
    const Eigen::MatrixXd J_dir = axis_direction_jacobian(world.robot, q, FrameId::torso(), axis);
    const Line l = line_from_point_direction(q.p, dir);
    const Line l_d = line_from_point_direction(q.p, dir_d);
    const auto d = dist_axis_angle_sq(l, J_dir, l_d);
    rows.push_back(keep_in_row(d.value, d.J, pg.d_safe_tilt, pg.b_d, pg.eta_d));
  }
}

void add_crossing_row(const World& world, const Configuration& q, int patch,
                      std::vector<ConstraintRow>& rows) {
  const int blocker = kBlockingLimb[patch];
  if (blocker < 0) return;
  const PgParams& pg = world.pg;
  const Eigen::Vector3d n = q.r.rotate(Eigen::Vector3d::UnitX());
  const Eigen::MatrixXd J_n =
      axis_direction_jacobian(world.robot, q, FrameId::torso(), Eigen::Vector3d::UnitX());
  const Eigen::Vector3d p_star = fkm_position(world.robot, q, FrameId::foot(patch));
  const Eigen::Vector3d p_block = fkm_position(world.robot, q, FrameId::foot(blocker));
  const Eigen::MatrixXd J_rel = frame_jacobians(world.robot, q, FrameId::foot(patch)).J_p -
                                frame_jacobians(world.robot, q, FrameId::foot(blocker)).J_p;
  const double d = n.dot(p_star - p_block);
  if (-d - pg.d_safe_cross >= pg.row_horizon) return;
  Eigen::RowVectorXd J_d = n.transpose() * J_rel + (p_star - p_block).transpose() * J_n;
  ConstraintRow row = keep_in_row(d, J_d, -pg.d_safe_cross, pg.b_d, pg.eta_d);
  rows.push_back(row);
}

void add_boundary_rows(const World& world, const Configuration& q, int patch, int area,
                       std::vector<ConstraintRow>& rows) {
  const PgParams& pg = world.pg;
  const FrameJacobians fj = frame_jacobians(world.robot, q, FrameId::foot(patch));
  const Eigen::Vector3d p = fkm_position(world.robot, q, FrameId::foot(patch));
  for (const auto& plane : world.areas[area].boundary) {
    const auto d = dist_point_plane(p, fj.J_p, plane);
    rows.push_back(keep_in_row(d.value, d.J, 0.0, pg.b_d, pg.eta_d));
  }
}

void add_area_plane_row(const World& world, const Configuration& q, int patch, int area,
                        std::vector<ConstraintRow>& rows) {
  // Two-sided band on the signed plane distance. The single squared-distance
  // row only limits |d|'s growth rate and lets an indifferent task dive the
  // foot through the plane within one discrete step (the boundary-crossing
  // effect of small safe zones under zero-order hold), so both signs are
  // constrained. The zone is |d| <= b_d with a b_d/2 buffer: inside the
  // buffered band the rows are slack-free, so the u ~ 0 termination can fire.
  const PgParams& pg = world.pg;
  const FrameJacobians fj = frame_jacobians(world.robot, q, FrameId::foot(patch));
  const Eigen::Vector3d p = fkm_position(world.robot, q, FrameId::foot(patch));
  const auto d = dist_point_plane(p, fj.J_p, world.areas[area].plane);
  rows.push_back(keep_in_row(d.value, d.J, pg.b_d, 0.5 * pg.b_d, pg.eta_d));
  rows.push_back(keep_in_row(-d.value, Eigen::RowVectorXd(-d.J), pg.b_d, 0.5 * pg.b_d, pg.eta_d));
}

void add_max_step_row(const World& world, const Configuration& q, int patch,
                      const std::optional<Eigen::Vector3d>& prev,
                      std::vector<ConstraintRow>& rows) {
  const PgParams& pg = world.pg;
  if (!prev || !(pg.max_step < kInf)) return;
  const FrameJacobians fj = frame_jacobians(world.robot, q, FrameId::foot(patch));
  const Eigen::Vector3d p = fkm_position(world.robot, q, FrameId::foot(patch));
  const auto d = dist_point_point_sq(p, fj.J_p, *prev);
  rows.push_back(
      keep_in_row(d.value, d.J, pg.max_step * pg.max_step, pg.b_d * pg.b_d, pg.eta_d));
}

std::optional<Eigen::VectorXd> solve_stage_qp(const World& world, const Configuration& q,
                                              const std::vector<ConstraintRow>& rows,
                                              const std::vector<TaskTerm>& tasks,
                                              const std::vector<FixedTarget>& pinned) {
  const PgParams& pg = world.pg;
  const int n = world.robot.dim();
  const ConstraintBlock block = stack(rows);
  const int l = block.rows();

  // Rows whose admissible slack is zero stay hard; only the rest get a slack
  // variable (zero-width slack boxes degenerate the active-set solve).
  std::vector<int> slack_of(l, -1);
  int n_s = 0;
  for (int i = 0; i < l; ++i) {
    if (block.s_max(i) > 0.0) slack_of[i] = n_s++;
  }
  const int nv = n + n_s;

  QpProblem qp;
  qp.H = Eigen::MatrixXd::Zero(nv, nv);
  qp.g = Eigen::VectorXd::Zero(nv);
  Eigen::MatrixXd Hq =
      2.0 * pg.lambda * pg.lambda * Eigen::MatrixXd::Identity(n, n);
  for (const auto& t : tasks) {
    Hq += 2.0 * t.J.transpose() * t.J;
    qp.g.head(n) += 2.0 * pg.eta_o * t.err * t.J.transpose();
  }
  qp.H.topLeftCorner(n, n) = Hq;
  qp.H.bottomRightCorner(n_s, n_s) =
      2.0 * pg.beta * pg.beta * Eigen::MatrixXd::Identity(n_s, n_s);

  qp.A = Eigen::MatrixXd::Zero(l, nv);
  if (l > 0) qp.A.leftCols(n) = block.W;
  for (int i = 0; i < l; ++i) {
    if (slack_of[i] >= 0) qp.A(i, n + slack_of[i]) = -1.0;
  }
  qp.b = block.w;

  // Equality rows: quaternion topology plus first-order pinning of the fixed
  // feet. The slip VFI rows lose authority as their Jacobians vanish at zero
  // drift, so without pinning the feet wander tangentially every step.
  const int n_eq = 1 + 3 * static_cast<int>(pinned.size());
  qp.C = Eigen::MatrixXd::Zero(n_eq, nv);
  qp.C.block<1, 4>(0, 0) = q.r.vec4().transpose();
  for (size_t i = 0; i < pinned.size(); ++i) {
    const FrameJacobians fj = frame_jacobians(world.robot, q, FrameId::foot(pinned[i].patch));
    qp.C.block(1 + 3 * static_cast<int>(i), 0, 3, n) = fj.J_p;
  }
  qp.d = Eigen::VectorXd::Zero(n_eq);

  qp.lb.resize(nv);
  qp.ub.resize(nv);
  Eigen::VectorXd lo(n), hi(n);
  qdot_box(world.robot, q, pg.eta_d, pg.b_d, lo, hi);
  qp.lb.head(n) = lo;
  qp.ub.head(n) = hi;
  for (int i = 0; i < l; ++i) {
    if (slack_of[i] >= 0) {
      qp.lb(n + slack_of[i]) = 0.0;
      qp.ub(n + slack_of[i]) = block.s_max(i);
    }
  }

  const QpResult r = solve_qp(qp);
  if (!r.ok()) return std::nullopt;
  return r.u;
}

DriftParams drift_params(const World& world) {
  DriftParams d;
  d.eta_d = world.pg.eta_d;
  d.b_d = world.pg.b_d;
  d.r_slip = world.pg.r_slip;
  d.tau = world.step.tau_max;
  return d;
}

// Shared control loop: exit check at cycle boundaries, stall detection,
// variable-step integration with drift correction. `exit_gap`, when given,
// is a scalar that reaches zero exactly at the stage's exit condition; a
// long stretch without improvement means the stage is blocked and is cut off.
StageOutcome run_stage(const World& world, const StageContext& ctx, const Configuration& q0,
                       PgStatus fail_status, bool stall_is_success,
                       const std::function<bool(const Configuration&)>& exit_ok,
                       const std::function<std::vector<ConstraintRow>(const Configuration&)>& rows,
                       const std::function<std::vector<TaskTerm>(const Configuration&)>& tasks,
                       const std::function<double(const Configuration&)>& exit_gap = nullptr) {
  StageOutcome out;
  out.q = q0;
  const int n = world.robot.dim();
  const DriftParams drift = drift_params(world);
  const auto valid = [&](const Configuration& q) { return config_valid(world, ctx, q); };
  int tiny_steps = 0;  // consecutive near-zero displacements: converged against constraints
  std::vector<Eigen::VectorXd> recent;  // limit-cycle detection window
  double best_gap = kInf;
  int gap_stalled = 0;

  for (int iter = 0; iter < world.pg.max_iters; ++iter) {
    if (exit_ok(out.q)) {
      out.ok = true;
      out.iters = iter;
      return out;
    }
    if (exit_gap) {
      const double gap = exit_gap(out.q);
      if (gap < best_gap - 1e-5) {
        best_gap = gap;
        gap_stalled = 0;
      } else if (++gap_stalled >= 25) {
        out.fail_status = fail_status;
        out.iters = iter;
        return out;
      }
    }
    const auto u = solve_stage_qp(world, out.q, rows(out.q), tasks(out.q), ctx.fixed);
    if (!u) {
      out.fail_status = fail_status;
      out.iters = iter;
      return out;
    }
    if (getenv("RHCP_DEBUG_STALL") && u->lpNorm<Eigen::Infinity>() <= world.pg.u_zero_tol) {
      const auto rs = rows(out.q);
      const int nn = world.robot.dim();
      fprintf(stderr, "STALL iter=%d |u|inf=%g qdot=%g rows=%zu\n", iter,
              u->lpNorm<Eigen::Infinity>(), u->head(nn).norm(), rs.size());
      for (size_t ri = 0; ri < rs.size(); ++ri) {
        const double margin = rs[ri].rhs + rs[ri].slack_max;
        if (margin < 0.02)
          fprintf(stderr, "  row %zu kind=%d rhs=%g smax=%g |J|=%g\n", ri, (int)rs[ri].kind,
                  rs[ri].rhs, rs[ri].slack_max, rs[ri].J_row.norm());
      }
    }
    if (u->lpNorm<Eigen::Infinity>() <= world.pg.u_zero_tol) {
      // Constrained equilibrium: no further progress possible.
      out.ok = stall_is_success;
      out.fail_status = fail_status;
      out.iters = iter;
      return out;
    }
    const auto step =
        step_with_backoff(world.robot, out.q, u->head(n), ctx.fixed, valid, world.step, drift);
    if (!step) {
      if (getenv("RHCP_DEBUG_STALL")) {
        const Configuration probe = integrate(out.q, u->head(n), world.step.tau_min);
        const auto corrected = correct_drift(world.robot, probe, ctx.fixed, drift);
        fprintf(stderr, "BACKOFF-FAIL iter=%d reason=%s\n", iter,
                corrected ? (config_invalid_reason(world, ctx, *corrected) ?: "valid-at-min?")
                          : "drift-uncorrectable");
      }
      out.ok = stall_is_success;  // placement keeps the most recent iterate
      out.fail_status = PgStatus::StepBackoffExhausted;
      out.iters = iter;
      return out;
    }
    const double moved = (step->q.to_vector() - out.q.to_vector()).lpNorm<Eigen::Infinity>();
    out.q = step->q;
    out.trajectory.push_back(step->q);
    // Constrained equilibria show up either as vanishing steps or as exact
    // short-period limit cycles (chattering between active sets).
    const Eigen::VectorXd v = step->q.to_vector();
    bool cycled = false;
    for (const auto& past : recent) {
      if ((v - past).lpNorm<Eigen::Infinity>() <= 3e-5) {
        cycled = true;
        break;
      }
    }
    recent.push_back(v);
    if (recent.size() > 6) recent.erase(recent.begin());
    if (moved <= 2e-5 ? (++tiny_steps >= 3) : (tiny_steps = 0, cycled)) {
      out.ok = stall_is_success;
      out.fail_status = fail_status;
      out.iters = iter + 1;
      return out;
    }
  }
  out.ok = stall_is_success;  // placement returns the most recent iterate
  out.fail_status = fail_status;
  out.iters = world.pg.max_iters;
  return out;
}

std::string stance_key(const Stance& stance) {
  std::string key;
  key.reserve(stance.contacts.size() * 20);
  for (const auto& c : stance.contacts) {
    key.push_back(static_cast<char>('A' + c.patch));
    key.push_back(static_cast<char>('a' + c.area));
    uint64_t bits[2];
    const double u = c.uv.x(), v = c.uv.y();
    std::memcpy(&bits[0], &u, 8);
    std::memcpy(&bits[1], &v, 8);
    key.append(reinterpret_cast<const char*>(bits), 16);
  }
  return key;
}

}  // namespace

const char* to_string(PgStatus s) {
  switch (s) {
    case PgStatus::Success: return "success";
    case PgStatus::BreakTimeout: return "break-timeout";
    case PgStatus::TransitionTimeout: return "transition-timeout";
    case PgStatus::StepBackoffExhausted: return "step-backoff-exhausted";
  }
  return "unknown";
}

ContactSpec World::contact_spec(const Contact& c) const {
  const ContactArea& area = areas[c.area];
  ContactSpec spec;
  spec.position = area.point_at(c.uv);
  spec.normal = area.plane.normal3();
  spec.mu = area.mu;
  spec.pyramid_sides = area.pyramid_sides;
  return spec;
}

const RegionCache::Entry& RegionCache::get(const World& world, const Stance& stance) {
  const std::string key = stance_key(stance);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  // Compute outside the lock; identical inputs give identical results, so a
  // racing duplicate computation is harmless.
  std::vector<ContactSpec> contacts;
  for (const auto& c : stance.contacts) contacts.push_back(world.contact_spec(c));
  Entry entry;
  entry.region = compute_region(contacts, world.robot.total_mass(), world.balance);
  if (!entry.region.degenerate()) {
    entry.planes = region_planes(entry.region);
    entry.usable = true;
  }
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.emplace(key, std::move(entry)).first->second;
}

StageContext make_stage_context(const World& world, const Stance& enforced_stance,
                                int moving_patch, int target_area,
                                const std::vector<Plane>& balance_planes,
                                const std::optional<Eigen::Vector3d>& step_origin,
                                int departed_area) {
  StageContext ctx;
  ctx.balance_planes = balance_planes;
  ctx.moving_patch = moving_patch;
  if (world.pg.max_step < kInf) ctx.step_origin = step_origin;
  ctx.foot_exempt.resize(world.robot.n_legs());
  for (const auto& c : enforced_stance.contacts) {
    ctx.fixed.push_back({c.patch, world.contact_position(c)});
    const int obstacle = world.areas[c.area].obstacle_id;
    if (obstacle >= 0) ctx.foot_exempt[c.patch].push_back(obstacle);
  }
  // The moving foot may touch both the surface it is leaving and its target.
  if (moving_patch >= 0) {
    for (const int area : {target_area, departed_area}) {
      if (area < 0) continue;
      const int obstacle = world.areas[area].obstacle_id;
      if (obstacle >= 0) ctx.foot_exempt[moving_patch].push_back(obstacle);
    }
  }
  return ctx;
}

bool config_valid(const World& world, const StageContext& ctx, const Configuration& q) {
  return config_invalid_reason(world, ctx, q) == nullptr;
}
const char* config_invalid_reason(const World& world, const StageContext& ctx,
                                  const Configuration& q) {
  const double slop = 1e-9;
  const PgParams& pg = world.pg;
  if (!world.robot.within_limits(q, slop)) return "limits";
  const auto bodies = collision_bodies(world.robot, q);
  const int n_legs = world.robot.n_legs();
  std::vector<Eigen::Vector3d> foot(n_legs), knee(n_legs);
  for (const auto& placed : bodies) {
    if (placed.body.attachment == BodyPrimitive::LegFoot) foot[placed.body.index] = placed.position;
    if (placed.body.attachment == BodyPrimitive::LegKnee) knee[placed.body.index] = placed.position;
  }
  for (const auto& placed : bodies) {
    const bool is_foot = placed.body.attachment == BodyPrimitive::LegFoot;
    for (const auto& obstacle : world.obstacles) {
      if (is_foot && foot_exempt_from(ctx, placed.body.index, obstacle.id)) continue;
      double d_face = 0.0;
      best_face(obstacle, placed.position, d_face);
      if (d_face - placed.body.radius - pg.d_safe < -slop) return "collision";
    }
  }
  const double d_safe_lin = 2.0 * world.robot.point_radius + pg.d_safe;
  for (const auto& pair : kAdjacentPairs) {
    if ((foot[pair[0]] - foot[pair[1]]).norm() < d_safe_lin - slop) return "self-collision";
    if ((knee[pair[0]] - knee[pair[1]]).norm() < d_safe_lin - slop) return "self-collision";
  }
  if (!ctx.balance_planes.empty()) {
    const Eigen::Vector3d com = com_and_jacobian(world.robot, q).com;
    for (const auto& plane : ctx.balance_planes)
      if (com.dot(plane.normal3()) - plane.offset > slop) return "balance";
  }
  for (const auto& target : ctx.fixed)
    if ((foot[target.patch] - target.position).norm() > pg.r_slip + slop) return "drift";
  if (ctx.moving_patch >= 0 && (ctx.step_origin || ctx.hold_plane)) {
    const Eigen::Vector3d p = foot[ctx.moving_patch];
    if (ctx.step_origin && (p - *ctx.step_origin).norm() > pg.max_step + slop) return "step-cap";
    if (ctx.hold_plane &&
        std::abs(p.dot(ctx.hold_plane->normal3()) - ctx.hold_plane->offset) > 2.0 * pg.b_d) {
      if (getenv("RHCP_DEBUG_STALL"))
        fprintf(stderr, "    area-plane: |d|=%g p=(%g %g %g)\n",
                std::abs(p.dot(ctx.hold_plane->normal3()) - ctx.hold_plane->offset), p.x(), p.y(),
                p.z());
      return "area-plane";
    }
  }
  const Quaternion r_d = nearest_waypoint_orientation(world.guide, q);
  for (const auto& axis :
       {Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitZ()}) {
    if ((q.r.rotate(axis) - r_d.rotate(axis)).squaredNorm() > pg.d_safe_tilt + slop)
      return "tilt";
  }
  return nullptr;
}

bool breaking_goal_satisfied(const World& world, const std::vector<Plane>& planes_without,
                             const Configuration& q) {
  const Eigen::Vector3d com = com_and_jacobian(world.robot, q).com;
  for (const auto& plane : planes_without) {
    if (com.dot(plane.normal3()) - plane.offset > -world.pg.b_d + 1e-12) return false;
  }
  return true;
}

StageOutcome breaking_stage(const World& world, const Stance& parent_stance,
                            const Configuration& parent_config, int patch,
                            const std::vector<Plane>& planes_with,
                            const RegionCache::Entry& without) {
  // Task: COM toward the vertical line through the without-region centroid.
  const Line l_cent = centroid_line(without.region);
  const std::vector<Plane>& planes_without = without.planes;

  const StageContext ctx = make_stage_context(world, parent_stance, patch, -1, planes_with);
  return run_stage(
      world, ctx, parent_config, PgStatus::BreakTimeout, /*stall_is_success=*/false,
      [&](const Configuration& q) { return breaking_goal_satisfied(world, planes_without, q); },
      [&](const Configuration& q) {
        const auto bodies = collision_bodies(world.robot, q);
        std::vector<ConstraintRow> rows;
        add_collision_rows(world, ctx, bodies, q, rows);
        add_self_collision_rows(world, bodies, q, rows);
        add_balance_rows(world, planes_with, q, rows);
        add_slip_rows(world, ctx.fixed, q, rows);
        add_tilt_rows(world, q, rows);
        return rows;
      },
      [&](const Configuration& q) {
        const ComResult com = com_and_jacobian(world.robot, q);
        const auto d = dist_point_line_sq(com.com, com.J, l_cent);
        return std::vector<TaskTerm>{{d.J, d.value}};
      },
      [&](const Configuration& q) {
        const Eigen::Vector3d com = com_and_jacobian(world.robot, q).com;
        double gap = -kInf;
        for (const auto& plane : planes_without)
          gap = std::max(gap, com.dot(plane.normal3()) - plane.offset + world.pg.b_d);
        return gap;
      });
}

namespace {

bool boundary_condition(const World& world, const Configuration& q, int patch, int area) {
  const Eigen::Vector3d p = fkm_position(world.robot, q, FrameId::foot(patch));
  for (const auto& plane : world.areas[area].boundary) {
    if (p.dot(plane.normal3()) - plane.offset > -world.pg.b_d + 1e-12) return false;
  }
  return true;
}

bool plane_condition(const World& world, const Configuration& q, int patch, int area) {
  const Eigen::Vector3d p = fkm_position(world.robot, q, FrameId::foot(patch));
  const double d = p.dot(world.areas[area].plane.normal3()) - world.areas[area].plane.offset;
  return d * d <= world.pg.b_d * world.pg.b_d + 1e-15;
}

}  // namespace

StageOutcome transition_stage(const World& world, const Stance& stance_b,
                              const Configuration& q_b, int patch, int area,
                              const std::vector<Plane>& planes_without,
                              const std::optional<Eigen::Vector3d>& prev_contact,
                              int departed_area) {
  const StageContext ctx = make_stage_context(world, stance_b, patch, area, planes_without,
                                              prev_contact, departed_area);
  const ContactArea& target = world.areas[area];
  const Line l_area =
      line_from_point_direction(target.centroid, target.plane.normal3());

  return run_stage(
      world, ctx, q_b, PgStatus::TransitionTimeout, /*stall_is_success=*/false,
      [&](const Configuration& q) {
        return boundary_condition(world, q, patch, area) && plane_condition(world, q, patch, area);
      },
      [&](const Configuration& q) {
        const auto bodies = collision_bodies(world.robot, q);
        std::vector<ConstraintRow> rows;
        add_collision_rows(world, ctx, bodies, q, rows);
        add_self_collision_rows(world, bodies, q, rows);
        add_balance_rows(world, planes_without, q, rows);
        add_slip_rows(world, ctx.fixed, q, rows);
        add_tilt_rows(world, q, rows);
        add_crossing_row(world, q, patch, rows);
        if (boundary_condition(world, q, patch, area))
          add_boundary_rows(world, q, patch, area, rows);
        add_max_step_row(world, q, patch, prev_contact, rows);
        return rows;
      },
      [&](const Configuration& q) {
        const FrameJacobians fj = frame_jacobians(world.robot, q, FrameId::foot(patch));
        const Eigen::Vector3d p = fkm_position(world.robot, q, FrameId::foot(patch));
        std::vector<TaskTerm> tasks;
        const auto plane_sq = dist_point_plane_sq(p, fj.J_p, target.plane);
        if (!boundary_condition(world, q, patch, area)) {
          const auto line_sq = dist_point_line_sq(p, fj.J_p, l_area);
          tasks.push_back({line_sq.J, line_sq.value});
        }
        tasks.push_back({plane_sq.J, plane_sq.value});
        return tasks;
      },
      [&](const Configuration& q) {
        const Eigen::Vector3d p = fkm_position(world.robot, q, FrameId::foot(patch));
        double gap = std::abs(p.dot(target.plane.normal3()) - target.plane.offset) - world.pg.b_d;
        for (const auto& b : target.boundary)
          gap = std::max(gap, p.dot(b.normal3()) - b.offset + world.pg.b_d);
        return gap;
      });
}

PlacementOutcome placement_stage(const World& world, const Stance& stance_b,
                                 const Configuration& q_t, int patch, int area,
                                 const std::vector<Plane>& planes_without,
                                 const std::optional<Eigen::Vector3d>& prev_contact,
                                 int departed_area) {
  StageContext ctx = make_stage_context(world, stance_b, patch, area, planes_without,
                                        prev_contact, departed_area);
  ctx.hold_plane = world.areas[area].plane;

  const StageOutcome out = run_stage(
      world, ctx, q_t, PgStatus::Success, /*stall_is_success=*/true,
      [](const Configuration&) { return false; },  // terminates on u ~ 0 or budget
      [&](const Configuration& q) {
        const auto bodies = collision_bodies(world.robot, q);
        std::vector<ConstraintRow> rows;
        add_collision_rows(world, ctx, bodies, q, rows);
        add_self_collision_rows(world, bodies, q, rows);
        add_balance_rows(world, planes_without, q, rows);
        add_slip_rows(world, ctx.fixed, q, rows);
        add_tilt_rows(world, q, rows);
        add_crossing_row(world, q, patch, rows);
        add_boundary_rows(world, q, patch, area, rows);
        add_area_plane_row(world, q, patch, area, rows);
        add_max_step_row(world, q, patch, prev_contact, rows);
        return rows;
      },
      [&](const Configuration& q) {
        const FrameJacobians fj = frame_jacobians(world.robot, q, FrameId::foot(patch));
        const Eigen::Vector3d p = fkm_position(world.robot, q, FrameId::foot(patch));
        const auto sf = patch_subfield(world.guide, world.field, patch, p, fj.J_p);
        return std::vector<TaskTerm>{{sf.J, sf.value}};
      });

  PlacementOutcome result;
  result.q = out.q;
  result.trajectory = out.trajectory;
  result.iters = out.iters;

  const ContactArea& target = world.areas[area];
  const Eigen::Vector3d p = fkm_position(world.robot, result.q, FrameId::foot(patch));
  Eigen::Vector2d uv = target.uv_of(p);
  uv.x() = std::clamp(uv.x(), -target.half_extents.x(), target.half_extents.x());
  uv.y() = std::clamp(uv.y(), -target.half_extents.y(), target.half_extents.y());
  result.contact = Contact{patch, area, uv};
  return result;
}

PgResult generate_child(const World& world, RegionCache& regions, const Stance& parent_stance,
                        const Configuration& parent_config, int patch, int area,
                        BreakOutcome* shared_break) {
  PgResult res;
  res.trajectory.push_back(parent_config);
  Configuration q = parent_config;

  Stance stance_b = parent_stance;
  const Contact* prev = parent_stance.find(patch);
  std::optional<Eigen::Vector3d> prev_pos;
  if (prev != nullptr) prev_pos = world.contact_position(*prev);

  if (prev != nullptr) {
    res.broke_contact = true;
    stance_b.remove(patch);

    BreakOutcome local;
    BreakOutcome& broke = shared_break != nullptr ? *shared_break : local;
    if (!broke.computed) {
      broke.computed = true;
      const auto& with_entry = regions.get(world, parent_stance);
      const auto& without_entry = regions.get(world, stance_b);
      if (!with_entry.usable || !without_entry.usable) {
        broke.ok = false;
        broke.fail_status = PgStatus::BreakTimeout;
      } else if (breaking_goal_satisfied(world, without_entry.planes, q)) {
        broke.ok = true;
        broke.q = q;
      } else {
        const StageOutcome out =
            breaking_stage(world, parent_stance, q, patch, with_entry.planes, without_entry);
        broke.ok = out.ok;
        broke.fail_status = out.fail_status;
        broke.q = out.q;
        broke.trajectory = out.trajectory;
        broke.iters = out.iters;
      }
    }
    res.break_iters = broke.iters;
    if (!broke.ok) {
      res.status = broke.fail_status;
      res.breaking_failed = true;
      return res;
    }
    q = broke.q;
    res.trajectory.insert(res.trajectory.end(), broke.trajectory.begin(),
                          broke.trajectory.end());
  }

  const auto& without_entry = regions.get(world, stance_b);
  if (!without_entry.usable) {
    res.status = PgStatus::BreakTimeout;
    res.breaking_failed = true;
    return res;
  }

  const int departed_area = prev != nullptr ? prev->area : -1;
  const StageOutcome trans = transition_stage(world, stance_b, q, patch, area,
                                              without_entry.planes, prev_pos, departed_area);
  res.transition_iters = trans.iters;
  if (!trans.ok) {
    res.status = trans.fail_status;
    return res;
  }
  q = trans.q;
  res.trajectory.insert(res.trajectory.end(), trans.trajectory.begin(), trans.trajectory.end());

  const PlacementOutcome placed = placement_stage(world, stance_b, q, patch, area,
                                                  without_entry.planes, prev_pos, departed_area);
  res.placement_iters = placed.iters;
  q = placed.q;
  res.trajectory.insert(res.trajectory.end(), placed.trajectory.begin(),
                        placed.trajectory.end());

  Stance stance_o = stance_b;
  stance_o.set(placed.contact);

  // Snap the new contact onto its recorded position; a node whose
  // configuration cannot satisfy its own stance is not a valid child.
  std::vector<FixedTarget> targets;
  for (const auto& c : stance_o.contacts) targets.push_back({c.patch, world.contact_position(c)});
  const auto snapped = correct_drift(world.robot, q, targets, drift_params(world));
  if (!snapped) {
    res.status = PgStatus::StepBackoffExhausted;
    return res;
  }
  q = *snapped;
  res.trajectory.push_back(q);

  res.stance_out = stance_o;
  res.config_out = q;
  res.potential = total_field(world.guide, world.field, world.robot, q, world.goal_mean);
  res.status = PgStatus::Success;
  return res;
}

}  // namespace rhcp
