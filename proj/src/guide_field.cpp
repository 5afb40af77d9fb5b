#include "rhcp/guide_field.hpp"

#include <algorithm>
#include <numeric>

namespace rhcp {
namespace {

double segment_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                        const Eigen::Vector3d& p) {
  const Eigen::Vector3d e = b - a;
  const double len2 = e.squaredNorm();
  const double t = len2 > 0 ? std::clamp((p - a).dot(e) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * e)).norm();
}

double subfield_for_segment(const GuidePath& path, const FieldParams& params, int patch, int k,
                            const Eigen::Vector3d& p) {
  const auto& seg = path.patches[patch].segments[k];
  const double line_term = (p.cross(seg.line.dir3()) - seg.line.moment3()).squaredNorm();
  const double plane_d = p.dot(seg.plane.normal3()) - seg.plane.offset;
  return line_term + params.alpha * (plane_d * plane_d + seg.lump_after);
}

}  // namespace

GuidePath build_path(const RobotModel& model, const std::vector<Configuration>& waypoints) {
  if (waypoints.size() < 2) throw TooFewWaypoints();
  GuidePath path;
  path.configs = waypoints;
  path.patches.resize(model.n_legs());
  for (int leg = 0; leg < model.n_legs(); ++leg) {
    PatchPath& pp = path.patches[leg];
    for (const auto& q : waypoints) pp.waypoints.push_back(fkm_position(model, q, FrameId::foot(leg)));
    // Segment lines and terminal planes; coincident waypoints drop the segment.
    std::vector<double> sq_lengths;
    for (size_t j = 0; j + 1 < pp.waypoints.size(); ++j) {
      const Eigen::Vector3d a = pp.waypoints[j], b = pp.waypoints[j + 1];
      if ((b - a).norm() <= 1e-9) continue;
      PatchPath::Segment seg;
      seg.a = a;
      seg.b = b;
      seg.line = line_from_points(a, b);
      seg.plane = plane_from_point_normal(b, -(b - a));
      pp.segments.push_back(seg);
      sq_lengths.push_back((b - a).squaredNorm());
    }
    double suffix = 0.0;
    for (int k = static_cast<int>(pp.segments.size()) - 1; k >= 0; --k) {
      pp.segments[k].lump_after = suffix;
      suffix += sq_lengths[k];
    }
  }
  return path;
}

int closest_segment(const GuidePath& path, const FieldParams& params, int patch,
                    const Eigen::Vector3d& p) {
  const auto& segs = path.patches[patch].segments;
  if (segs.empty()) return -1;
  double best = kInf;
  std::vector<int> tied;
  for (int k = 0; k < static_cast<int>(segs.size()); ++k) {
    const double d = segment_distance(segs[k].a, segs[k].b, p);
    if (d < best - 1e-9) {
      best = d;
      tied = {k};
    } else if (d <= best + 1e-9) {
      tied.push_back(k);
    }
  }
  if (tied.size() == 1) return tied.front();
  // Tie: lowest overall potential, then the larger index.
  int pick = tied.front();
  double pick_value = subfield_for_segment(path, params, patch, pick, p);
  for (size_t i = 1; i < tied.size(); ++i) {
    const double v = subfield_for_segment(path, params, patch, tied[i], p);
    if (v < pick_value - 1e-12 || (v <= pick_value + 1e-12 && tied[i] > pick)) {
      pick = tied[i];
      pick_value = v;
    }
  }
  return pick;
}

double subfield_value(const GuidePath& path, const FieldParams& params, int patch,
                      const Eigen::Vector3d& p) {
  const int k = closest_segment(path, params, patch, p);
  if (k < 0) {
    // Degenerate per-patch path: fall back to the squared distance to the
    // final waypoint so the field still pulls toward the goal.
    const auto& wpts = path.patches[patch].waypoints;
    return params.alpha * (p - wpts.back()).squaredNorm();
  }
  return subfield_for_segment(path, params, patch, k, p);
}

DistanceResult patch_subfield(const GuidePath& path, const FieldParams& params, int patch,
                              const Eigen::Vector3d& p, const Eigen::MatrixXd& J_p) {
  const int k = closest_segment(path, params, patch, p);
  DistanceResult out;
  if (k < 0) {
    const auto& wpts = path.patches[patch].waypoints;
    const auto d = dist_point_point_sq(p, J_p, wpts.back());
    out.value = params.alpha * d.value;
    out.J = params.alpha * d.J;
    return out;
  }
  const auto& seg = path.patches[patch].segments[k];
  const auto line_term = dist_point_line_sq(p, J_p, seg.line);
  const auto plane_term = dist_point_plane_sq(p, J_p, seg.plane);
  out.value = line_term.value + params.alpha * (plane_term.value + seg.lump_after);
  out.J = line_term.J + params.alpha * plane_term.J;
  return out;
}

std::vector<PatchSet> assign_patch_sets(const RobotModel& model, const Configuration& q,
                                        const Eigen::Vector3d& goal_mean) {
  if (model.n_legs() != 6) throw WrongPatchCount();
  std::vector<std::pair<double, int>> order;
  for (int leg = 0; leg < 6; ++leg) {
    const double d = (fkm_position(model, q, FrameId::foot(leg)) - goal_mean).norm();
    order.push_back({d, leg});
  }
  std::sort(order.begin(), order.end());  // ties fall back to patch index
  std::vector<PatchSet> sets(6, PatchSet::Mid);
  sets[order[0].second] = PatchSet::Near;
  sets[order[1].second] = PatchSet::Near;
  sets[order[4].second] = PatchSet::Far;
  sets[order[5].second] = PatchSet::Far;
  return sets;
}

double patch_weight(PatchSet set, const FieldParams& params) {
  switch (set) {
    case PatchSet::Near: return 1.0 - params.b_offset;
    case PatchSet::Mid: return 1.0;
    case PatchSet::Far: return 1.0 + params.b_offset;
  }
  return 1.0;
}

double total_field(const GuidePath& path, const FieldParams& params, const RobotModel& model,
                   const Configuration& q, const Eigen::Vector3d& goal_mean) {
  const auto sets = assign_patch_sets(model, q, goal_mean);
  double total = 0.0;
  for (int leg = 0; leg < model.n_legs(); ++leg) {
    const Eigen::Vector3d p = fkm_position(model, q, FrameId::foot(leg));
    total += patch_weight(sets[leg], params) * subfield_value(path, params, leg, p);
  }
  return total;
}

std::vector<double> subfield_values(const GuidePath& path, const FieldParams& params,
                                    const RobotModel& model, const Configuration& q) {
  std::vector<double> values;
  for (int leg = 0; leg < model.n_legs(); ++leg) {
    const Eigen::Vector3d p = fkm_position(model, q, FrameId::foot(leg));
    values.push_back(subfield_value(path, params, leg, p));
  }
  return values;
}

Eigen::Vector3d stance_mean_position(const Stance& stance, const std::vector<ContactArea>& areas) {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  if (stance.contacts.empty()) return mean;
  for (const auto& c : stance.contacts) mean += areas[c.area].point_at(c.uv);
  return mean / stance.contacts.size();
}

Quaternion nearest_waypoint_orientation(const GuidePath& path, const Configuration& q) {
  double best = kInf;
  Quaternion r = path.configs.front().r;
  for (const auto& wp : path.configs) {
    const double d = (wp.p - q.p).squaredNorm();
    if (d < best) {
      best = d;
      r = wp.r;
    }
  }
  return r;
}

}  // namespace rhcp
