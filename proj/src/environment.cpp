#include "rhcp/environment.hpp"

#include <algorithm>

namespace rhcp {

Obstacle Obstacle::box(int id, const Eigen::Vector3d& center, const Eigen::Vector3d& size) {
  Obstacle o;
  o.id = id;
  const Eigen::Vector3d h = 0.5 * size;
  for (int axis = 0; axis < 3; ++axis) {
    for (int sign : {-1, 1}) {
      Eigen::Vector3d n = Eigen::Vector3d::Zero();
      n(axis) = sign;
      o.faces.push_back(plane_from_point_normal(center + sign * h(axis) * n.cwiseAbs(), n));
    }
  }
  for (int i = 0; i < 8; ++i) {
    o.vertices.push_back(center + Eigen::Vector3d((i & 1 ? 1 : -1) * h.x(),
                                                  (i & 2 ? 1 : -1) * h.y(),
                                                  (i & 4 ? 1 : -1) * h.z()));
  }
  return o;
}

void Obstacle::validate() const {
  if (faces.size() < 4) throw ValidationError("obstacle needs at least 4 faces");
  for (const auto& v : vertices) {
    for (const auto& f : faces) {
      if (v.dot(f.normal3()) - f.offset > 1e-6)
        throw ValidationError("obstacle vertex outside a face: not convex as described");
    }
  }
}

ContactArea ContactArea::rectangle(int id, const Eigen::Vector3d& center,
                                   const Eigen::Vector3d& normal,
                                   const Eigen::Vector3d& tangent_seed, const Eigen::Vector2d& half,
                                   double mu, int obstacle_id) {
  ContactArea a;
  a.id = id;
  a.plane = plane_from_point_normal(center, normal);
  a.centroid = center;
  const Eigen::Vector3d n = a.plane.normal3();
  Eigen::Vector3d t1 = tangent_seed - tangent_seed.dot(n) * n;
  if (t1.norm() < 1e-9) throw ValidationError("tangent seed parallel to area normal");
  a.t1 = t1.normalized();
  a.t2 = n.cross(a.t1);
  a.half_extents = half;
  a.mu = mu;
  a.obstacle_id = obstacle_id;
  a.boundary = {
      plane_from_point_normal(center + half.x() * a.t1, a.t1),
      plane_from_point_normal(center - half.x() * a.t1, -a.t1),
      plane_from_point_normal(center + half.y() * a.t2, a.t2),
      plane_from_point_normal(center - half.y() * a.t2, -a.t2),
  };
  return a;
}

Eigen::Vector3d ContactArea::closest_point(const Eigen::Vector3d& p) const {
  const Eigen::Vector2d uv = uv_of(p);
  const Eigen::Vector2d clamped(std::clamp(uv.x(), -half_extents.x(), half_extents.x()),
                                std::clamp(uv.y(), -half_extents.y(), half_extents.y()));
  return point_at(clamped);
}

void ContactArea::validate() const {
  const Eigen::Vector3d n = plane.normal3();
  for (const auto& b : boundary) {
    if (std::abs(b.normal3().dot(n)) > 1e-6)
      throw ValidationError("area boundary normal not in the plane's tangent space");
    const double d = centroid.dot(b.normal3()) - b.offset;
    if (d > 1e-9) throw ValidationError("area centroid outside a boundary plane");
  }
}

void Stance::set(const Contact& c) {
  remove(c.patch);
  contacts.push_back(c);
  std::sort(contacts.begin(), contacts.end(),
            [](const Contact& a, const Contact& b) { return a.patch < b.patch; });
}

void Stance::remove(int patch) {
  contacts.erase(std::remove_if(contacts.begin(), contacts.end(),
                                [patch](const Contact& c) { return c.patch == patch; }),
                 contacts.end());
}

const Contact* Stance::find(int patch) const {
  for (const auto& c : contacts)
    if (c.patch == patch) return &c;
  return nullptr;
}

std::optional<Plane> separating_face(const Obstacle& obstacle, const Eigen::Vector3d& p) {
  double best = -kInf;
  const Plane* face = nullptr;
  for (const auto& f : obstacle.faces) {
    const double d = p.dot(f.normal3()) - f.offset;
    if (d > best) {
      best = d;
      face = &f;
    }
  }
  if (best <= 0.0 || face == nullptr) return std::nullopt;
  return *face;
}

std::vector<std::pair<int, Plane>> assign_collision_planes(const std::vector<Obstacle>& obstacles,
                                                           const Eigen::Vector3d& body_position) {
  std::vector<std::pair<int, Plane>> active;
  for (const auto& o : obstacles) {
    const auto face = separating_face(o, body_position);
    if (!face) throw BodyInsideObstacle();
    active.push_back({o.id, *face});
  }
  return active;
}

}  // namespace rhcp
