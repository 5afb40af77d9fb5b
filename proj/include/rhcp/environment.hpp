#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rhcp/dq.hpp"

namespace rhcp {

struct BodyInsideObstacle : std::runtime_error {
  BodyInsideObstacle() : std::runtime_error("body position lies inside an obstacle") {}
};
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Convex obstacle described by its face planes (outward normals); vertices
/// are kept for validation.
struct Obstacle {
  int id = 0;
  std::vector<Plane> faces;
  std::vector<Eigen::Vector3d> vertices;

  /// Axis-aligned box helper.
  static Obstacle box(int id, const Eigen::Vector3d& center, const Eigen::Vector3d& size);
  void validate() const;
};

/// Planar contact area: the supporting plane (normal pointing outwards), its
/// boundary planes (normals outward of the patch, lying in the tangent space),
/// centroid, and a deterministic in-plane frame for contact coordinates.
struct ContactArea {
  int id = 0;
  Plane plane;
  std::vector<Plane> boundary;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  Eigen::Vector3d t1 = Eigen::Vector3d::UnitX(), t2 = Eigen::Vector3d::UnitY();
  double mu = 0.5;
  int pyramid_sides = 4;
  int obstacle_id = -1;  // owning obstacle, -1 when free-standing
  Eigen::Vector2d half_extents = {0.1, 0.1};  // for rectangular areas

  /// Rectangular area helper: centroid, outward normal, tangent seed, half sizes.
  static ContactArea rectangle(int id, const Eigen::Vector3d& center, const Eigen::Vector3d& normal,
                               const Eigen::Vector3d& tangent_seed, const Eigen::Vector2d& half,
                               double mu = 0.5, int obstacle_id = -1);

  Eigen::Vector3d point_at(const Eigen::Vector2d& uv) const { return centroid + uv.x() * t1 + uv.y() * t2; }
  Eigen::Vector2d uv_of(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d d = p - centroid;
    return {d.dot(t1), d.dot(t2)};
  }
  /// Closest point of the (rectangular) area to p, for reach checks.
  Eigen::Vector3d closest_point(const Eigen::Vector3d& p) const;
  void validate() const;
};

/// A contact binds a patch (foot) to a location on an area, stored in the
/// area's in-plane coordinates.
struct Contact {
  int patch = 0;
  int area = 0;
  Eigen::Vector2d uv = Eigen::Vector2d::Zero();
};

/// Set of simultaneous contacts, at most one per patch, kept sorted by patch.
struct Stance {
  std::vector<Contact> contacts;

  void set(const Contact& c);
  void remove(int patch);
  const Contact* find(int patch) const;
  bool has(int patch) const { return find(patch) != nullptr; }
  int size() const { return static_cast<int>(contacts.size()); }
};

/// For each obstacle, the single face with the largest signed distance to the
/// body position (the separating face). Throws when no face separates.
std::vector<std::pair<int, Plane>> assign_collision_planes(const std::vector<Obstacle>& obstacles,
                                                           const Eigen::Vector3d& body_position);

/// Separating face for one obstacle, or nullopt when the body is inside.
std::optional<Plane> separating_face(const Obstacle& obstacle, const Eigen::Vector3d& body_position);

}  // namespace rhcp
