#include "rhcp/support_region.hpp"

#include <cmath>

namespace rhcp {
namespace {

struct BalanceLp {
  Eigen::MatrixXd A_ub;
  Eigen::VectorXd b_ub;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd lb, ub;
  int n_vars = 0;
};

// Variables are the stacked contact forces, optionally followed by the COM
// (x, y) when it is free. Pyramid rows use the inscribed polyhedral cone:
// u_j . f <= mu cos(pi/k) n . f, plus n . f >= 0.
BalanceLp build_lp(const std::vector<ContactSpec>& contacts, double mass,
                   const BalanceParams& params, bool free_com,
                   const Eigen::Vector2d& com_xy = Eigen::Vector2d::Zero()) {
  const int nc = static_cast<int>(contacts.size());
  const int nf = 3 * nc;
  BalanceLp lp;
  lp.n_vars = nf + (free_com ? 2 : 0);

  int n_rows = 0;
  for (const auto& c : contacts) n_rows += c.pyramid_sides + 1;
  lp.A_ub = Eigen::MatrixXd::Zero(n_rows, lp.n_vars);
  lp.b_ub = Eigen::VectorXd::Zero(n_rows);

  int row = 0;
  for (int i = 0; i < nc; ++i) {
    const ContactSpec& c = contacts[i];
    Eigen::Vector3d t1, t2;
    tangent_basis(c.normal, t1, t2);
    const double mu_eff = c.mu * std::cos(M_PI / c.pyramid_sides);
    for (int j = 0; j < c.pyramid_sides; ++j) {
      const double ang = 2.0 * M_PI * j / c.pyramid_sides;
      const Eigen::Vector3d u = std::cos(ang) * t1 + std::sin(ang) * t2;
      lp.A_ub.block<1, 3>(row, 3 * i) = (u - mu_eff * c.normal).transpose();
      ++row;
    }
    lp.A_ub.block<1, 3>(row, 3 * i) = -c.normal.transpose();
    ++row;
  }

  const double mg = mass * params.gravity;
  lp.A_eq = Eigen::MatrixXd::Zero(6, lp.n_vars);
  lp.b_eq = Eigen::VectorXd::Zero(6);
  for (int i = 0; i < nc; ++i) {
    lp.A_eq.block<3, 3>(0, 3 * i) = Eigen::Matrix3d::Identity();
    lp.A_eq.block<3, 3>(3, 3 * i) = skew(contacts[i].position);
  }
  lp.b_eq(2) = mg;
  // Moment balance: sum p_i x f_i = c x (0, 0, mg) = (c_y mg, -c_x mg, 0).
  if (free_com) {
    lp.A_eq(3, nf + 1) = -mg;
    lp.A_eq(4, nf) = mg;
  } else {
    lp.b_eq(3) = com_xy.y() * mg;
    lp.b_eq(4) = -com_xy.x() * mg;
  }

  lp.lb = Eigen::VectorXd::Constant(lp.n_vars, -kInf);
  lp.ub = Eigen::VectorXd::Constant(lp.n_vars, kInf);
  for (int i = 0; i < nc; ++i) {
    lp.lb.segment<3>(3 * i) = params.f_min;
    lp.ub.segment<3>(3 * i) = params.f_max;
  }
  return lp;
}

}  // namespace

void tangent_basis(const Eigen::Vector3d& n, Eigen::Vector3d& t1, Eigen::Vector3d& t2) {
  if (std::abs(n.z()) < 0.9)
    t1 = n.cross(Eigen::Vector3d::UnitZ()).normalized();
  else
    t1 = n.cross(Eigen::Vector3d::UnitX()).normalized();
  t2 = n.cross(t1);
}

double SupportRegion::area() const {
  double a = 0.0;
  const int n = static_cast<int>(vertices.size());
  for (int i = 0; i < n; ++i) {
    const auto& p = vertices[i];
    const auto& q = vertices[(i + 1) % n];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

Eigen::Vector2d SupportRegion::centroid() const {
  const int n = static_cast<int>(vertices.size());
  if (n == 0) throw DegenerateRegion();
  if (n <= 2) {
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (const auto& v : vertices) c += v;
    return c / n;
  }
  const double a = area();
  if (std::abs(a) < 1e-15) {
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (const auto& v : vertices) c += v;
    return c / n;
  }
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (int i = 0; i < n; ++i) {
    const auto& p = vertices[i];
    const auto& q = vertices[(i + 1) % n];
    const double w = p.x() * q.y() - q.x() * p.y();
    c += w * (p + q);
  }
  return c / (6.0 * a);
}

bool SupportRegion::contains(const Eigen::Vector2d& p, double tol) const {
  const int n = static_cast<int>(vertices.size());
  if (n < 3) return false;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d e = vertices[(i + 1) % n] - vertices[i];
    const Eigen::Vector2d d = p - vertices[i];
    if (e.x() * d.y() - e.y() * d.x() < -tol) return false;
  }
  return true;
}

double SupportRegion::signed_distance(const Eigen::Vector2d& p) const {
  const int n = static_cast<int>(vertices.size());
  if (n == 0) return kInf;
  if (n == 1) return (p - vertices[0]).norm();
  double dist = kInf;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d a = vertices[i];
    const Eigen::Vector2d b = vertices[(i + 1) % n];
    const Eigen::Vector2d e = b - a;
    const double len2 = e.squaredNorm();
    const double t = len2 > 0 ? std::clamp((p - a).dot(e) / len2, 0.0, 1.0) : 0.0;
    dist = std::min(dist, (p - (a + t * e)).norm());
  }
  return contains(p) ? -dist : dist;
}

WrenchCertificate wrench_feasible(const std::vector<ContactSpec>& contacts,
                                  const Eigen::Vector2d& com_xy, double mass,
                                  const BalanceParams& params) {
  WrenchCertificate cert;
  if (contacts.empty()) return cert;
  const BalanceLp lp = build_lp(contacts, mass, params, false, com_xy);
  const Eigen::VectorXd c = Eigen::VectorXd::Zero(lp.n_vars);
  const LpResult r = solve_lp(c, lp.A_ub, lp.b_ub, lp.A_eq, lp.b_eq, lp.lb, lp.ub);
  if (r.status == SolveStatus::MaxIterations || r.status == SolveStatus::Unbounded)
    throw SolverFailure("wrench feasibility LP failed");
  cert.feasible = r.ok();
  if (cert.feasible) {
    for (size_t i = 0; i < contacts.size(); ++i)
      cert.forces.push_back(r.x.segment<3>(3 * static_cast<int>(i)));
  }
  return cert;
}

namespace {

struct ExpVertex {
  Eigen::Vector2d v;    // LP optimizer
  Eigen::Vector2d dir;  // supporting direction (unit)
  bool edge_done = false;  // edge from this vertex to the next cannot grow
};

std::optional<Eigen::Vector2d> support_lp(const BalanceLp& lp, const Eigen::Vector2d& dir) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(lp.n_vars);
  c(lp.n_vars - 2) = -dir.x();
  c(lp.n_vars - 1) = -dir.y();
  const LpResult r = solve_lp(c, lp.A_ub, lp.b_ub, lp.A_eq, lp.b_eq, lp.lb, lp.ub);
  if (r.status == SolveStatus::Unbounded || r.status == SolveStatus::MaxIterations)
    throw SolverFailure("support-direction LP failed");
  if (!r.ok()) return std::nullopt;
  return Eigen::Vector2d(r.x(lp.n_vars - 2), r.x(lp.n_vars - 1));
}

// Possible area gain of an edge: triangle between the edge and the
// intersection of its endpoint support lines.
double edge_gain(const ExpVertex& a, const ExpVertex& b) {
  Eigen::Matrix2d M;
  M.row(0) = a.dir.transpose();
  M.row(1) = b.dir.transpose();
  const double det = M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
  if (std::abs(det) < 1e-12) return 0.0;  // parallel support lines
  const Eigen::Vector2d rhs(a.dir.dot(a.v), b.dir.dot(b.v));
  const Eigen::Vector2d w = M.inverse() * rhs;
  const Eigen::Vector2d e = b.v - a.v;
  const Eigen::Vector2d d = w - a.v;
  return 0.5 * std::abs(e.x() * d.y() - e.y() * d.x());
}

}  // namespace

SupportRegion compute_region(const std::vector<ContactSpec>& contacts, double mass,
                             const BalanceParams& params) {
  SupportRegion region;
  if (contacts.empty()) return region;
  const BalanceLp lp = build_lp(contacts, mass, params, true);

  std::vector<ExpVertex> poly;
  for (int k = 0; k < 3; ++k) {
    const double ang = M_PI / 2 + 2.0 * M_PI * k / 3.0;
    const Eigen::Vector2d dir(std::cos(ang), std::sin(ang));
    const auto v = support_lp(lp, dir);
    if (!v) return region;  // infeasible: empty region
    bool dup = false;
    for (const auto& e : poly)
      if ((e.v - *v).norm() < 1e-10) dup = true;
    if (!dup) poly.push_back({*v, dir, false});
  }

  if (poly.size() >= 3) {
    // Ensure CCW orientation.
    const Eigen::Vector2d e1 = poly[1].v - poly[0].v;
    const Eigen::Vector2d e2 = poly[2].v - poly[0].v;
    if (e1.x() * e2.y() - e1.y() * e2.x() < 0.0) std::swap(poly[1], poly[2]);
  }

  const int max_vertices = 64;
  while (static_cast<int>(poly.size()) < max_vertices) {
    if (poly.size() < 2) break;
    double best = 0.0;
    int best_i = -1;
    const int n = static_cast<int>(poly.size());
    for (int i = 0; i < n; ++i) {
      if (poly[i].edge_done) continue;
      const double gain = edge_gain(poly[i], poly[(i + 1) % n]);
      if (gain > best) {
        best = gain;
        best_i = i;
      }
    }
    if (best_i < 0 || best < params.eps_area) break;

    const Eigen::Vector2d a = poly[best_i].v;
    const Eigen::Vector2d b = poly[(best_i + 1) % n].v;
    Eigen::Vector2d normal(b.y() - a.y(), a.x() - b.x());  // outward for CCW
    const double len = normal.norm();
    if (len < 1e-12) {
      poly[best_i].edge_done = true;
      continue;
    }
    normal /= len;
    const auto v = support_lp(lp, normal);
    if (!v) throw SolverFailure("expansion LP infeasible after feasible start");
    const double improvement = normal.dot(*v) - normal.dot(a);
    if (improvement < 1e-9 || (*v - a).norm() < 1e-9 || (*v - b).norm() < 1e-9) {
      poly[best_i].edge_done = true;
      continue;
    }
    poly.insert(poly.begin() + best_i + 1, {*v, normal, false});
  }

  region.vertices.reserve(poly.size());
  for (const auto& e : poly) region.vertices.push_back(e.v);
  return region;
}

std::vector<Plane> region_planes(const SupportRegion& region) {
  if (region.degenerate()) throw DegenerateRegion();
  std::vector<Plane> planes;
  const int n = static_cast<int>(region.vertices.size());
  planes.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d a = region.vertices[i];
    const Eigen::Vector2d b = region.vertices[(i + 1) % n];
    Eigen::Vector2d normal(b.y() - a.y(), a.x() - b.x());
    const double len = normal.norm();
    if (len < 1e-12) continue;  // collapsed edge
    normal /= len;
    planes.push_back(plane_from_point_normal({a.x(), a.y(), 0.0}, {normal.x(), normal.y(), 0.0}));
  }
  return planes;
}

Line centroid_line(const SupportRegion& region) {
  if (region.empty()) throw DegenerateRegion();
  const Eigen::Vector2d c = region.centroid();
  return line_from_point_direction({c.x(), c.y(), 0.0}, Eigen::Vector3d::UnitZ());
}

}  // namespace rhcp
