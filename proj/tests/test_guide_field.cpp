#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rhcp/guide_field.hpp"

using namespace rhcp;

namespace {

Configuration nominal(const RobotModel& m) {
  Configuration q;
  q.p = {0, 0, 0.24};
  q.theta = Eigen::VectorXd::Zero(m.n_theta());
  for (int leg = 0; leg < m.n_legs(); ++leg) {
    q.theta(3 * leg + 1) = 0.5;
    q.theta(3 * leg + 2) = 1.0;
  }
  return q;
}

std::vector<Configuration> straight_path(const RobotModel& m, int count, double spacing) {
  std::vector<Configuration> wps;
  Configuration q = nominal(m);
  for (int i = 0; i < count; ++i) {
    Configuration w = q;
    w.p.x() += spacing * i;
    wps.push_back(w);
  }
  return wps;
}

}  // namespace

TEST_CASE("path construction") {
  const RobotModel m = default_hexapod();

  SUBCASE("two collinear waypoints, 1 m apart") {
    const GuidePath path = build_path(m, straight_path(m, 2, 1.0));
    for (int leg = 0; leg < 6; ++leg) {
      REQUIRE(path.patches[leg].segments.size() == 1);
      const auto& seg = path.patches[leg].segments[0];
      CHECK(seg.line.dir3().isApprox(Eigen::Vector3d::UnitX(), 1e-12));
      CHECK(seg.plane.normal3().isApprox(-Eigen::Vector3d::UnitX(), 1e-12));
      CHECK(seg.lump_after == 0.0);
    }
  }

  SUBCASE("coincident per-patch waypoints drop the segment") {
    std::vector<Configuration> wps = straight_path(m, 2, 1.0);
    wps.push_back(wps.back());  // duplicate final waypoint
    const GuidePath path = build_path(m, wps);
    for (int leg = 0; leg < 6; ++leg) CHECK(path.patches[leg].segments.size() == 1);
  }

  SUBCASE("4 waypoints give 3 segments and 3 planes per patch") {
    const GuidePath path = build_path(m, straight_path(m, 4, 0.5));
    for (int leg = 0; leg < 6; ++leg) CHECK(path.patches[leg].segments.size() == 3);
  }

  SUBCASE("fewer than 2 waypoints throw") {
    CHECK_THROWS_AS(build_path(m, straight_path(m, 1, 1.0)), TooFewWaypoints);
  }
}

TEST_CASE("closest segment selection") {
  const RobotModel m = default_hexapod();
  const GuidePath path = build_path(m, straight_path(m, 4, 1.0));
  const FieldParams params;
  const Eigen::Vector3d w0 = path.patches[0].waypoints[0];

  SUBCASE("point beside the middle segment") {
    const Eigen::Vector3d p = w0 + Eigen::Vector3d(1.5, 0.2, 0.0);
    CHECK(closest_segment(path, params, 0, p) == 1);
  }

  SUBCASE("point beyond the final waypoint clamps to the last segment") {
    const Eigen::Vector3d p = w0 + Eigen::Vector3d(5.0, 0.0, 0.0);
    CHECK(closest_segment(path, params, 0, p) == 2);
  }

  SUBCASE("tie at a waypoint resolves to the lower-potential (later) segment") {
    // Exactly at the shared waypoint between segments 0 and 1.
    const Eigen::Vector3d p = w0 + Eigen::Vector3d(1.0, 0.0, 0.0);
    const int k = closest_segment(path, params, 0, p);
    CHECK(k == 1);
    // Explicitly verify it is the lower-potential candidate.
    const double u1 = subfield_value(path, params, 0, p);
    CHECK(u1 == doctest::Approx(params.alpha * (1.0 + 1.0)));  // plane 1 m + lump 1 m^2
  }
}

TEST_CASE("patch sub-field values") {
  const RobotModel m = default_hexapod();
  const FieldParams params;  // alpha = 1
  const GuidePath path = build_path(m, straight_path(m, 4, 1.0));

  SUBCASE("zero exactly at the final waypoint") {
    for (int leg = 0; leg < 6; ++leg) {
      const Eigen::Vector3d p = path.patches[leg].waypoints.back();
      CHECK(subfield_value(path, params, leg, p) == doctest::Approx(0.0).epsilon(1e-12));
    }
  }

  SUBCASE("unit-spacing path evaluated at the first waypoint") {
    const Eigen::Vector3d p = path.patches[0].waypoints[0];
    // Line term 0, plane distance 1, lump 1^2 + 1^2 = 2.
    CHECK(subfield_value(path, params, 0, p) == doctest::Approx(3.0 * params.alpha));
  }

  SUBCASE("lateral displacement adds the squared line distance") {
    const Eigen::Vector3d p = path.patches[0].waypoints[0] + Eigen::Vector3d(0, 0.5, 0);
    const double base = subfield_value(path, params, 0, path.patches[0].waypoints[0]);
    CHECK(subfield_value(path, params, 0, p) == doctest::Approx(base + 0.25));
  }

  SUBCASE("jacobian matches finite differences for a fixed segment") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    const Eigen::MatrixXd I3 = Eigen::MatrixXd::Identity(3, 3);
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::Vector3d p =
          path.patches[0].waypoints[1] + Eigen::Vector3d(0.5 + u(rng), u(rng), u(rng));
      const int k = closest_segment(path, params, 0, p);
      const auto sf = patch_subfield(path, params, 0, p, I3);
      Eigen::RowVectorXd J_fd(3);
      const double h = 1e-6;
      for (int i = 0; i < 3; ++i) {
        Eigen::Vector3d pp = p, pm = p;
        pp(i) += h;
        pm(i) -= h;
        if (closest_segment(path, params, 0, pp) != k ||
            closest_segment(path, params, 0, pm) != k)
          continue;  // keep the segment frozen
        J_fd(i) = (subfield_value(path, params, 0, pp) - subfield_value(path, params, 0, pm)) /
                  (2 * h);
        CHECK(std::abs(sf.J(i) - J_fd(i)) < 1e-5);
      }
    }
  }

  SUBCASE("non-negative everywhere") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 500; ++i) {
      const Eigen::Vector3d p(u(rng), u(rng), u(rng));
      CHECK(subfield_value(path, FieldParams{}, i % 6, p) >= 0.0);
    }
  }

  SUBCASE("monotone non-increasing along the patch polyline") {
    for (int leg = 0; leg < 6; ++leg) {
      const auto& wpts = path.patches[leg].waypoints;
      double prev = kInf;
      const int samples = 200;
      for (int s = 0; s <= samples; ++s) {
        const double t = static_cast<double>(s) / samples * (wpts.size() - 1);
        const int j = std::min<int>(static_cast<int>(t), wpts.size() - 2);
        const Eigen::Vector3d p = wpts[j] + (t - j) * (wpts[j + 1] - wpts[j]);
        const double val = subfield_value(path, FieldParams{}, leg, p);
        CHECK(val <= prev + 1e-9);
        prev = val;
      }
      CHECK(prev == doctest::Approx(0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("patch set assignment and weighted field") {
  const RobotModel m = default_hexapod();
  const Configuration q = nominal(m);

  SUBCASE("goal ahead: front pair near, rear pair far") {
    const Eigen::Vector3d goal(2.0, 0.0, 0.0);
    const auto sets = assign_patch_sets(m, q, goal);
    CHECK(sets[0] == PatchSet::Near);  // front right
    CHECK(sets[3] == PatchSet::Near);  // front left
    CHECK(sets[2] == PatchSet::Far);   // rear right
    CHECK(sets[5] == PatchSet::Far);   // rear left
    CHECK(sets[1] == PatchSet::Mid);
    CHECK(sets[4] == PatchSet::Mid);
  }

  SUBCASE("equidistant patches split deterministically by index") {
    // All legs mounted identically: every foot is bitwise equidistant.
    RobotModel same = m;
    for (auto& leg : same.legs) {
      leg.mount = {0.1, 0.0, 0.0};
      leg.mount_yaw = 0.0;
    }
    Configuration qs = q;
    qs.theta.setZero();
    const auto sets = assign_patch_sets(same, qs, {1.0, 0.0, 0.0});
    CHECK(sets[0] == PatchSet::Near);
    CHECK(sets[1] == PatchSet::Near);
    CHECK(sets[2] == PatchSet::Mid);
    CHECK(sets[3] == PatchSet::Mid);
    CHECK(sets[4] == PatchSet::Far);
    CHECK(sets[5] == PatchSet::Far);
  }

  SUBCASE("exactly two near and two far, weights inside (0,2)") {
    FieldParams params;
    params.b_offset = 0.7;
    const auto sets = assign_patch_sets(m, q, {1.0, 0.5, 0.0});
    int near = 0, far = 0;
    for (const auto s : sets) {
      const double w = patch_weight(s, params);
      CHECK(w > 0.0);
      CHECK(w < 2.0);
      near += s == PatchSet::Near;
      far += s == PatchSet::Far;
    }
    CHECK(near == 2);
    CHECK(far == 2);
  }

  SUBCASE("wrong patch count throws") {
    RobotModel quad = m;
    quad.legs.resize(4);
    Configuration q4 = q;
    q4.theta = Eigen::VectorXd::Zero(12);
    CHECK_THROWS_AS(assign_patch_sets(quad, q4, Eigen::Vector3d::Zero()), WrongPatchCount);
  }
}

TEST_CASE("total field") {
  const RobotModel m = default_hexapod();
  const GuidePath path = build_path(m, straight_path(m, 3, 0.5));
  const Configuration q = nominal(m);
  const Eigen::Vector3d goal(1.0, 0.0, 0.0);

  SUBCASE("b = 0 reduces to the unweighted sum") {
    FieldParams flat;
    flat.b_offset = 0.0;
    const auto values = subfield_values(path, flat, m, q);
    double sum = 0.0;
    for (double v : values) sum += v;
    CHECK(total_field(path, flat, m, q, goal) == doctest::Approx(sum).epsilon(1e-12));
  }

  SUBCASE("zero at the goal configuration") {
    const Configuration q_goal = path.configs.back();
    CHECK(total_field(path, FieldParams{}, m, q_goal, goal) ==
          doctest::Approx(0.0).epsilon(1e-9));
  }

  SUBCASE("far-patch progress outweighs near-patch progress") {
    // Move one far foot vs one near foot by the same joint change and compare
    // total-field drops; the far move must win by about (1+b)/(1-b).
    FieldParams params;  // b = 0.5
    const auto sets = assign_patch_sets(m, q, goal);
    int far_leg = -1, near_leg = -1;
    for (int leg = 0; leg < 6; ++leg) {
      if (sets[leg] == PatchSet::Far && far_leg < 0) far_leg = leg;
      if (sets[leg] == PatchSet::Near && near_leg < 0) near_leg = leg;
    }
    const double base = total_field(path, params, m, q, goal);
    auto probe = [&](int leg) {
      Configuration moved = q;
      moved.theta(3 * leg) += (m.legs[leg].mount.y() > 0 ? -0.1 : 0.1);  // swing forward
      return base - total_field(path, params, m, moved, goal);
    };
    const double far_drop = probe(far_leg);
    const double near_drop = probe(near_leg);
    CHECK(far_drop > 0.0);
    // Per-unit-subfield progress is weighted 3x for far vs near here.
    CHECK(far_drop > near_drop);
  }
}
