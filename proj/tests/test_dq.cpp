#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rhcp/dq.hpp"

using namespace rhcp;

namespace {

Quaternion random_unit(std::mt19937& rng) {
  std::normal_distribution<double> g;
  Quaternion q{g(rng), g(rng), g(rng), g(rng)};
  return q.normalized();
}

DualQuaternion random_unit_dq(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Quaternion r = random_unit(rng);
  return DualQuaternion::from_pose(r, {u(rng), u(rng), u(rng)});
}

Eigen::Matrix4d homogeneous(const DualQuaternion& x) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = x.rotation().rotation_matrix();
  m.topRightCorner<3, 1>() = x.translation();
  return m;
}

}  // namespace

TEST_CASE("dual quaternion multiply") {
  std::mt19937 rng(7);

  SUBCASE("identity") {
    const DualQuaternion x = random_unit_dq(rng);
    const DualQuaternion y = DualQuaternion::identity() * x;
    CHECK(y.primary.vec4().isApprox(x.primary.vec4(), 1e-15));
    CHECK(y.dual.vec4().isApprox(x.dual.vec4(), 1e-15));
  }

  SUBCASE("rotation then translation, against homogeneous-matrix composition") {
    const Quaternion r = Quaternion::from_axis_angle(Eigen::Vector3d::UnitZ(), M_PI / 2);
    const DualQuaternion rot{r, {0, 0, 0, 0}};
    const DualQuaternion trans = DualQuaternion::from_pose(Quaternion{}, {1, 0, 0});
    const DualQuaternion pose = multiply(rot, trans);
    // Translation extracted as 2 dual primary* equals p rotated by r.
    CHECK(pose.translation().isApprox(Eigen::Vector3d(0, 1, 0), 1e-12));
    CHECK(homogeneous(pose).isApprox(homogeneous(rot) * homogeneous(trans), 1e-12));
  }

  SUBCASE("random pairs match homogeneous composition") {
    for (int i = 0; i < 200; ++i) {
      const DualQuaternion a = random_unit_dq(rng), b = random_unit_dq(rng);
      CHECK(homogeneous(multiply(a, b)).isApprox(homogeneous(a) * homogeneous(b), 1e-10));
    }
  }

  SUBCASE("x times conj(x) is identity") {
    const DualQuaternion x = random_unit_dq(rng);
    const DualQuaternion e = x * x.conj();
    CHECK(std::abs(e.primary.w - 1.0) < 1e-12);
    CHECK(e.primary.vec3().norm() < 1e-12);
    CHECK(e.dual.vec4().norm() < 1e-12);
  }

  SUBCASE("unit times unit stays unit, 1e4 random pairs") {
    for (int i = 0; i < 10000; ++i) {
      const DualQuaternion a = random_unit_dq(rng), b = random_unit_dq(rng);
      CHECK((a * b).is_unit(1e-9));
    }
  }
}

TEST_CASE("exp of pure dual quaternions") {
  SUBCASE("exp(0) is identity") {
    const DualQuaternion e = exp_unit({{0, 0, 0, 0}, {0, 0, 0, 0}});
    CHECK(std::abs(e.primary.w - 1.0) < 1e-15);
    CHECK(e.primary.vec3().norm() < 1e-15);
    CHECK(e.dual.vec4().norm() < 1e-15);
  }

  SUBCASE("pure translation closed form") {
    const DualQuaternion xi{{0, 0, 0, 0}, Quaternion::pure({0.05, 0, 0})};
    const DualQuaternion x = exp_unit(xi);
    CHECK(x.translation().isApprox(Eigen::Vector3d(0.1, 0, 0), 1e-14));
    CHECK(x.is_unit());
  }

  SUBCASE("axis-angle closed form") {
    const DualQuaternion xi{Quaternion::pure({0, 0, M_PI / 4}), {0, 0, 0, 0}};
    const DualQuaternion x = exp_unit(xi);
    const double c = std::sqrt(2.0) / 2.0;
    CHECK(x.primary.w == doctest::Approx(c).epsilon(1e-12));
    CHECK(x.primary.z == doctest::Approx(c).epsilon(1e-12));
    CHECK(x.is_unit());
  }

  SUBCASE("exp then log recovers xi for |xi| < pi/2") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    for (int i = 0; i < 500; ++i) {
      const DualQuaternion xi{Quaternion::pure({u(rng), u(rng), u(rng)}),
                              Quaternion::pure({u(rng), u(rng), u(rng)})};
      const DualQuaternion back = log_unit(exp_unit(xi));
      CHECK((back.primary.vec3() - xi.primary.vec3()).norm() < 1e-8);
      CHECK((back.dual.vec3() - xi.dual.vec3()).norm() < 1e-8);
    }
  }

  SUBCASE("output unit for random pure inputs") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 2000; ++i) {
      const DualQuaternion xi{Quaternion::pure({u(rng), u(rng), u(rng)}),
                              Quaternion::pure({u(rng), u(rng), u(rng)})};
      CHECK(exp_unit(xi).is_unit(1e-9));
    }
  }
}

TEST_CASE("lines from points") {
  SUBCASE("x axis") {
    const Line l = line_from_points({0, 0, 0}, {1, 0, 0});
    CHECK(l.dir3().isApprox(Eigen::Vector3d::UnitX()));
    CHECK(l.moment3().norm() < 1e-15);
  }

  SUBCASE("offset line moment by hand") {
    const Line l = line_from_points({0, 1, 0}, {1, 1, 0});
    CHECK(l.dir3().isApprox(Eigen::Vector3d::UnitX()));
    CHECK(l.moment3().isApprox(Eigen::Vector3d(0, 0, -1)));
  }

  SUBCASE("coincident points throw") {
    CHECK_THROWS_AS(line_from_points({0, 0, 0}, {0, 0, 0}), CoincidentPoints);
  }

  SUBCASE("translation along own direction leaves the line unchanged") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
      const Eigen::Vector3d p1(u(rng), u(rng), u(rng));
      const Eigen::Vector3d p2(u(rng), u(rng), u(rng));
      if ((p2 - p1).norm() < 1e-3) continue;
      const Line a = line_from_points(p1, p2);
      const Eigen::Vector3d shift = u(rng) * a.dir3();
      const Line b = line_from_points(p1 + shift, p2 + shift);
      CHECK(a.dir3().isApprox(b.dir3(), 1e-9));
      CHECK((a.moment3() - b.moment3()).norm() < 1e-9);
    }
  }
}

TEST_CASE("planes from point and normal") {
  SUBCASE("direct evaluation") {
    const Plane pl = plane_from_point_normal({1, 0, 0}, {-1, 0, 0});
    CHECK(pl.normal3().isApprox(-Eigen::Vector3d::UnitX()));
    CHECK(pl.offset == doctest::Approx(-1.0));
  }

  SUBCASE("z = 2 plane") {
    const Plane pl = plane_from_point_normal({0, 0, 2}, {0, 0, 1});
    CHECK(pl.normal3().isApprox(Eigen::Vector3d::UnitZ()));
    CHECK(pl.offset == doctest::Approx(2.0));
  }

  SUBCASE("zero normal throws") {
    CHECK_THROWS_AS(plane_from_point_normal({1, 2, 3}, {0, 0, 0}), ZeroNormal);
  }

  SUBCASE("scale invariance in the normal") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
      const Eigen::Vector3d p(u(rng), u(rng), u(rng));
      Eigen::Vector3d n(u(rng), u(rng), u(rng));
      if (n.norm() < 1e-3) continue;
      const Plane a = plane_from_point_normal(p, n);
      const Plane b = plane_from_point_normal(p, 2.0 * n);
      CHECK(a.normal3().isApprox(b.normal3(), 1e-12));
      CHECK(a.offset == doctest::Approx(b.offset).epsilon(1e-12));
    }
  }
}
