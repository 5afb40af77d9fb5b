#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rhcp/support_region.hpp"

using namespace rhcp;

namespace {

ContactSpec flat(double x, double y, double mu = 1.0) {
  ContactSpec c;
  c.position = {x, y, 0.0};
  c.normal = Eigen::Vector3d::UnitZ();
  c.mu = mu;
  return c;
}

BalanceParams generous() {
  BalanceParams p;
  p.f_min = {-200, -200, 0};
  p.f_max = {200, 200, 200};
  return p;
}

}  // namespace

TEST_CASE("wrench feasibility basics") {
  const double mass = 3.0;
  BalanceParams p = generous();

  SUBCASE("single contact carries the weight only directly underneath") {
    const std::vector<ContactSpec> contacts{flat(0, 0)};
    const auto ok = wrench_feasible(contacts, {0, 0}, mass, p);
    REQUIRE(ok.feasible);
    CHECK(ok.forces[0].isApprox(Eigen::Vector3d(0, 0, mass * p.gravity), 1e-6));
    CHECK_FALSE(wrench_feasible(contacts, {0.1, 0}, mass, p).feasible);
  }

  SUBCASE("frictionless chimney cannot balance anywhere") {
    ContactSpec left, right;
    left.position = {0, -0.3, 0.0};
    left.normal = Eigen::Vector3d::UnitY();  // pushing off the left wall
    left.mu = 0.0;
    right.position = {0, 0.3, 0.0};
    right.normal = -Eigen::Vector3d::UnitY();
    right.mu = 0.0;
    const std::vector<ContactSpec> contacts{left, right};
    for (double x : {-0.2, 0.0, 0.2})
      for (double y : {-0.2, 0.0, 0.2})
        CHECK_FALSE(wrench_feasible(contacts, {x, y}, mass, p).feasible);
  }

  SUBCASE("friction chimney balances between the walls") {
    ContactSpec left, right;
    left.position = {0, -0.3, 0.0};
    left.normal = Eigen::Vector3d::UnitY();
    left.mu = 1.0;
    right.position = {0, 0.3, 0.0};
    right.normal = -Eigen::Vector3d::UnitY();
    right.mu = 1.0;
    CHECK(wrench_feasible({left, right}, {0, 0}, mass, p).feasible);
  }
}

TEST_CASE("region expansion against the grid oracle") {
  const double mass = 3.0;
  BalanceParams p = generous();

  SUBCASE("triangle of high-friction contacts recovers the contact triangle") {
    const std::vector<ContactSpec> contacts{flat(0, 0), flat(0.4, 0), flat(0.2, 0.35)};
    const SupportRegion region = compute_region(contacts, mass, p);
    REQUIRE_FALSE(region.degenerate());
    // Vertices are sound.
    for (const auto& v : region.vertices) CHECK(wrench_feasible(contacts, v, mass, p).feasible);
    // Hausdorff-style check against the contact triangle on a 1 cm grid.
    SupportRegion triangle;
    triangle.vertices = {{0, 0}, {0.4, 0}, {0.2, 0.35}};
    for (double x = -0.05; x <= 0.45; x += 0.01) {
      for (double y = -0.05; y <= 0.40; y += 0.01) {
        const Eigen::Vector2d pt(x, y);
        const double d_tri = triangle.signed_distance(pt);
        const double d_reg = region.signed_distance(pt);
        // The region is an inner approximation of the triangle, close to it.
        if (d_reg < -1e-9) CHECK(d_tri < 0.02);
        if (d_tri < -0.02) CHECK(d_reg < 0.01);
      }
    }
  }

  SUBCASE("tight force limits cut the region off before the contacts") {
    const double mg = mass * 9.81;
    BalanceParams tight = p;
    tight.f_max = {50, 50, 0.55 * mg};  // each contact barely above mg/2
    const std::vector<ContactSpec> contacts{flat(0, 0), flat(0.4, 0), flat(0.2, 0.35)};
    const SupportRegion region = compute_region(contacts, mass, tight);
    REQUIRE_FALSE(region.degenerate());
    for (const auto& c : contacts) {
      const Eigen::Vector2d cxy(c.position.x(), c.position.y());
      CHECK(region.signed_distance(cxy) > 0.03);
      CHECK_FALSE(wrench_feasible(contacts, cxy, mass, tight).feasible);
    }
    // Middle of the triangle is still fine.
    CHECK(region.contains({0.2, 0.12}));
  }

  SUBCASE("zero contacts give an empty region") {
    CHECK(compute_region({}, mass, p).empty());
  }

  SUBCASE("single contact gives the degenerate point region") {
    const SupportRegion region = compute_region({flat(0.1, 0.2)}, mass, p);
    REQUIRE(region.vertices.size() == 1);
    CHECK((region.vertices[0] - Eigen::Vector2d(0.1, 0.2)).norm() < 1e-6);
  }
}

TEST_CASE("region planes") {
  SupportRegion square;
  square.vertices = {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};

  SUBCASE("unit square has axis-aligned outward planes") {
    const auto planes = region_planes(square);
    REQUIRE(planes.size() == 4);
    std::vector<Eigen::Vector3d> expected{{0, -1, 0}, {1, 0, 0}, {0, 1, 0}, {-1, 0, 0}};
    for (size_t i = 0; i < 4; ++i) CHECK(planes[i].normal3().isApprox(expected[i], 1e-12));
  }

  SUBCASE("interior point has negative distance to all planes") {
    for (const auto& pl : region_planes(square)) {
      const double d = Eigen::Vector3d(0.1, -0.2, 0.0).dot(pl.normal3()) - pl.offset;
      CHECK(d < 0.0);
    }
  }

  SUBCASE("vertices lie on exactly their incident planes") {
    const auto planes = region_planes(square);
    for (size_t i = 0; i < square.vertices.size(); ++i) {
      const Eigen::Vector3d v(square.vertices[i].x(), square.vertices[i].y(), 0.0);
      int on = 0;
      for (const auto& pl : planes)
        if (std::abs(v.dot(pl.normal3()) - pl.offset) <= 1e-9) ++on;
      CHECK(on == 2);
    }
  }

  SUBCASE("degenerate region throws") {
    SupportRegion segment;
    segment.vertices = {{0, 0}, {1, 0}};
    CHECK_THROWS_AS(region_planes(segment), DegenerateRegion);
  }
}

TEST_CASE("centroid line") {
  SUBCASE("centered square") {
    SupportRegion square;
    square.vertices = {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
    const Line l = centroid_line(square);
    CHECK(l.dir3().isApprox(Eigen::Vector3d::UnitZ()));
    CHECK(l.moment3().norm() < 1e-12);
  }

  SUBCASE("translation moves the line identically") {
    SupportRegion square;
    square.vertices = {{1.5, 0.5}, {2.5, 0.5}, {2.5, 1.5}, {1.5, 1.5}};
    const Line l = centroid_line(square);
    // Moment of a vertical line through (2, 1): p x z.
    CHECK(l.moment3().isApprox(Eigen::Vector3d(2, 1, 0).cross(Eigen::Vector3d::UnitZ()), 1e-12));
  }

  SUBCASE("triangle centroid formula") {
    SupportRegion tri;
    tri.vertices = {{0, 0}, {3, 0}, {0, 3}};
    CHECK((tri.centroid() - Eigen::Vector2d(1, 1)).norm() < 1e-12);
  }
}

TEST_CASE("region properties on randomized contact sets") {
  std::mt19937 rng(51);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::uniform_real_distribution<double> mu_dist(0.4, 1.0);
  const double mass = 3.0;
  BalanceParams p = generous();

  for (int trial = 0; trial < 12; ++trial) {
    const int nc = 3 + trial % 4;
    std::vector<ContactSpec> contacts;
    for (int i = 0; i < nc; ++i) contacts.push_back(flat(u(rng), u(rng), mu_dist(rng)));
    const SupportRegion region = compute_region(contacts, mass, p);
    if (region.degenerate()) continue;

    // Soundness: all vertices feasible.
    for (const auto& v : region.vertices) CHECK(wrench_feasible(contacts, v, mass, p).feasible);

    // Monotonicity: an extra contact never shrinks the region.
    std::vector<ContactSpec> more = contacts;
    more.push_back(flat(u(rng), u(rng), mu_dist(rng)));
    const SupportRegion bigger = compute_region(more, mass, p);
    for (const auto& v : region.vertices) CHECK(bigger.signed_distance(v) < 1e-4);

    // Scaling f_max up never shrinks the region.
    BalanceParams scaled = p;
    scaled.f_max *= 2.0;
    scaled.f_min = {-400, -400, 0};
    const SupportRegion wider = compute_region(contacts, mass, scaled);
    for (const auto& v : region.vertices) CHECK(wider.signed_distance(v) < 1e-4);
  }
}
