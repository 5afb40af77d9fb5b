#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rhcp/posture_gen.hpp"

using namespace rhcp;

namespace {

struct Fixture {
  Scenario scenario;
  World world;
  RegionCache regions;

  Fixture() : scenario(builtin_scenario("corridor", 0)), world(make_world(scenario)) {}
};

}  // namespace

TEST_CASE("single forward step on flat ground") {
  Fixture f;
  const int patch = 2;
  const PgResult res =
      generate_child(f.world, f.regions, f.scenario.start_stance, f.scenario.start_config, patch, 0);
  REQUIRE(res.ok());
  CHECK(res.broke_contact);
  CHECK(res.stance_changes() == 2);

  SUBCASE("the new contact moved forward along the guide") {
    const Contact* moved = res.stance_out.find(patch);
    const Contact* old_c = f.scenario.start_stance.find(patch);
    REQUIRE(moved != nullptr);
    const Eigen::Vector3d delta =
        f.world.contact_position(*moved) - f.world.contact_position(*old_c);
    CHECK(delta.x() > 0.05);
    CHECK(delta.norm() <= f.world.pg.max_step + 1e-9);
    CHECK(res.potential < total_field(f.world.guide, f.world.field, f.world.robot,
                                      f.scenario.start_config, f.world.goal_mean));
  }

  SUBCASE("trajectory starts at the parent and ends at the output") {
    REQUIRE(res.trajectory.size() >= 2);
    CHECK(res.trajectory.front().to_vector() == f.scenario.start_config.to_vector());
    CHECK(res.trajectory.back().to_vector() == res.config_out.to_vector());
  }

  SUBCASE("every sample passes the validity predicate and drift bounds") {
    Stance stance_b = f.scenario.start_stance;
    stance_b.remove(patch);
    const auto& without = f.regions.get(f.world, stance_b);
    StageContext ctx = make_stage_context(f.world, stance_b, patch, 0, without.planes);
    for (const auto& q : res.trajectory) {
      const char* reason = config_invalid_reason(f.world, ctx, q);
      CHECK(reason == nullptr);
      if (reason) {
        MESSAGE("invalid: ", reason);
        break;
      }
    }
  }

  SUBCASE("reversed trajectory also passes per-sample validity") {
    Stance stance_b = f.scenario.start_stance;
    stance_b.remove(patch);
    const auto& without = f.regions.get(f.world, stance_b);
    StageContext ctx = make_stage_context(f.world, stance_b, patch, 0, without.planes);
    std::vector<Configuration> reversed(res.trajectory.rbegin(), res.trajectory.rend());
    for (const auto& q : reversed) CHECK(config_valid(f.world, ctx, q));
  }

  SUBCASE("q_O balances in both the old and the new stance") {
    // Balance in stance_B held throughout; the new stance's region must
    // contain the final COM.
    const auto& with_new = f.regions.get(f.world, res.stance_out);
    REQUIRE(with_new.usable);
    const Eigen::Vector3d com = com_and_jacobian(f.world.robot, res.config_out).com;
    CHECK(with_new.region.contains({com.x(), com.y()}, 1e-6));

    std::vector<ContactSpec> contacts;
    for (const auto& c : res.stance_out.contacts) contacts.push_back(f.world.contact_spec(c));
    CHECK(wrench_feasible(contacts, {com.x(), com.y()}, f.world.robot.total_mass(),
                          f.world.balance)
              .feasible);
  }
}

TEST_CASE("breaking stage") {
  Fixture f;

  SUBCASE("skipped when the COM is already inside the without-region") {
    // Symmetric six-legged stance on flat ground: any single foot is
    // redundant for balance, so breaking is a no-op.
    Stance stance_b = f.scenario.start_stance;
    stance_b.remove(2);
    const auto& without = f.regions.get(f.world, stance_b);
    REQUIRE(without.usable);
    CHECK(breaking_goal_satisfied(f.world, without.planes, f.scenario.start_config));
    const PgResult res = generate_child(f.world, f.regions, f.scenario.start_stance,
                                        f.scenario.start_config, 2, 0);
    CHECK(res.break_iters == 0);
  }

  SUBCASE("three-contact stance: breaking any contact fails cleanly") {
    Stance tripod;
    for (int patch : {0, 1, 5}) tripod.set(*f.scenario.start_stance.find(patch));
    Configuration q = f.scenario.start_config;  // feet still at the contacts
    const PgResult res = generate_child(f.world, f.regions, tripod, q, 0, 0);
    CHECK_FALSE(res.ok());
    CHECK(res.breaking_failed);
    CHECK(res.status == PgStatus::BreakTimeout);
  }

  SUBCASE("breaking actually moves the COM when required") {
    // Front-biased four-contact stance: dropping the middle-right contact
    // leaves a tripod whose region excludes the centered COM, so the stage
    // must shift the COM before the contact can go.
    Stance stance;
    for (int patch : {0, 1, 3, 4}) stance.set(*f.scenario.start_stance.find(patch));
    Configuration root;
    root.p = {0.0, 0.0, 0.24};
    root.theta = Eigen::VectorXd::Zero(f.world.robot.n_theta());
    for (int leg = 0; leg < 6; ++leg) {
      root.theta(3 * leg + 1) = 0.5;
      root.theta(3 * leg + 2) = 1.0;
    }
    // The two contactless legs tuck up clear of the ground.
    for (int leg : {2, 5}) root.theta(3 * leg + 1) = 0.1;
    Configuration q = root;
    for (const auto& c : stance.contacts) {
      const auto th = leg_ik(f.world.robot, c.patch, root, f.world.contact_position(c));
      REQUIRE(th.has_value());
      q.theta.segment<3>(3 * c.patch) = *th;
    }

    Stance stance_b = stance;
    stance_b.remove(1);  // middle right
    const auto& with_entry = f.regions.get(f.world, stance);
    const auto& without = f.regions.get(f.world, stance_b);
    REQUIRE(with_entry.usable);
    REQUIRE(without.usable);
    REQUIRE_FALSE(breaking_goal_satisfied(f.world, without.planes, q));

    const StageOutcome out = breaking_stage(f.world, stance, q, 1, with_entry.planes, without);
    REQUIRE(out.ok);
    CHECK(out.iters > 0);
    CHECK(breaking_goal_satisfied(f.world, without.planes, out.q));
    // LP certificate: balanced without the broken contact.
    std::vector<ContactSpec> contacts;
    for (const auto& c : stance_b.contacts) contacts.push_back(f.world.contact_spec(c));
    const Eigen::Vector3d com = com_and_jacobian(f.world.robot, out.q).com;
    CHECK(wrench_feasible(contacts, {com.x(), com.y()}, f.world.robot.total_mass(),
                          f.world.balance)
              .feasible);
  }
}

TEST_CASE("transition stage dispatch and exit") {
  Fixture f;
  const int patch = 0;
  Stance stance_b = f.scenario.start_stance;
  stance_b.remove(patch);
  const auto& without = f.regions.get(f.world, stance_b);

  SUBCASE("already on the area: skipped immediately") {
    const StageOutcome out = transition_stage(f.world, stance_b, f.scenario.start_config, patch, 0,
                                              without.planes, std::nullopt, 0);
    CHECK(out.ok);
    CHECK(out.iters == 0);
    CHECK(out.trajectory.empty());
  }

  SUBCASE("exit residuals satisfy the printed thresholds") {
    // Lift the foot well above the plane first so the stage has work to do.
    Configuration raised = f.scenario.start_config;
    raised.theta(3 * patch + 1) -= 0.35;  // femur up
    const StageOutcome out =
        transition_stage(f.world, stance_b, raised, patch, 0, without.planes, std::nullopt, 0);
    REQUIRE(out.ok);
    CHECK(out.iters > 0);
    const Eigen::Vector3d p = fkm_position(f.world.robot, out.q, FrameId::foot(patch));
    const ContactArea& area = f.world.areas[0];
    const double d = p.dot(area.plane.normal3()) - area.plane.offset;
    CHECK(d * d <= f.world.pg.b_d * f.world.pg.b_d + 1e-12);
    for (const auto& b : area.boundary)
      CHECK(p.dot(b.normal3()) - b.offset <= -f.world.pg.b_d + 1e-9);
  }
}

TEST_CASE("placement stage") {
  Fixture f;
  const int patch = 0;
  Stance stance_b = f.scenario.start_stance;
  stance_b.remove(patch);
  const auto& without = f.regions.get(f.world, stance_b);
  const Eigen::Vector3d start_pos =
      fkm_position(f.world.robot, f.scenario.start_config, FrameId::foot(patch));

  SUBCASE("sub-field decreases from entry to exit") {
    const double before = subfield_value(f.world.guide, f.world.field, patch, start_pos);
    const PlacementOutcome out = placement_stage(f.world, stance_b, f.scenario.start_config, patch,
                                                 0, without.planes, start_pos, 0);
    const Eigen::Vector3d after_pos = f.world.contact_position(out.contact);
    const double after = subfield_value(f.world.guide, f.world.field, patch, after_pos);
    CHECK(after < before);
    CHECK(after_pos.x() > start_pos.x());
  }

  SUBCASE("a small patchlet pins the foot and terminates quickly") {
    Scenario s = f.scenario;
    // Patchlet just larger than the buffer so a buffered interior exists.
    s.areas.push_back(ContactArea::rectangle(1, start_pos, Eigen::Vector3d::UnitZ(),
                                             Eigen::Vector3d::UnitX(), {0.015, 0.015}, 0.8, 0));
    const World world2 = make_world(s);
    const PlacementOutcome out = placement_stage(world2, stance_b, f.scenario.start_config, patch,
                                                 1, without.planes, start_pos, 0);
    CHECK(out.iters < 60);
    CHECK((world2.contact_position(out.contact) - start_pos).norm() < 0.025);
  }
}

TEST_CASE("out-of-reach target times out") {
  Fixture f;
  Scenario s = f.scenario;
  s.areas.push_back(ContactArea::rectangle(1, {3.0, 0.0, 0.0}, Eigen::Vector3d::UnitZ(),
                                           Eigen::Vector3d::UnitX(), {0.1, 0.1}, 0.8, -1));
  s.pg.max_iters = 60;
  const World world2 = make_world(s);
  RegionCache regions;
  const PgResult res =
      generate_child(world2, regions, s.start_stance, s.start_config, 0, 1);
  CHECK_FALSE(res.ok());
  CHECK((res.status == PgStatus::TransitionTimeout ||
         res.status == PgStatus::StepBackoffExhausted));
}

TEST_CASE("breaking cache shared across sibling areas") {
  Fixture f;
  Scenario s = f.scenario;
  s.areas.push_back(ContactArea::rectangle(1, {0.35, -0.2, 0.0}, Eigen::Vector3d::UnitZ(),
                                           Eigen::Vector3d::UnitX(), {0.06, 0.06}, 0.8, 0));
  const World world2 = make_world(s);
  RegionCache regions;
  BreakOutcome shared;
  const PgResult a =
      generate_child(world2, regions, s.start_stance, s.start_config, 0, 0, &shared);
  CHECK(shared.computed);
  const PgResult b =
      generate_child(world2, regions, s.start_stance, s.start_config, 0, 1, &shared);
  CHECK(a.ok());
  CHECK(b.ok());
  CHECK(a.break_iters == b.break_iters);
}
