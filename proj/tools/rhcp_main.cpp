#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>

#include "rhcp/trace.hpp"

using namespace rhcp;

namespace {

Scenario resolve_scenario(const std::string& name_or_path, unsigned long long seed) {
  for (const auto& name : builtin_scenario_names()) {
    if (name == name_or_path) return builtin_scenario(name, seed);
  }
  Scenario s = load_scenario(name_or_path);
  if (seed != 0) s.planner.seed = seed;
  return s;
}

Stance parse_stance_arg(const Scenario& scenario, const std::string& arg) {
  if (arg == "start") return scenario.start_stance;
  if (arg == "goal") return scenario.goal_stance;
  // Inline JSON array of contacts, e.g. [{"patch":0,"area":0,"uv":[0,0]}].
  try {
    const auto j = nlohmann::json::parse(arg);
    Stance stance;
    for (const auto& jc : j) {
      stance.set({jc.at("patch").get<int>(), jc.at("area").get<int>(),
                  Eigen::Vector2d(jc.at("uv").at(0).get<double>(), jc.at("uv").at(1).get<double>())});
    }
    return stance;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("stance argument: ") + e.what());
  }
}

int run_plan(const std::string& scenario_arg, int horizon, unsigned long long seed,
             const std::string& out, double time_limit, int workers, double field_offset,
             double alpha, bool no_timing) {
  Scenario s = resolve_scenario(scenario_arg, seed);
  if (horizon > 0) s.planner.horizon = horizon;
  if (time_limit > 0) s.planner.time_limit_s = time_limit;
  if (workers > 0) s.planner.workers = workers;
  if (field_offset >= 0) s.field.b_offset = field_offset;
  if (alpha > 0) s.field.alpha = alpha;

  const World world = make_world(s);
  const Plan plan = plan_scenario(s, world);

  std::cout << "status: " << to_string(plan.status) << "\n"
            << "stance changes: " << plan.metrics.stance_changes << "\n"
            << "posture calls: " << plan.metrics.posture_calls << "\n"
            << "cycles: " << plan.metrics.cycles << " (retreats " << plan.metrics.retreats
            << ", interventions " << plan.metrics.interventions << ")\n"
            << "wall time: " << plan.metrics.wall_ms / 1000.0 << " s\n";

  if (!out.empty()) {
    TraceOptions options;
    options.include_timing = !no_timing;
    write_trace(s, world, plan, out, options);
    std::cout << "trace: " << out << "\n";
  }
  switch (plan.status) {
    case PlanStatus::Success: return 0;
    case PlanStatus::PlanningFailed: return 2;
    case PlanStatus::TimeLimitExceeded: return 3;
  }
  return 2;
}

int run_inspect_region(const std::string& scenario_arg, const std::string& stance_arg) {
  const Scenario s = resolve_scenario(scenario_arg, 0);
  const World world = make_world(s);
  const Stance stance = parse_stance_arg(s, stance_arg);

  std::vector<ContactSpec> contacts;
  for (const auto& c : stance.contacts) contacts.push_back(world.contact_spec(c));
  const SupportRegion region = compute_region(contacts, world.robot.total_mass(), world.balance);

  std::cout << "{\n  \"vertices\": [";
  for (size_t i = 0; i < region.vertices.size(); ++i) {
    std::cout << (i ? ", " : "") << "[" << region.vertices[i].x() << ", "
              << region.vertices[i].y() << "]";
  }
  std::cout << "],\n  \"area\": " << (region.degenerate() ? 0.0 : region.area()) << "\n}\n";
  return 0;
}

int run_field_sample(const std::string& scenario_arg, double grid, int patch, double z) {
  const Scenario s = resolve_scenario(scenario_arg, 0);
  const World world = make_world(s);

  // Bounding box over the patch's waypoints, padded.
  const auto& wpts = world.guide.patches.at(patch).waypoints;
  Eigen::Vector2d lo(kInf, kInf), hi(-kInf, -kInf);
  for (const auto& w : wpts) {
    lo = lo.cwiseMin(w.head<2>());
    hi = hi.cwiseMax(w.head<2>());
  }
  lo.array() -= 0.3;
  hi.array() += 0.3;
  const double zs = z < -1e8 ? wpts.back().z() : z;

  std::cout << "{\n  \"patch\": " << patch << ",\n  \"grid\": " << grid << ",\n  \"samples\": [\n";
  bool first = true;
  for (double x = lo.x(); x <= hi.x(); x += grid) {
    for (double y = lo.y(); y <= hi.y(); y += grid) {
      const double u = subfield_value(world.guide, world.field, patch, {x, y, zs});
      std::cout << (first ? "" : ",\n") << "    [" << x << ", " << y << ", " << u << "]";
      first = false;
    }
  }
  std::cout << "\n  ]\n}\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Receding-horizon multi-contact motion planner"};
  app.require_subcommand(1);

  std::string scenario_arg, out, stance_arg = "start";
  int horizon = -1, workers = -1, patch = 0;
  unsigned long long seed = 0;
  double time_limit = -1, field_offset = -1, alpha = -1, grid = 0.02, z = -1e9;
  bool no_timing = false;

  auto* plan = app.add_subcommand("plan", "plan a scenario and write a run trace");
  plan->add_option("scenario", scenario_arg, "scenario file or builtin name")->required();
  plan->add_option("--horizon", horizon, "horizon depth kappa_max (1-4)");
  plan->add_option("--seed", seed, "start-perturbation seed");
  plan->add_option("--out", out, "trace output path");
  plan->add_option("--time-limit", time_limit, "wall-clock limit in seconds");
  plan->add_option("--workers", workers, "posture-generator worker threads");
  plan->add_option("--field-offset", field_offset, "near/far field weighting offset b");
  plan->add_option("--alpha", alpha, "field plane/lump weighting");
  plan->add_flag("--no-timing", no_timing, "omit wall-clock from the trace");

  auto* inspect = app.add_subcommand("inspect-region", "dump the support-region polygon");
  inspect->add_option("scenario", scenario_arg, "scenario file or builtin name")->required();
  inspect->add_option("stance", stance_arg, "'start' or 'goal'");

  auto* field = app.add_subcommand("field-sample", "dump potential-field samples");
  field->add_option("scenario", scenario_arg, "scenario file or builtin name")->required();
  field->add_option("--grid", grid, "sample resolution in meters");
  field->add_option("--patch", patch, "contact patch index");
  field->add_option("--z", z, "sample height (defaults to the final waypoint's)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plan->parsed())
      return run_plan(scenario_arg, horizon, seed, out, time_limit, workers, field_offset, alpha,
                      no_timing);
    if (inspect->parsed()) return run_inspect_region(scenario_arg, stance_arg);
    if (field->parsed()) return run_field_sample(scenario_arg, grid, patch, z);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
