#include "rhcp/trace.hpp"

#include <fstream>
#include <json.hpp>

namespace rhcp {
namespace {

using nlohmann::json;

json config_json(const Configuration& q) {
  json j;
  j["r"] = {q.r.w, q.r.x, q.r.y, q.r.z};
  j["p"] = {q.p.x(), q.p.y(), q.p.z()};
  j["theta"] = std::vector<double>(q.theta.data(), q.theta.data() + q.theta.size());
  return j;
}

json stance_json(const World& world, const Stance& s) {
  json arr = json::array();
  for (const auto& c : s.contacts) {
    const Eigen::Vector3d p = world.contact_position(c);
    json jc;
    jc["patch"] = c.patch;
    jc["area"] = c.area;
    jc["uv"] = {c.uv.x(), c.uv.y()};
    jc["position"] = {p.x(), p.y(), p.z()};
    arr.push_back(jc);
  }
  return arr;
}

}  // namespace

std::string trace_to_json(const Scenario& scenario, const World& world, const Plan& plan,
                          const TraceOptions& options) {
  json j;
  j["schema_version"] = 1;
  j["scenario"] = scenario.name;
  j["seed"] = scenario.planner.seed;
  j["horizon"] = scenario.planner.horizon;
  j["workers"] = scenario.planner.workers;
  j["status"] = to_string(plan.status);

  json cycles = json::array();
  for (const auto& c : plan.cycles) {
    json jc;
    jc["root"] = c.root;
    jc["kind"] = c.kind;
    jc["posture_calls"] = c.posture_calls;
    json gens = json::array();
    for (const auto& g : c.generations) {
      json gen = json::array();
      for (const uint64_t id : g) {
        const Node& n = plan.nodes.at(id);
        json jn;
        jn["id"] = n.id;
        jn["potential"] = n.potential;
        jn["stance"] = stance_json(world, n.stance);
        gen.push_back(jn);
      }
      gens.push_back(gen);
    }
    jc["generations"] = gens;
    jc["executed"] = c.executed;
    cycles.push_back(jc);
  }
  j["cycles"] = cycles;

  j["executed_nodes"] = plan.executed;
  json details = json::array();
  for (const uint64_t id : plan.executed) {
    const Node& n = plan.nodes.at(id);
    json jn;
    jn["id"] = n.id;
    if (n.parent) jn["parent"] = *n.parent;
    jn["potential"] = n.potential;
    jn["stance"] = stance_json(world, n.stance);
    jn["config"] = config_json(n.config);
    jn["subfields"] = subfield_values(world.guide, world.field, world.robot, n.config);
    details.push_back(jn);
  }
  j["executed_details"] = details;

  json traj = json::array();
  for (const auto& q : plan.trajectory) traj.push_back(config_json(q));
  j["trajectory"] = traj;

  json m;
  m["stance_changes"] = plan.metrics.stance_changes;
  m["posture_calls"] = plan.metrics.posture_calls;
  m["cycles"] = plan.metrics.cycles;
  m["retreats"] = plan.metrics.retreats;
  m["interventions"] = plan.metrics.interventions;
  m["calls_per_cycle"] = plan.metrics.calls_per_cycle;
  m["stage_iterations"] = {{"breaking", plan.metrics.break_iters},
                           {"transition", plan.metrics.transition_iters},
                           {"placement", plan.metrics.placement_iters}};
  if (options.include_timing) m["wall_time_ms"] = plan.metrics.wall_ms;
  j["metrics"] = m;
  return j.dump(1);
}

void write_trace(const Scenario& scenario, const World& world, const Plan& plan,
                 const std::string& path, const TraceOptions& options) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trace file: " + path);
  out << trace_to_json(scenario, world, plan, options);
  if (!out) throw IoError("trace write failed: " + path);
}

TraceMetrics read_trace_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  TraceMetrics m;
  const json& jm = j.at("metrics");
  m.stance_changes = jm.at("stance_changes");
  m.posture_calls = jm.at("posture_calls");
  m.cycles = jm.at("cycles");
  m.retreats = jm.at("retreats");
  m.interventions = jm.at("interventions");
  m.calls_per_cycle = jm.at("calls_per_cycle").get<std::vector<int>>();
  m.status = j.at("status");
  return m;
}

}  // namespace rhcp
