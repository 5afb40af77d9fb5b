#include "rhcp/planner.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <thread>

namespace rhcp {
namespace {

std::string contact_key(const World& world, const Contact& c, double d_min) {
  const Eigen::Vector3d p = world.contact_position(c);
  const long gx = std::lround(p.x() / d_min);
  const long gy = std::lround(p.y() / d_min);
  const long gz = std::lround(p.z() / d_min);
  return std::to_string(c.patch) + ":" + std::to_string(c.area) + ":" + std::to_string(gx) + "," +
         std::to_string(gy) + "," + std::to_string(gz);
}

}  // namespace

const char* to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::Success: return "success";
    case PlanStatus::PlanningFailed: return "planning-failed";
    case PlanStatus::TimeLimitExceeded: return "time-limit-exceeded";
  }
  return "unknown";
}

std::vector<PgResult> PostureChildGenerator::generate_batch(const std::vector<Request>& requests,
                                                            int workers) {
  std::vector<PgResult> results(requests.size());

  // Group requests by (parent, patch) so siblings share the breaking stage;
  // groups are independent and run in parallel.
  std::vector<std::vector<size_t>> groups;
  std::map<std::pair<uint64_t, int>, size_t> group_of;
  for (size_t i = 0; i < requests.size(); ++i) {
    const auto key = std::make_pair(requests[i].parent_id, requests[i].patch);
    const auto it = group_of.find(key);
    if (it == group_of.end()) {
      group_of[key] = groups.size();
      groups.push_back({i});
    } else {
      groups[it->second].push_back(i);
    }
  }

  std::atomic<size_t> next{0};
  auto run_worker = [&]() {
    while (true) {
      const size_t g = next.fetch_add(1);
      if (g >= groups.size()) return;
      BreakOutcome shared;
      for (const size_t i : groups[g]) {
        const Request& r = requests[i];
        results[i] = generate_child(world_, regions_, r.parent_stance, r.parent_config, r.patch,
                                    r.area, &shared);
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(groups.size())));
  if (n_threads <= 1) {
    run_worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(run_worker);
    for (auto& t : pool) t.join();
  }
  return results;
}

bool stance_similar(const World& world, const Stance& s1, const Stance& s2, double d_min) {
  if (s1.size() != s2.size()) return false;
  for (const auto& c1 : s1.contacts) {
    const Contact* c2 = s2.find(c1.patch);
    if (c2 == nullptr || c2->area != c1.area) return false;
    if ((world.contact_position(c1) - world.contact_position(*c2)).norm() > d_min) return false;
  }
  return true;
}

struct Planner::ExpansionRecord {
  std::set<std::string> breaking_failed;
};

Planner::Planner(const World& world, const PlannerParams& params, ChildGenerator& generator)
    : world_(world), params_(params), generator_(generator) {}

bool Planner::goal_reached(const Stance& stance) const {
  for (const auto& goal_c : world_.goal_stance.contacts) {
    const Contact* c = stance.find(goal_c.patch);
    if (c == nullptr || c->area != goal_c.area) return false;
    if ((world_.contact_position(*c) - world_.contact_position(goal_c)).norm() > params_.d_min)
      return false;
  }
  return true;
}

std::vector<int> Planner::reachable_areas(const Node& parent, int patch) const {
  std::vector<int> areas;
  const LegModel& leg = world_.robot.legs[patch];
  const Eigen::Vector3d mount = parent.config.p + parent.config.r.rotate(leg.mount);
  const double ext = leg.l1 + leg.l2 + leg.l3;
  const double reach = params_.reach_factor * ext;
  for (const auto& area : world_.areas) {
    const Eigen::Vector3d closest = area.closest_point(mount);
    if ((closest - mount).norm() > reach) continue;
    // In-plane reach shrinks with the mount's offset from the area plane.
    const double dz = std::abs(mount.dot(area.plane.normal3()) - area.plane.offset);
    const double planar =
        std::sqrt(std::max(0.04 * ext * ext, ext * ext - dz * dz));
    Eigen::Vector3d in_plane = closest - mount;
    in_plane -= in_plane.dot(area.plane.normal3()) * area.plane.normal3();
    if (in_plane.norm() > params_.reach_factor * planar) continue;
    areas.push_back(area.id);
  }
  return areas;
}

uint64_t Planner::make_node(std::optional<uint64_t> parent, int depth,
                            std::shared_ptr<const PgResult> result, Plan& plan) {
  Node node;
  node.id = next_id_++;
  node.parent = parent;
  node.depth = depth;
  if (result) {
    node.stance = result->stance_out;
    node.config = result->config_out;
    node.potential = result->potential;
    node.result = std::move(result);
  }
  const uint64_t id = node.id;
  plan.nodes.emplace(id, std::move(node));
  return id;
}

std::vector<uint64_t> Planner::expand_generation(const std::vector<uint64_t>& parents,
                                                 uint64_t root_id, CycleRecord& rec,
                                                 ExpansionRecord* root_record) {
  // Build the request list in deterministic order, serving cached children
  // from the global cache at zero posture-call cost.
  std::vector<ChildGenerator::Request> fresh;
  struct Slot {
    uint64_t parent;
    int patch, area;
    std::shared_ptr<const PgResult> cached;
    size_t fresh_index = 0;
  };
  std::vector<Slot> slots;

  const bool gait_active = !params_.gait.empty();
  const int gait_patch = gait_active ? params_.gait[gait_pos_ % params_.gait.size()] : -1;

  for (const uint64_t pid : parents) {
    const Node& parent = plan_->nodes.at(pid);
    for (int patch = 0; patch < world_.robot.n_legs(); ++patch) {
      if (gait_active && patch != gait_patch) continue;
      for (const int area : reachable_areas(parent, patch)) {
        Slot slot{pid, patch, area, nullptr, 0};
        const auto it = global_cache_.find({pid, patch, area});
        if (it != global_cache_.end()) {
          slot.cached = it->second;
        } else {
          slot.fresh_index = fresh.size();
          fresh.push_back({pid, parent.stance, parent.config, patch, area});
        }
        slots.push_back(std::move(slot));
      }
    }
  }

  std::vector<PgResult> fresh_results;
  if (!fresh.empty()) fresh_results = generator_.generate_batch(fresh, params_.workers);
  rec.posture_calls += static_cast<int>(fresh.size());
  plan_->metrics.posture_calls += static_cast<long long>(fresh.size());

  std::vector<uint64_t> generation;
  for (const auto& slot : slots) {
    std::shared_ptr<const PgResult> result = slot.cached;
    if (!result) {
      auto owned = std::make_shared<PgResult>(std::move(fresh_results[slot.fresh_index]));
      plan_->metrics.break_iters += owned->break_iters;
      plan_->metrics.transition_iters += owned->transition_iters;
      plan_->metrics.placement_iters += owned->placement_iters;
      result = std::move(owned);
      global_cache_[{slot.parent, slot.patch, slot.area}] = result;
    }

    if (root_record != nullptr && slot.parent == root_id && result->breaking_failed) {
      const Contact* broken = plan_->nodes.at(slot.parent).stance.find(slot.patch);
      if (broken != nullptr)
        root_record->breaking_failed.insert(contact_key(world_, *broken, params_.d_min));
    }
    if (!result->ok()) continue;

    bool duplicate = false;
    for (const auto& cached_stance : cycle_cache_) {
      if (stance_similar(world_, result->stance_out, cached_stance, params_.d_min)) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) {
      for (const auto& root_stance : root_cache_) {
        if (stance_similar(world_, result->stance_out, root_stance, params_.d_min)) {
          duplicate = true;
          break;
        }
      }
    }
    if (duplicate) continue;

    const int depth = plan_->nodes.at(slot.parent).depth + 1;
    const uint64_t id = make_node(slot.parent, depth, result, *plan_);
    cycle_cache_.push_back(result->stance_out);
    generation.push_back(id);
  }
  return generation;
}

void Planner::execute_node(Plan& plan, uint64_t id) {
  Node& node = plan.nodes.at(id);
  if (node.result) {
    const auto& traj = node.result->trajectory;
    for (size_t i = 1; i < traj.size(); ++i) plan.trajectory.push_back(traj[i]);
    plan.metrics.stance_changes += node.stance_changes();
  }
  plan.executed.push_back(id);
  root_cache_.push_back(node.stance);
  root_ = id;
  node.depth = 0;  // generation depths are relative to the current root
}

bool Planner::retreat(Plan& plan) {
  const Node& old_root = plan.nodes.at(root_);
  if (!old_root.parent.has_value()) return false;
  plan.metrics.retreats += 1;
  // Quasi-static reversal of the incoming trajectory.
  if (old_root.result) {
    const auto& traj = old_root.result->trajectory;
    for (size_t i = traj.size() - 1; i-- > 0;) plan.trajectory.push_back(traj[i]);
    plan.metrics.stance_changes += old_root.stance_changes();
  }
  root_ = *old_root.parent;
  plan.executed.push_back(root_);
  plan.nodes.at(root_).depth = 0;
  return true;
}

std::optional<ClmTrigger> Planner::detect_clm(bool dead_end) const {
  const Node& root = plan_->nodes.at(root_);
  if (getenv("RHCP_DEBUG_CLM")) {
    fprintf(stderr, "detect_clm: records=%zu gamma=%d dead=%d\n", break_failures_.size(),
            params_.gamma, (int)dead_end);
    if (!break_failures_.empty()) {
      fprintf(stderr, "  last record:");
      for (const auto& k : break_failures_.back()) fprintf(stderr, " %s", k.c_str());
      fprintf(stderr, "\n  root keys:");
      for (const auto& c : root.stance.contacts)
        fprintf(stderr, " %s", contact_key(world_, c, params_.d_min).c_str());
      fprintf(stderr, "\n");
    }
  }

  // Condition 1: the same contact failed its breaking stage at the last gamma
  // occupied roots.
  if (static_cast<int>(break_failures_.size()) >= params_.gamma && params_.gamma > 0) {
    std::map<std::string, int> counts;
    for (size_t i = break_failures_.size() - params_.gamma; i < break_failures_.size(); ++i) {
      for (const auto& key : break_failures_[i]) counts[key] += 1;
    }
    for (const auto& [key, count] : counts) {  // map order: deterministic smallest key
      if (count < params_.gamma) continue;
      for (const auto& c : root.stance.contacts) {
        if (contact_key(world_, c, params_.d_min) == key) return ClmTrigger{c, 1};
      }
    }
  }

  // Condition 2: dead end and some contact of the current root is unbreakable.
  if (dead_end && !break_failures_.empty()) {
    for (const auto& c : root.stance.contacts) {
      const std::string key = contact_key(world_, c, params_.d_min);
      for (const auto& recorded : break_failures_.back()) {
        if (recorded == key) return ClmTrigger{c, 2};
      }
    }
  }
  return std::nullopt;
}

bool Planner::intervene(Plan& plan, const ClmTrigger& trigger) {
  const Eigen::Vector3d stuck_pos = world_.contact_position(trigger.contact);

  while (true) {
    CycleRecord rec;
    rec.kind = "intervention";
    if (!retreat(plan)) return false;
    rec.root = root_;
    const Node& root = plan.nodes.at(root_);

    // Rebuild the horizon, restoring children from the global cache and
    // purging stances that match past roots (expand_generation prunes them).
    cycle_cache_ = {root.stance};
    std::vector<uint64_t> generation{root_};
    rec.generations.push_back(generation);
    bool dead = false;
    for (int k = 0; k < params_.horizon; ++k) {
      generation = expand_generation(generation, root_, rec, nullptr);
      rec.generations.push_back(generation);
      if (generation.empty()) {
        dead = true;
        break;
      }
    }

    std::optional<uint64_t> escape;
    if (!dead) {
      for (const uint64_t id : generation) {
        const Node& node = plan.nodes.at(id);
        const Contact* c = node.stance.find(trigger.contact.patch);
        const bool moved = c == nullptr || c->area != trigger.contact.area ||
                           (world_.contact_position(*c) - stuck_pos).norm() > params_.d_min;
        if (!moved) continue;
        if (!escape || node.potential < plan.nodes.at(*escape).potential) escape = id;
      }
    }

    if (escape) {
      // Execute the chain from the root to the escape node.
      std::vector<uint64_t> chain;
      for (uint64_t id = *escape; id != root_;) {
        chain.push_back(id);
        id = *plan.nodes.at(id).parent;
      }
      std::reverse(chain.begin(), chain.end());
      for (const uint64_t id : chain) {
        execute_node(plan, id);
        rec.executed.push_back(id);
      }
      plan.metrics.calls_per_cycle.push_back(rec.posture_calls);
      plan.metrics.cycles += 1;
      plan.cycles.push_back(rec);
      return true;
    }

    plan.metrics.calls_per_cycle.push_back(rec.posture_calls);
    plan.metrics.cycles += 1;
    plan.cycles.push_back(rec);
    if (!plan.nodes.at(root_).parent.has_value()) return false;
  }
}

Plan Planner::plan(const Stance& start_stance, const Configuration& start_config) {
  const auto t0 = std::chrono::steady_clock::now();
  Plan plan;
  plan_ = &plan;
  next_id_ = 0;
  root_cache_.clear();
  cycle_cache_.clear();
  global_cache_.clear();
  break_failures_.clear();
  gait_pos_ = 0;
  gait_skips_ = 0;

  const uint64_t root0 = make_node(std::nullopt, 0, nullptr, plan);
  {
    Node& root = plan.nodes.at(root0);
    root.stance = start_stance;
    root.config = start_config;
    root.potential =
        total_field(world_.guide, world_.field, world_.robot, start_config, world_.goal_mean);
  }
  plan.trajectory.push_back(start_config);
  plan.executed.push_back(root0);
  root_cache_.push_back(start_stance);
  root_ = root0;

  while (true) {
    const Node& root = plan.nodes.at(root_);
    if (goal_reached(root.stance)) {
      plan.status = PlanStatus::Success;
      break;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (elapsed > params_.time_limit_s) {
      plan.status = PlanStatus::TimeLimitExceeded;
      break;
    }

    CycleRecord rec;
    rec.root = root_;
    rec.kind = "step";
    cycle_cache_ = {root.stance};
    ExpansionRecord root_record;

    std::vector<uint64_t> generation{root_};
    rec.generations.push_back(generation);
    bool dead_end = false;
    std::optional<uint64_t> goal_node;
    for (int k = 0; k < params_.horizon && !goal_node; ++k) {
      generation = expand_generation(generation, root_, rec, k == 0 ? &root_record : nullptr);
      rec.generations.push_back(generation);
      if (generation.empty()) {
        dead_end = true;
        break;
      }
      for (const uint64_t id : generation) {
        if (goal_reached(plan.nodes.at(id).stance)) {
          goal_node = id;
          break;
        }
      }
    }
    break_failures_.push_back(std::vector<std::string>(root_record.breaking_failed.begin(),
                                                       root_record.breaking_failed.end()));

    if (goal_node) {
      // A generated node already realizes the goal stance: execute its chain.
      std::vector<uint64_t> chain;
      for (uint64_t id = *goal_node; id != root_;) {
        chain.push_back(id);
        id = *plan.nodes.at(id).parent;
      }
      std::reverse(chain.begin(), chain.end());
      for (const uint64_t id : chain) {
        execute_node(plan, id);
        rec.executed.push_back(id);
      }
      plan.metrics.calls_per_cycle.push_back(rec.posture_calls);
      plan.metrics.cycles += 1;
      plan.cycles.push_back(rec);
      gait_pos_ += 1;
      gait_skips_ = 0;
      continue;
    }

    const auto clm = detect_clm(dead_end);
    if (clm) {
      rec.kind = "intervention-trigger";
      plan.metrics.interventions += 1;
      plan.metrics.calls_per_cycle.push_back(rec.posture_calls);
      plan.metrics.cycles += 1;
      plan.cycles.push_back(rec);
      if (!intervene(plan, *clm)) {
        plan.status = PlanStatus::PlanningFailed;
        break;
      }
      gait_skips_ = 0;
      continue;
    }

    if (dead_end && !params_.gait.empty() &&
        gait_skips_ < static_cast<int>(params_.gait.size())) {
      // Under a fixed gait a leg with no admissible move forfeits its turn;
      // only a full wave of forfeits is a real dead end.
      rec.kind = "gait-skip";
      plan.metrics.calls_per_cycle.push_back(rec.posture_calls);
      plan.metrics.cycles += 1;
      plan.cycles.push_back(rec);
      gait_pos_ += 1;
      gait_skips_ += 1;
      continue;
    }

    if (dead_end) {
      rec.kind = "retreat";
      plan.metrics.calls_per_cycle.push_back(rec.posture_calls);
      plan.metrics.cycles += 1;
      plan.cycles.push_back(rec);
      if (!retreat(plan)) {
        plan.status = PlanStatus::PlanningFailed;
        break;
      }
      continue;
    }

    // Best node in the final generation, ties by node id; execute its
    // first-generation ancestor.
    uint64_t best = generation.front();
    for (const uint64_t id : generation) {
      if (plan.nodes.at(id).potential < plan.nodes.at(best).potential) best = id;
    }
    uint64_t next = best;
    while (plan.nodes.at(next).depth > 1) next = *plan.nodes.at(next).parent;
    execute_node(plan, next);
    rec.executed.push_back(next);
    plan.metrics.calls_per_cycle.push_back(rec.posture_calls);
    plan.metrics.cycles += 1;
    plan.cycles.push_back(rec);
    gait_pos_ += 1;
    gait_skips_ = 0;
  }

  plan.metrics.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  plan_ = nullptr;
  return plan;
}

Plan plan_scenario(const Scenario& scenario, const World& world) {
  PostureChildGenerator generator(world);
  Planner planner(world, scenario.planner, generator);
  return planner.plan(scenario.start_stance, scenario.start_config);
}

}  // namespace rhcp
