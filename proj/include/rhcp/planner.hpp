#pragma once

#include <map>
#include <memory>

#include "rhcp/posture_gen.hpp"

namespace rhcp {

struct Node {
  uint64_t id = 0;
  std::optional<uint64_t> parent;
  int depth = 0;  // generation index within the cycle that created it
  Stance stance;
  Configuration config;
  double potential = 0.0;
  std::shared_ptr<const PgResult> result;  // trajectory from the parent; null for roots

  int stance_changes() const { return result ? result->stance_changes() : 0; }
};

enum class PlanStatus { Success, PlanningFailed, TimeLimitExceeded };

const char* to_string(PlanStatus s);

struct CycleRecord {
  uint64_t root = 0;
  std::string kind;  // "step", "retreat" or "intervention"
  int posture_calls = 0;
  std::vector<std::vector<uint64_t>> generations;
  std::vector<uint64_t> executed;  // forward-executed node ids this cycle
};

struct PlanMetrics {
  int stance_changes = 0;
  long long posture_calls = 0;
  int cycles = 0;
  int retreats = 0;
  int interventions = 0;
  long long break_iters = 0, transition_iters = 0, placement_iters = 0;
  std::vector<int> calls_per_cycle;
  double wall_ms = 0.0;
};

struct Plan {
  PlanStatus status = PlanStatus::PlanningFailed;
  std::vector<uint64_t> executed;  // chronological root occupation, including retreats
  std::vector<Configuration> trajectory;
  std::map<uint64_t, Node> nodes;
  std::vector<CycleRecord> cycles;
  PlanMetrics metrics;
};

/// Child generation interface; the production implementation runs the posture
/// generator, tests may script arbitrary trees.
class ChildGenerator {
 public:
  struct Request {
    uint64_t parent_id = 0;
    Stance parent_stance;
    Configuration parent_config;
    int patch = 0;
    int area = 0;
  };

  virtual ~ChildGenerator() = default;
  /// Results slot-aligned with requests. Requests sharing (parent, patch) may
  /// share breaking work; implementations must be deterministic for a fixed
  /// request list regardless of `workers`.
  virtual std::vector<PgResult> generate_batch(const std::vector<Request>& requests,
                                               int workers) = 0;
};

class PostureChildGenerator : public ChildGenerator {
 public:
  explicit PostureChildGenerator(const World& world) : world_(world) {}
  std::vector<PgResult> generate_batch(const std::vector<Request>& requests,
                                       int workers) override;

 private:
  const World& world_;
  RegionCache regions_;
};

/// True iff every contact in s1 is matched in s2 by a contact with the same
/// patch-area pair within d_min, and the stances cover the same patches.
bool stance_similar(const World& world, const Stance& s1, const Stance& s2, double d_min);

struct ClmTrigger {
  Contact contact;
  int condition = 0;  // 1: repeated breaking failure, 2: dead end + unbreakable
};

/// Receding-horizon contact planner.
class Planner {
 public:
  Planner(const World& world, const PlannerParams& params, ChildGenerator& generator);

  Plan plan(const Stance& start_stance, const Configuration& start_config);

 private:
  struct ExpansionRecord;

  std::vector<uint64_t> expand_generation(const std::vector<uint64_t>& parents,
                                          uint64_t root_id, CycleRecord& rec,
                                          ExpansionRecord* root_record);
  bool goal_reached(const Stance& stance) const;
  std::vector<int> reachable_areas(const Node& parent, int patch) const;
  std::optional<ClmTrigger> detect_clm(bool dead_end) const;
  bool retreat(Plan& plan);
  bool intervene(Plan& plan, const ClmTrigger& trigger);
  void execute_node(Plan& plan, uint64_t id);
  uint64_t make_node(std::optional<uint64_t> parent, int depth,
                     std::shared_ptr<const PgResult> result, Plan& plan);

  const World& world_;
  PlannerParams params_;
  ChildGenerator& generator_;

  uint64_t next_id_ = 0;
  uint64_t root_ = 0;
  Plan* plan_ = nullptr;
  std::vector<Stance> cycle_cache_;
  std::vector<Stance> root_cache_;
  std::map<std::tuple<uint64_t, int, int>, std::shared_ptr<const PgResult>> global_cache_;
  // Per root occupation: breaking-failure keys (patch, area, d_min grid cell).
  std::vector<std::vector<std::string>> break_failures_;
  int gait_pos_ = 0;
  int gait_skips_ = 0;
};

/// Convenience wrapper: build a world, run the planner.
Plan plan_scenario(const Scenario& scenario, const World& world);

}  // namespace rhcp
