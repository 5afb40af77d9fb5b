#pragma once

#include <map>
#include <mutex>

#include "rhcp/scenario.hpp"

namespace rhcp {

enum class PgStatus { Success, BreakTimeout, TransitionTimeout, StepBackoffExhausted };

const char* to_string(PgStatus s);

struct PgResult {
  PgStatus status = PgStatus::Success;
  Stance stance_out;
  Configuration config_out;
  std::vector<Configuration> trajectory;  // starts at the parent configuration
  double potential = 0.0;
  int break_iters = 0, transition_iters = 0, placement_iters = 0;
  bool breaking_failed = false;
  bool broke_contact = false;  // the moving patch had a contact in the parent stance

  bool ok() const { return status == PgStatus::Success; }
  int stance_changes() const { return broke_contact ? 2 : 1; }
};

/// Support regions memoized on the stance; thread-safe, value-deterministic.
class RegionCache {
 public:
  struct Entry {
    SupportRegion region;
    std::vector<Plane> planes;  // empty when the region is degenerate
    bool usable = false;
  };

  const Entry& get(const World& world, const Stance& stance);

 private:
  std::map<std::string, Entry> cache_;
  std::mutex mutex_;
};

/// Per-stage context for the validity predicate: which balance planes hold,
/// which feet are pinned where, and which foot/obstacle pairs are exempt from
/// collision checks because a contact binds them.
struct StageContext {
  std::vector<Plane> balance_planes;
  std::vector<FixedTarget> fixed;
  std::vector<std::vector<int>> foot_exempt;  // per leg, obstacle ids
  int moving_patch = -1;
  // Step-length cap and area-plane hold on the moving patch, enforced as
  // validity conditions because the velocity-level rows alone leak at second
  // order per step.
  std::optional<Eigen::Vector3d> step_origin;
  std::optional<Plane> hold_plane;
};

StageContext make_stage_context(const World& world, const Stance& enforced_stance,
                                int moving_patch, int target_area,
                                const std::vector<Plane>& balance_planes,
                                const std::optional<Eigen::Vector3d>& step_origin = std::nullopt,
                                int departed_area = -1);

/// Safety-critical configuration test: unbuffered collision and self-collision
/// clearance, COM inside the balance region, drifts within r_slip, limits,
/// and tilt within the unbuffered tolerance.
bool config_valid(const World& world, const StageContext& ctx, const Configuration& q);

/// Name of the first violated validity condition, or nullptr when valid.
const char* config_invalid_reason(const World& world, const StageContext& ctx,
                                  const Configuration& q);

struct StageOutcome {
  bool ok = false;
  PgStatus fail_status = PgStatus::Success;
  Configuration q;
  std::vector<Configuration> trajectory;
  int iters = 0;
};

bool breaking_goal_satisfied(const World& world, const std::vector<Plane>& planes_without,
                             const Configuration& q);

StageOutcome breaking_stage(const World& world, const Stance& parent_stance,
                            const Configuration& parent_config, int patch,
                            const std::vector<Plane>& planes_with,
                            const RegionCache::Entry& without);

StageOutcome transition_stage(const World& world, const Stance& stance_b,
                              const Configuration& q_b, int patch, int area,
                              const std::vector<Plane>& planes_without,
                              const std::optional<Eigen::Vector3d>& prev_contact = std::nullopt,
                              int departed_area = -1);

struct PlacementOutcome {
  Configuration q;
  std::vector<Configuration> trajectory;
  Contact contact;
  int iters = 0;
};

PlacementOutcome placement_stage(const World& world, const Stance& stance_b,
                                 const Configuration& q_t, int patch, int area,
                                 const std::vector<Plane>& planes_without,
                                 const std::optional<Eigen::Vector3d>& prev_contact = std::nullopt,
                                 int departed_area = -1);

/// Memoized breaking outcome: the breaking stage for (parent, patch) is
/// independent of the target area, so siblings can share it.
struct BreakOutcome {
  bool computed = false;
  bool ok = false;
  PgStatus fail_status = PgStatus::BreakTimeout;
  Configuration q;
  std::vector<Configuration> trajectory;
  int iters = 0;
};

/// Full three-stage posture generation for one (patch, area) move.
PgResult generate_child(const World& world, RegionCache& regions, const Stance& parent_stance,
                        const Configuration& parent_config, int patch, int area,
                        BreakOutcome* shared_break = nullptr);

}  // namespace rhcp
