#pragma once

#include <string>

#include "rhcp/planner.hpp"

namespace rhcp {

struct TraceOptions {
  bool include_timing = true;  // wall-clock is environment noise; omit for byte comparisons
};

std::string trace_to_json(const Scenario& scenario, const World& world, const Plan& plan,
                          const TraceOptions& options = {});

void write_trace(const Scenario& scenario, const World& world, const Plan& plan,
                 const std::string& path, const TraceOptions& options = {});

/// Metrics block parsed back from a trace file.
struct TraceMetrics {
  int stance_changes = 0;
  long long posture_calls = 0;
  int cycles = 0;
  int retreats = 0;
  int interventions = 0;
  std::vector<int> calls_per_cycle;
  std::string status;
};

TraceMetrics read_trace_metrics(const std::string& path);

}  // namespace rhcp
