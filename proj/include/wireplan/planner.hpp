#pragma once

#include "wireplan/constraints.hpp"
#include "wireplan/frame_model.hpp"
#include "wireplan/stiffness.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wireplan {

struct MachineModel {
  Vec3 axis_max_speed{50.0, 50.0, 20.0}; // mm/s
  double print_speed = 0.4;              // mm/s
  double z_clearance = 2.0;              // mm above the tallest placed beam
  double dwell_s = 0.5;                  // s at each fused joint
};

struct PlanStep {
  int beam = -1;
  PrintDirection dir = PrintDirection::forward;
  double cost = 0; // mm, per the planner cost policy
  int group = 0;   // consistent-subassembly index
};

struct Plan {
  std::vector<PlanStep> sequence;
  std::vector<std::pair<int, int>> partial_order; // (a, b): a must precede b
  CostMode cost_mode = CostMode::exact;
  double max_cost = 0;
  std::vector<std::string> notes;
};

struct PlannerOptions {
  CostMode cost_mode = CostMode::exact;
  double nominal_force = 1e-4; // N
  Material material;
  std::optional<SectionProperties> section_override;
  int closure_max_paths = 8;       // simultaneous paths before exhaustive fallback
  int fallback_limit = 14;         // exhaustive fallback size cap
  std::uint64_t tie_break_seed = 0; // recorded for reproducibility; ties are lexicographic
};

struct PlanOutcome {
  std::optional<Plan> plan;
  std::string diagnostics; // frontier dump when unconstructable
  bool ok() const { return plan.has_value(); }
};

PlanOutcome plan(const FrameDesign& design, const PrecedenceSet& prec, const PlannerOptions& options);

double deadhead_time(const Vec3& from, const Vec3& to, double z_safe, const MachineModel& machine);
double deadhead_time(const Vec3& from, const Vec3& to, const AssemblyState& state,
                     const MachineModel& machine);

// Greedy resequencing by deadhead time, subject to the recorded partial order
// and every process constraint. Directions and step costs are preserved.
Plan order_for_deadheading(const FrameDesign& design, const Plan& input, const PrecedenceSet& prec,
                           const MachineModel& machine);

struct ToolpathMove {
  enum class Kind { travel, print, dwell };
  Kind kind = Kind::travel;
  std::vector<Vec3> points; // travel waypointline or print polyline
  double speed = 0;         // mm/s for print moves
  double seconds = 0;       // dwell duration
  int step = -1;            // plan step index
};

struct Toolpath {
  std::vector<ToolpathMove> moves;
  double print_time(double print_speed) const;
};

Toolpath emit_toolpath(const FrameDesign& design, const Plan& plan, const MachineModel& machine);

} // namespace wireplan
