#pragma once

#include "wireplan/constraints.hpp"
#include "wireplan/frame_model.hpp"
#include "wireplan/planner.hpp"
#include "wireplan/stiffness.hpp"

#include <string>

namespace wireplan {

struct PlannerConfig {
  Material material;                       // E 2600 MPa, G 1100 MPa
  double diameter = 0.15;                  // mm, default beam diameter
  double nominal_force = 1e-4;             // N
  NozzleModel nozzle;
  MachineModel machine;
  CostMode cost_mode = CostMode::exact;
  double epsilon_c = 0.1;                  // mm, reporting threshold only
  std::uint64_t tie_break_seed = 0;

  PlannerOptions planner_options() const {
    PlannerOptions o;
    o.cost_mode = cost_mode;
    o.nominal_force = nominal_force;
    o.material = material;
    o.tie_break_seed = tie_break_seed;
    return o;
  }
};

// Design JSON: {"substrate_z": 0, "joints": [{"id","xyz":[x,y,z],"grounded"}],
// "beams": [{"id","p","q","diameter","path":[[x,y,z],...]}]}. Units mm.
FrameDesign load_design(const std::string& text, double default_diameter = 0.15);
FrameDesign load_design_file(const std::string& path, double default_diameter = 0.15);
std::string save_design(const FrameDesign& design);

PlannerConfig load_config(const std::string& text);
PlannerConfig load_config_file(const std::string& path);
std::string save_config(const PlannerConfig& config);

std::string save_plan(const FrameDesign& design, const Plan& plan);
Plan load_plan(const FrameDesign& design, const std::string& text);
Plan load_plan_file(const FrameDesign& design, const std::string& path);

// Report with the sorted compliance distribution (deflection per unit load).
std::string save_report(const FrameDesign& design, const Plan& plan, const PlannerConfig& config);

// G-code subset: G0 travels, G1 prints with F feed in mm/min, G4 dwells,
// fixed 6-decimal output.
std::string toolpath_gcode(const Toolpath& toolpath, const MachineModel& machine);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

} // namespace wireplan
