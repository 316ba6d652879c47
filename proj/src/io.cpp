#include "wireplan/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wireplan {

using nlohmann::json;

namespace {

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  // Avoid the "-0.000000" artifact so equal inputs give byte-equal files.
  if (std::string(buf) == "-0.000000") return "0.000000";
  return buf;
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument(what + ": expected [x, y, z]");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

} // namespace

FrameDesign load_design(const std::string& text, double default_diameter) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("design JSON parse error: ") + e.what());
  }
  FrameDesign d;
  d.substrate_z = j.value("substrate_z", 0.0);
  if (!j.contains("joints") || !j.contains("beams"))
    throw std::invalid_argument("design JSON needs 'joints' and 'beams'");
  for (const auto& jj : j["joints"]) {
    Joint joint;
    joint.id = jj.at("id").get<std::string>();
    joint.position = vec3_from(jj.at("xyz"), "joint " + joint.id);
    joint.grounded = jj.value("grounded", false);
    d.add_joint(std::move(joint));
  }
  for (const auto& jb : j["beams"]) {
    Beam beam;
    beam.id = jb.at("id").get<std::string>();
    std::string p = jb.at("p").get<std::string>();
    std::string q = jb.at("q").get<std::string>();
    beam.p = d.joint_index(p);
    beam.q = d.joint_index(q);
    if (beam.p == -1) throw std::invalid_argument("beam " + beam.id + " references missing joint " + p);
    if (beam.q == -1) throw std::invalid_argument("beam " + beam.id + " references missing joint " + q);
    beam.diameter = jb.value("diameter", default_diameter);
    if (jb.contains("path"))
      for (const auto& pt : jb["path"]) beam.path.push_back(vec3_from(pt, "beam " + beam.id + " path"));
    d.add_beam(std::move(beam));
  }
  auto defects = validate_design(d);
  if (!defects.empty()) {
    std::ostringstream os;
    os << "design validation failed:";
    for (const auto& def : defects) os << "\n  [" << def.kind << "] " << def.subject << ": " << def.detail;
    throw std::invalid_argument(os.str());
  }
  return d;
}

FrameDesign load_design_file(const std::string& path, double default_diameter) {
  return load_design(read_file(path), default_diameter);
}

std::string save_design(const FrameDesign& design) {
  json j;
  j["substrate_z"] = design.substrate_z;
  j["joints"] = json::array();
  for (const auto& joint : design.joints()) {
    json jj;
    jj["id"] = joint.id;
    jj["xyz"] = vec3_json(joint.position);
    jj["grounded"] = joint.grounded;
    j["joints"].push_back(jj);
  }
  j["beams"] = json::array();
  for (const auto& beam : design.beams()) {
    json jb;
    jb["id"] = beam.id;
    jb["p"] = design.joint(beam.p).id;
    jb["q"] = design.joint(beam.q).id;
    jb["diameter"] = beam.diameter;
    jb["path"] = json::array();
    for (const auto& pt : beam.path) jb["path"].push_back(vec3_json(pt));
    j["beams"].push_back(jb);
  }
  return j.dump(2) + "\n";
}

PlannerConfig load_config(const std::string& text) {
  json j = json::parse(text);
  PlannerConfig c;
  c.material.elastic_modulus = j.value("elastic_modulus", c.material.elastic_modulus);
  c.material.shear_modulus = j.value("shear_modulus", c.material.shear_modulus);
  c.diameter = j.value("diameter", c.diameter);
  c.nominal_force = j.value("nominal_force", c.nominal_force);
  if (j.contains("nozzle")) {
    const auto& n = j["nozzle"];
    c.nozzle.tip_radius = n.value("tip_radius", c.nozzle.tip_radius);
    c.nozzle.cone_half_angle = n.value("cone_half_angle", c.nozzle.cone_half_angle);
    c.nozzle.clearance = n.value("clearance", c.nozzle.clearance);
  }
  if (j.contains("machine")) {
    const auto& m = j["machine"];
    if (m.contains("axis_max_speed")) c.machine.axis_max_speed = vec3_from(m["axis_max_speed"], "axis_max_speed");
    c.machine.print_speed = m.value("print_speed", c.machine.print_speed);
    c.machine.z_clearance = m.value("z_clearance", c.machine.z_clearance);
    c.machine.dwell_s = m.value("dwell_s", c.machine.dwell_s);
  }
  std::string mode = j.value("cost_mode", "exact");
  if (mode != "exact" && mode != "heuristic")
    throw std::invalid_argument("cost_mode must be 'exact' or 'heuristic'");
  c.cost_mode = mode == "exact" ? CostMode::exact : CostMode::heuristic;
  c.epsilon_c = j.value("epsilon_c", c.epsilon_c);
  c.tie_break_seed = j.value("tie_break_seed", std::uint64_t{0});
  if (c.material.elastic_modulus <= 0 || c.material.shear_modulus <= 0 || c.diameter <= 0 ||
      c.nominal_force <= 0 || c.machine.print_speed <= 0)
    throw std::invalid_argument("config: physical quantities must be positive");
  return c;
}

PlannerConfig load_config_file(const std::string& path) { return load_config(read_file(path)); }

std::string save_config(const PlannerConfig& c) {
  json j;
  j["elastic_modulus"] = c.material.elastic_modulus;
  j["shear_modulus"] = c.material.shear_modulus;
  j["diameter"] = c.diameter;
  j["nominal_force"] = c.nominal_force;
  j["nozzle"] = {{"tip_radius", c.nozzle.tip_radius},
                 {"cone_half_angle", c.nozzle.cone_half_angle},
                 {"clearance", c.nozzle.clearance}};
  j["machine"] = {{"axis_max_speed", vec3_json(c.machine.axis_max_speed)},
                  {"print_speed", c.machine.print_speed},
                  {"z_clearance", c.machine.z_clearance},
                  {"dwell_s", c.machine.dwell_s}};
  j["cost_mode"] = c.cost_mode == CostMode::exact ? "exact" : "heuristic";
  j["epsilon_c"] = c.epsilon_c;
  j["tie_break_seed"] = c.tie_break_seed;
  return j.dump(2) + "\n";
}

std::string save_plan(const FrameDesign& design, const Plan& plan) {
  json j;
  j["cost_mode"] = plan.cost_mode == CostMode::exact ? "exact" : "heuristic";
  j["max_cost"] = plan.max_cost;
  j["sequence"] = json::array();
  for (const auto& s : plan.sequence) {
    json js;
    js["beam"] = design.beam(s.beam).id;
    js["direction"] = to_string(s.dir);
    js["cost"] = s.cost;
    js["group"] = s.group;
    j["sequence"].push_back(js);
  }
  j["partial_order"] = json::array();
  for (auto [a, b] : plan.partial_order)
    j["partial_order"].push_back(json::array({design.beam(a).id, design.beam(b).id}));
  j["notes"] = plan.notes;
  return j.dump(2) + "\n";
}

Plan load_plan(const FrameDesign& design, const std::string& text) {
  json j = json::parse(text);
  Plan plan;
  plan.cost_mode = j.value("cost_mode", "exact") == std::string("heuristic") ? CostMode::heuristic
                                                                             : CostMode::exact;
  plan.max_cost = j.value("max_cost", 0.0);
  for (const auto& js : j.at("sequence")) {
    PlanStep s;
    std::string id = js.at("beam").get<std::string>();
    s.beam = design.beam_index(id);
    if (s.beam == -1) throw std::invalid_argument("plan references missing beam " + id);
    s.dir = js.at("direction").get<std::string>() == "reverse" ? PrintDirection::reverse
                                                               : PrintDirection::forward;
    s.cost = js.value("cost", 0.0);
    s.group = js.value("group", 0);
    plan.sequence.push_back(s);
  }
  if (j.contains("partial_order")) {
    for (const auto& jp : j["partial_order"]) {
      int a = design.beam_index(jp[0].get<std::string>());
      int b = design.beam_index(jp[1].get<std::string>());
      if (a == -1 || b == -1) throw std::invalid_argument("partial order references missing beam");
      plan.partial_order.push_back({a, b});
    }
  }
  if (j.contains("notes"))
    for (const auto& n : j["notes"]) plan.notes.push_back(n.get<std::string>());
  return plan;
}

Plan load_plan_file(const FrameDesign& design, const std::string& path) {
  return load_plan(design, read_file(path));
}

std::string save_report(const FrameDesign& design, const Plan& plan, const PlannerConfig& config) {
  json j;
  std::vector<double> compliances;
  for (const auto& s : plan.sequence) compliances.push_back(s.cost / config.nominal_force);
  std::sort(compliances.begin(), compliances.end());
  j["compliance_sorted"] = compliances; // mm per N, smallest to largest
  j["max_cost"] = plan.max_cost;
  j["epsilon_c"] = config.epsilon_c;
  j["steps_above_epsilon_c"] = 0;
  int above = 0;
  for (const auto& s : plan.sequence)
    if (s.cost > config.epsilon_c) ++above;
  j["steps_above_epsilon_c"] = above;
  j["beam_count"] = design.beam_count();
  j["joint_count"] = design.joint_count();
  j["cost_mode"] = plan.cost_mode == CostMode::exact ? "exact" : "heuristic";
  return j.dump(2) + "\n";
}

std::string toolpath_gcode(const Toolpath& toolpath, const MachineModel& machine) {
  std::ostringstream os;
  os << "; wireplan toolpath\n";
  os << "; print feed " << fmt6(machine.print_speed * 60.0) << " mm/min\n";
  int last_step = -1;
  for (const auto& m : toolpath.moves) {
    if (m.step != last_step) {
      os << "; step " << m.step << "\n";
      last_step = m.step;
    }
    switch (m.kind) {
      case ToolpathMove::Kind::travel:
        for (std::size_t i = 1; i < m.points.size(); ++i)
          os << "G0 X" << fmt6(m.points[i].x()) << " Y" << fmt6(m.points[i].y()) << " Z"
             << fmt6(m.points[i].z()) << "\n";
        if (m.points.size() == 1)
          os << "G0 X" << fmt6(m.points[0].x()) << " Y" << fmt6(m.points[0].y()) << " Z"
             << fmt6(m.points[0].z()) << "\n";
        break;
      case ToolpathMove::Kind::print:
        for (std::size_t i = 1; i < m.points.size(); ++i)
          os << "G1 X" << fmt6(m.points[i].x()) << " Y" << fmt6(m.points[i].y()) << " Z"
             << fmt6(m.points[i].z()) << " F" << fmt6(m.speed * 60.0) << "\n";
        break;
      case ToolpathMove::Kind::dwell:
        os << "G4 S" << fmt6(m.seconds) << "\n";
        break;
    }
  }
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

} // namespace wireplan
