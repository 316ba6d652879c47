#include "wireplan/io.hpp"
#include "wireplan/planner.hpp"
#include "wireplan/satgen.hpp"
#include "wireplan/verifier.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>

using namespace wireplan;

namespace {

int fail(bool as_json, const std::string& kind, const std::string& message, int code) {
  if (as_json) {
    nlohmann::json j;
    j["error"] = kind;
    j["message"] = message;
    std::cerr << j.dump() << "\n";
  } else {
    std::cerr << "error (" << kind << "): " << message << "\n";
  }
  return code;
}

StepCostFn make_cost_fn(const PlannerConfig& config) {
  return [config](const AssemblyState& state, int beam, PrintDirection dir) {
    StabilityAnalysis stability(state);
    return step_cost(state, stability, beam, dir, config.cost_mode, config.nominal_force,
                     config.material);
  };
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"wireplan: robust printing sequences for wireframe designs"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable errors");

  // plan
  auto* cmd_plan = app.add_subcommand("plan", "plan a printing sequence and emit toolpath");
  std::string plan_design, plan_config, plan_cost, plan_out = ".";
  std::uint64_t plan_seed = 0;
  bool plan_no_reseq = false;
  cmd_plan->add_option("design", plan_design)->required();
  cmd_plan->add_option("--config", plan_config);
  cmd_plan->add_option("--cost", plan_cost)->check(CLI::IsMember({"exact", "heuristic"}));
  cmd_plan->add_option("--out", plan_out);
  cmd_plan->add_option("--seed", plan_seed);
  cmd_plan->add_flag("--no-resequence", plan_no_reseq, "skip deadhead resequencing");

  // verify
  auto* cmd_verify = app.add_subcommand("verify", "check a plan against all process constraints");
  std::string verify_design, verify_plan;
  cmd_verify->add_option("design", verify_design)->required();
  cmd_verify->add_option("plan", verify_plan)->required();

  // satgen
  auto* cmd_satgen = app.add_subcommand("satgen", "compile a NOR netlist into a design");
  std::string satgen_netlist, satgen_out;
  cmd_satgen->add_option("netlist", satgen_netlist)->required();
  cmd_satgen->add_option("--out", satgen_out)->required();

  // oracle
  auto* cmd_oracle = app.add_subcommand("oracle", "exhaustive sequence search on small designs");
  std::string oracle_design, oracle_config;
  bool oracle_minmax = false;
  int oracle_limit = kDefaultExhaustiveLimit;
  cmd_oracle->add_option("design", oracle_design)->required();
  cmd_oracle->add_option("--config", oracle_config);
  cmd_oracle->add_flag("--minmax", oracle_minmax);
  cmd_oracle->add_option("--limit", oracle_limit);

  // stats
  auto* cmd_stats = app.add_subcommand("stats", "design and constraint statistics");
  std::string stats_design, stats_config;
  cmd_stats->add_option("design", stats_design)->required();
  cmd_stats->add_option("--config", stats_config);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_plan) {
      PlannerConfig config = plan_config.empty() ? PlannerConfig{} : load_config_file(plan_config);
      if (!plan_cost.empty())
        config.cost_mode = plan_cost == "exact" ? CostMode::exact : CostMode::heuristic;
      if (cmd_plan->count("--seed")) config.tie_break_seed = plan_seed;
      FrameDesign design = load_design_file(plan_design, config.diameter);

      auto derived = derive_constraints(design, config.nozzle);
      if (!derived.ok()) {
        std::string msg = "unconstructable design:";
        for (const auto& d : derived.defects) msg += "\n  [" + d.kind + "] " + d.subject + ": " + d.detail;
        return fail(as_json, "unconstructable", msg, 2);
      }
      auto outcome = plan(design, derived.prec, config.planner_options());
      if (!outcome.ok()) return fail(as_json, "unconstructable", outcome.diagnostics, 2);

      Plan final_plan = plan_no_reseq
                            ? *outcome.plan
                            : order_for_deadheading(design, *outcome.plan, derived.prec, config.machine);
      auto violations = verify_sequence(design, [&] {
        std::vector<SequenceStep> seq;
        for (const auto& s : final_plan.sequence) seq.push_back({s.beam, s.dir});
        return seq;
      }(), derived.prec);
      if (!violations.empty())
        return fail(as_json, "internal", "planned sequence failed verification", 1);

      Toolpath toolpath = emit_toolpath(design, final_plan, config.machine);
      write_file(plan_out + "/plan.json", save_plan(design, final_plan));
      write_file(plan_out + "/toolpath.gcode", toolpath_gcode(toolpath, config.machine));
      write_file(plan_out + "/report.json", save_report(design, final_plan, config));
      std::cout << "planned " << final_plan.sequence.size() << " steps, max cost "
                << final_plan.max_cost << " mm\n";
      return 0;
    }

    if (*cmd_verify) {
      FrameDesign design = load_design_file(verify_design);
      auto derived = derive_constraints(design, NozzleModel{});
      Plan p = load_plan_file(design, verify_plan);
      std::vector<SequenceStep> seq;
      for (const auto& s : p.sequence) seq.push_back({s.beam, s.dir});
      auto violations = verify_sequence(design, seq, derived.prec);
      for (const auto& v : violations)
        std::cout << "step " << v.step << " beam " << v.beam << " [" << v.kind << "] " << v.detail
                  << "\n";
      return violations.empty() ? 0 : 1;
    }

    if (*cmd_satgen) {
      Circuit circuit = parse_netlist(read_file(satgen_netlist));
      CompiledCircuit compiled = compile_circuit(circuit);
      write_file(satgen_out, save_design(compiled.design));
      std::cout << "compiled " << circuit.gates.size() << " gates into "
                << compiled.design.beam_count() << " beams\n";
      return 0;
    }

    if (*cmd_oracle) {
      PlannerConfig config = oracle_config.empty() ? PlannerConfig{} : load_config_file(oracle_config);
      FrameDesign design = load_design_file(oracle_design, config.diameter);
      auto derived = derive_constraints(design, config.nozzle);
      if (!derived.ok()) return fail(as_json, "unconstructable", "constraint defects", 2);
      if (oracle_minmax) {
        auto result = brute_force_minmax(design, derived.prec, make_cost_fn(config), oracle_limit);
        if (!result.constructable) return fail(as_json, "unconstructable", "no feasible sequence", 2);
        std::cout << "optimal max cost " << result.max_cost << " mm\n";
        for (const auto& s : result.sequence)
          std::cout << design.beam(s.beam).id << " " << to_string(s.dir) << "\n";
      } else {
        auto seq = brute_force_plan(design, derived.prec, oracle_limit);
        if (!seq) return fail(as_json, "unconstructable", "no feasible sequence", 2);
        for (const auto& s : *seq) std::cout << design.beam(s.beam).id << " " << to_string(s.dir) << "\n";
      }
      return 0;
    }

    if (*cmd_stats) {
      PlannerConfig config = stats_config.empty() ? PlannerConfig{} : load_config_file(stats_config);
      FrameDesign design = load_design_file(stats_design, config.diameter);
      auto derived = derive_constraints(design, config.nozzle);
      int single_dir = 0;
      for (const auto& m : derived.prec.allowed)
        if (m.forward != m.reverse) ++single_dir;
      nlohmann::json j;
      j["joints"] = design.joint_count();
      j["beams"] = design.beam_count();
      j["order_pairs"] = derived.prec.order_pairs.size();
      j["single_direction_beams"] = single_dir;
      j["forced_starts"] = derived.prec.forced_starts.size();
      j["defects"] = derived.defects.size();
      std::cout << j.dump(2) << "\n";
      return derived.ok() ? 0 : 2;
    }
  } catch (const std::exception& e) {
    return fail(as_json, "exception", e.what(), 1);
  }
  return 0;
}
