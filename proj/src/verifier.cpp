#include "wireplan/verifier.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace wireplan {

std::vector<Violation> verify_sequence(const FrameDesign& design,
                                       const std::vector<SequenceStep>& sequence,
                                       const PrecedenceSet& prec) {
  std::vector<Violation> violations;
  AssemblyState state(design);

  for (int step = 0; step < static_cast<int>(sequence.size()); ++step) {
    const auto& s = sequence[static_cast<std::size_t>(step)];
    if (s.beam < 0 || s.beam >= design.beam_count()) {
      violations.push_back({step, "", "missing", "step references an unknown beam"});
      continue;
    }
    const std::string& id = design.beam(s.beam).id;
    if (state.placed.test(s.beam)) {
      violations.push_back({step, id, "duplicate", "beam appears twice in the sequence"});
      continue;
    }
    if (!prec.allows(s.beam, s.dir))
      violations.push_back({step, id, "directionality",
                            std::string("direction ") + to_string(s.dir) + " is not printable"});
    for (int p : prec.preds[static_cast<std::size_t>(s.beam)]) {
      if (!state.placed.test(p)) {
        violations.push_back({step, id, "collision",
                              "collision predecessor " + design.beam(p).id + " not yet placed"});
        break;
      }
    }
    if (!connection_feasible(state, s.beam, s.dir))
      violations.push_back({step, id, "connection",
                            "start joint is neither grounded nor on existing structure"});
    if (!cantilever_feasible(state, s.beam, s.dir))
      violations.push_back({step, id, "cantilever",
                            "an attachment joint supports a pivoting cantilever"});
    state.place(s.beam);
  }

  for (int bi = 0; bi < design.beam_count(); ++bi) {
    if (!state.placed.test(bi))
      violations.push_back({std::max(0, static_cast<int>(sequence.size()) - 1), design.beam(bi).id,
                            "missing", "beam never appears in the sequence"});
  }
  return violations;
}

namespace {

struct ReachContext {
  const FrameDesign* design;
  const PrecedenceSet* prec;
  const BeamSet* goal;
  std::unordered_set<BeamSet, BeamSetHash> dead;
};

bool reach_dfs(ReachContext& ctx, AssemblyState& state) {
  if (state.placed == *ctx.goal) return true;
  if (ctx.dead.count(state.placed)) return false;
  for (int bi = 0; bi < ctx.design->beam_count(); ++bi) {
    if (state.placed.test(bi) || !ctx.goal->test(bi)) continue;
    bool preds_ok = true;
    for (int p : ctx.prec->preds[static_cast<std::size_t>(bi)])
      if (!state.placed.test(p)) { preds_ok = false; break; }
    if (!preds_ok) continue;
    for (PrintDirection dir : {PrintDirection::forward, PrintDirection::reverse}) {
      if (!ctx.prec->allows(bi, dir)) continue;
      if (!connection_feasible(state, bi, dir)) continue;
      if (!cantilever_feasible(state, bi, dir)) continue;
      state.place(bi);
      bool found = reach_dfs(ctx, state);
      state.unplace(bi);
      if (found) return true;
      break; // directions lead to the same placed set
    }
  }
  ctx.dead.insert(state.placed);
  return false;
}

} // namespace

bool reachable(const FrameDesign& design, const AssemblyState& from, const AssemblyState& to,
               const PrecedenceSet& prec, int exhaustive_limit) {
  for (int bi = 0; bi < design.beam_count(); ++bi)
    if (from.placed.test(bi) && !to.placed.test(bi))
      throw std::invalid_argument("goal state does not contain the start state");
  int delta = to.placed.count() - from.placed.count();
  if (delta > exhaustive_limit)
    throw std::invalid_argument("instance exceeds the exhaustive oracle limit");

  ReachContext ctx{&design, &prec, &to.placed, {}};
  AssemblyState work = from;
  return reach_dfs(ctx, work);
}

std::optional<std::vector<SequenceStep>> brute_force_plan(const FrameDesign& design,
                                                          const PrecedenceSet& prec,
                                                          int exhaustive_limit) {
  if (design.beam_count() > exhaustive_limit)
    throw std::invalid_argument("instance exceeds the exhaustive oracle limit");

  AssemblyState state(design);
  AssemblyState full(design);
  for (int bi = 0; bi < design.beam_count(); ++bi) full.place(bi);

  std::vector<SequenceStep> seq;
  std::vector<char> remaining(static_cast<std::size_t>(design.beam_count()), 1);
  int left = design.beam_count();
  while (left > 0) {
    bool progressed = false;
    for (int bi = 0; bi < design.beam_count(); ++bi) {
      if (!remaining[static_cast<std::size_t>(bi)]) continue;
      std::optional<PrintDirection> playable;
      for (PrintDirection dir : {PrintDirection::forward, PrintDirection::reverse}) {
        bool preds_ok = true;
        for (int p : prec.preds[static_cast<std::size_t>(bi)])
          if (!state.placed.test(p)) { preds_ok = false; break; }
        if (!preds_ok) break;
        if (!prec.allows(bi, dir)) continue;
        if (!connection_feasible(state, bi, dir)) continue;
        if (!cantilever_feasible(state, bi, dir)) continue;
        playable = dir;
        break;
      }
      if (!playable) continue;
      state.place(bi);
      if (reachable(design, state, full, prec, exhaustive_limit)) {
        seq.push_back({bi, *playable});
        remaining[static_cast<std::size_t>(bi)] = 0;
        --left;
        progressed = true;
      } else {
        state.unplace(bi);
      }
    }
    if (!progressed) return std::nullopt;
  }
  return seq;
}

namespace {

struct MinMaxContext {
  const FrameDesign* design;
  const PrecedenceSet* prec;
  const StepCostFn* cost;
  std::unordered_map<BeamSet, std::pair<double, SequenceStep>, BeamSetHash> memo; // best completion max + first move
};

// Minimum over feasible completions of the maximum remaining step cost.
double minmax_dfs(MinMaxContext& ctx, AssemblyState& state) {
  if (state.full()) return 0.0;
  auto it = ctx.memo.find(state.placed);
  if (it != ctx.memo.end()) return it->second.first;

  double best = std::numeric_limits<double>::infinity();
  SequenceStep best_step;
  for (int bi = 0; bi < ctx.design->beam_count(); ++bi) {
    if (state.placed.test(bi)) continue;
    bool preds_ok = true;
    for (int p : ctx.prec->preds[static_cast<std::size_t>(bi)])
      if (!state.placed.test(p)) { preds_ok = false; break; }
    if (!preds_ok) continue;
    for (PrintDirection dir : {PrintDirection::forward, PrintDirection::reverse}) {
      if (!ctx.prec->allows(bi, dir)) continue;
      if (!connection_feasible(state, bi, dir)) continue;
      if (!cantilever_feasible(state, bi, dir)) continue;
      double c = (*ctx.cost)(state, bi, dir);
      state.place(bi);
      double tail = minmax_dfs(ctx, state);
      state.unplace(bi);
      double total = std::max(c, tail);
      if (total < best) {
        best = total;
        best_step = {bi, dir};
      }
    }
  }
  ctx.memo[state.placed] = {best, best_step};
  return best;
}

} // namespace

MinMaxResult brute_force_minmax(const FrameDesign& design, const PrecedenceSet& prec,
                                const StepCostFn& cost, int limit) {
  if (design.beam_count() > limit)
    throw std::invalid_argument("instance exceeds the minmax oracle limit");

  MinMaxContext ctx{&design, &prec, &cost, {}};
  AssemblyState state(design);
  double value = minmax_dfs(ctx, state);

  MinMaxResult result;
  if (!std::isfinite(value)) return result;
  result.constructable = true;
  result.max_cost = value;
  while (!state.full()) {
    auto it = ctx.memo.find(state.placed);
    if (it == ctx.memo.end()) break;
    result.sequence.push_back(it->second.second);
    state.place(it->second.second.beam);
  }
  return result;
}

} // namespace wireplan
