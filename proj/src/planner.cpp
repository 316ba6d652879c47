#include "wireplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace wireplan {

namespace {

struct Node {
  int id = -1;
  int tree = -1;
  int parent = -1;
  int beam = -1; // edge from parent; -1 for roots
  PrintDirection dir = PrintDirection::forward;
  int tip = -1; // joint reached by this node
  std::vector<int> path_beams;
  std::vector<PrintDirection> path_dirs; // traversal direction per path beam
  std::vector<int> path_joints;          // root .. tip
  bool alive = true;
  std::set<std::pair<int, int>> children; // (beam, dir) already expanded
};

struct Tree {
  int root_joint = -1;
  int root_node = -1;
};

struct Entry {
  double cost = 0;
  int node = -1;
  int beam = -1;
  PrintDirection dir = PrintDirection::forward;
  std::uint64_t root_version = 0;
  std::uint64_t end_version = 0;
};

struct Subassembly {
  std::vector<PlanStep> steps; // costs filled at accept time
};

// Union-find over joints with a stiffness version per component.
struct Components {
  std::vector<int> parent;
  std::vector<std::uint64_t> version;

  explicit Components(int n) : parent(static_cast<std::size_t>(n)), version(static_cast<std::size_t>(n), 0) {
    for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
  }
  int find(int v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
      v = parent[static_cast<std::size_t>(v)];
    }
    return v;
  }
  void bump(int v) { ++version[static_cast<std::size_t>(find(v))]; }
  std::uint64_t version_of(int v) { return version[static_cast<std::size_t>(find(v))]; }
  void unite(int a, int b) {
    int ra = find(a);
    int rb = find(b);
    if (ra == rb) return;
    std::uint64_t v = std::max(version[static_cast<std::size_t>(ra)], version[static_cast<std::size_t>(rb)]) + 1;
    parent[static_cast<std::size_t>(rb)] = ra;
    version[static_cast<std::size_t>(ra)] = v;
  }
};

class Engine {
 public:
  Engine(const FrameDesign& design, const PrecedenceSet& prec, const PlannerOptions& opts)
      : design_(design), prec_(prec), opts_(opts), state_(design), comps_(design.joint_count()),
        tree_count_(static_cast<std::size_t>(design.beam_count()), 0) {
    // Beams cantilevered in the goal state H are exempt from the
    // no-new-cantilever rule.
    AssemblyState full(design);
    for (int bi = 0; bi < design.beam_count(); ++bi) full.place(bi);
    StabilityAnalysis hstab(full);
    h_cant_.resize(static_cast<std::size_t>(design.beam_count()));
    for (int bi = 0; bi < design.beam_count(); ++bi) {
      const Beam& b = design.beam(bi);
      h_cant_[static_cast<std::size_t>(bi)] = !(hstab.stable(b.p) && hstab.stable(b.q));
    }
    stability_ = std::make_unique<StabilityAnalysis>(state_);
    tree_of_joint_.assign(static_cast<std::size_t>(design.joint_count()), -1);
    refresh_trees();
    rescan_closers();
  }

  PlanOutcome run() {
    Plan result;
    result.cost_mode = opts_.cost_mode;
    result.notes.push_back("tie_break_seed=" + std::to_string(opts_.tie_break_seed));
    while (!state_.full()) {
      auto sub = find_consistent_subassembly();
      if (!sub) {
        auto fallback = exhaustive_fallback();
        if (fallback) {
          accept(*fallback, result);
          result.notes.push_back("exhaustive fallback sequenced the final " +
                                 std::to_string(fallback->steps.size()) +
                                 " beams (worst-case instance)");
          continue;
        }
        PlanOutcome out;
        out.diagnostics = diagnostics();
        return out;
      }
      accept(*sub, result);
    }
    for (const auto& s : result.sequence) result.max_cost = std::max(result.max_cost, s.cost);
    PlanOutcome out;
    out.plan = std::move(result);
    return out;
  }

 private:
  const FrameDesign& design_;
  const PrecedenceSet& prec_;
  const PlannerOptions& opts_;
  AssemblyState state_;
  std::unique_ptr<StabilityAnalysis> stability_; // of state_
  Components comps_;
  std::vector<char> h_cant_;

  std::vector<Node> nodes_;
  std::vector<Tree> trees_;
  std::vector<int> tree_of_joint_;
  std::unordered_map<int, std::vector<int>> reached_; // joint -> node ids
  std::vector<int> tree_count_;                       // beam -> alive nodes containing it

  struct EntryCompare {
    const Engine* engine;
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.cost != b.cost) return a.cost > b.cost;
      const std::string& ia = engine->design_.beam(a.beam).id;
      const std::string& ib = engine->design_.beam(b.beam).id;
      if (ia != ib) return ia > ib;
      if (a.dir != b.dir) return a.dir == PrintDirection::reverse;
      return a.node > b.node;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, EntryCompare> frontier_{EntryCompare{this}};
  std::unordered_map<int, std::vector<Entry>> waiting_; // missing pred -> parked entries
  std::vector<Entry> blocked_;                          // parked on transient cantilever blocks
  std::vector<int> pending_closer_beams_;
  std::set<std::pair<int, int>> retry_meets_;
  std::set<int> retry_singles_;

  std::unordered_map<int, int> last_group_; // component root -> last subassembly group
  int group_count_ = 0;

  bool anchored(const StabilityAnalysis& st, int joint) const {
    return st.stable(joint) && (design_.joint(joint).grounded || state_.joint_touched(joint));
  }

  AssemblyState sim_with_path(const Node& node) const {
    AssemblyState s = state_;
    for (int b : node.path_beams) s.place(b);
    return s;
  }

  double entry_cost(const AssemblyState& sim, const StabilityAnalysis& st, int beam,
                    PrintDirection dir) const {
    return step_cost(sim, st, beam, dir, opts_.cost_mode, opts_.nominal_force, opts_.material,
                     opts_.section_override);
  }

  void refresh_trees() {
    for (int j = 0; j < design_.joint_count(); ++j) {
      if (tree_of_joint_[static_cast<std::size_t>(j)] != -1) continue;
      if (!stability_->stable(j)) continue;
      if (!design_.joint(j).grounded && !state_.joint_touched(j)) continue;
      int tid = static_cast<int>(trees_.size());
      Node root;
      root.id = static_cast<int>(nodes_.size());
      root.tree = tid;
      root.tip = j;
      root.path_joints = {j};
      nodes_.push_back(root);
      trees_.push_back({j, root.id});
      tree_of_joint_[static_cast<std::size_t>(j)] = tid;
      reached_[j].push_back(root.id);
      enqueue_expansions(nodes_.back());
    }
  }

  void enqueue_expansions(Node& node) {
    AssemblyState sim = sim_with_path(node);
    StabilityAnalysis st(sim);
    const int t = node.tip;
    for (int bi : design_.beams_at(t)) {
      if (sim.placed.test(bi)) continue;
      int other = design_.other_joint(bi, t);
      if (std::find(node.path_joints.begin(), node.path_joints.end(), other) != node.path_joints.end())
        continue;
      PrintDirection dir = (design_.beam(bi).p == t) ? PrintDirection::forward : PrintDirection::reverse;
      if (!prec_.allows(bi, dir)) continue;
      if (node.children.count({bi, static_cast<int>(dir)})) continue;
      Entry e;
      e.node = node.id;
      e.beam = bi;
      e.dir = dir;
      e.cost = entry_cost(sim, st, bi, dir);
      e.root_version = comps_.version_of(trees_[static_cast<std::size_t>(node.tree)].root_joint);
      e.end_version = comps_.version_of(other);
      push_entry(e);
    }
  }

  void push_entry(const Entry& e) {
    for (int p : prec_.preds[static_cast<std::size_t>(e.beam)]) {
      if (!state_.placed.test(p) && tree_count_[static_cast<std::size_t>(p)] == 0) {
        bool in_path = false;
        const Node& n = nodes_[static_cast<std::size_t>(e.node)];
        in_path = std::find(n.path_beams.begin(), n.path_beams.end(), p) != n.path_beams.end();
        if (!in_path) {
          waiting_[p].push_back(e);
          return;
        }
      }
    }
    frontier_.push(e);
  }

  void release_waiters(int beam) {
    auto it = waiting_.find(beam);
    if (it == waiting_.end()) return;
    auto entries = std::move(it->second);
    waiting_.erase(it);
    for (auto& e : entries) push_entry(e);
  }

  void rescan_closers() {
    pending_closer_beams_.clear();
    std::vector<int> order;
    for (int bi = 0; bi < design_.beam_count(); ++bi)
      if (!state_.placed.test(bi)) order.push_back(bi);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return design_.beam(a).id < design_.beam(b).id; });
    for (int bi : order) {
      const Beam& b = design_.beam(bi);
      if (!anchored(*stability_, b.p) || !anchored(*stability_, b.q)) continue;
      bool preds_ok = true;
      for (int p : prec_.preds[static_cast<std::size_t>(bi)])
        if (!state_.placed.test(p)) { preds_ok = false; break; }
      if (!preds_ok) continue;
      pending_closer_beams_.push_back(bi);
    }
  }

  std::optional<Subassembly> take_zero_closer() {
    for (std::size_t i = 0; i < pending_closer_beams_.size(); ++i) {
      int bi = pending_closer_beams_[i];
      if (state_.placed.test(bi)) continue;
      const Beam& b = design_.beam(bi);
      if (!anchored(*stability_, b.p) || !anchored(*stability_, b.q)) continue;
      bool preds_ok = true;
      for (int p : prec_.preds[static_cast<std::size_t>(bi)])
        if (!state_.placed.test(p)) { preds_ok = false; break; }
      if (!preds_ok) continue;
      for (PrintDirection dir : {PrintDirection::forward, PrintDirection::reverse}) {
        if (!prec_.allows(bi, dir)) continue;
        if (!connection_feasible(state_, bi, dir)) continue;
        if (!cantilever_feasible(state_, bi, dir)) continue;
        Subassembly sub;
        sub.steps.push_back({bi, dir, 0.0, 0});
        pending_closer_beams_.erase(pending_closer_beams_.begin() + static_cast<long>(i));
        return sub;
      }
    }
    return std::nullopt;
  }

  // Places C hypothetically and checks the consistency condition: no beam of C
  // may end up cantilevered unless it is cantilevered in the full design.
  bool condition3_holds(const std::vector<int>& c_beams) const {
    AssemblyState sim = state_;
    for (int b : c_beams) sim.place(b);
    StabilityAnalysis st(sim);
    for (int b : c_beams) {
      const Beam& beam = design_.beam(b);
      if (!(st.stable(beam.p) && st.stable(beam.q)) && !h_cant_[static_cast<std::size_t>(b)])
        return false;
    }
    return true;
  }

  // Finds a feasible internal order for exactly the beams of C (with fixed
  // directions) from the current state.
  std::optional<std::vector<PlanStep>> sequence_dfs(const std::vector<std::pair<int, PrintDirection>>& c) {
    std::vector<std::pair<int, PrintDirection>> moves = c;
    std::sort(moves.begin(), moves.end(), [&](const auto& a, const auto& b) {
      return design_.beam(a.first).id < design_.beam(b.first).id;
    });
    AssemblyState sim = state_;
    std::unordered_set<BeamSet, BeamSetHash> dead;
    std::vector<PlanStep> out;

    std::function<bool()> dfs = [&]() -> bool {
      if (out.size() == moves.size()) return true;
      if (dead.count(sim.placed)) return false;
      for (const auto& [bi, dir] : moves) {
        if (sim.placed.test(bi)) continue;
        bool preds_ok = true;
        for (int p : prec_.preds[static_cast<std::size_t>(bi)])
          if (!sim.placed.test(p)) { preds_ok = false; break; }
        if (!preds_ok) continue;
        if (!connection_feasible(sim, bi, dir)) continue;
        if (!cantilever_feasible(sim, bi, dir)) continue;
        sim.place(bi);
        out.push_back({bi, dir, 0.0, 0});
        if (dfs()) return true;
        out.pop_back();
        sim.unplace(bi);
      }
      dead.insert(sim.placed);
      return false;
    };
    if (!dfs()) return std::nullopt;
    return out;
  }

  // Closure + internal sequencing + condition 3 for a candidate union of tree
  // paths. Returns the accepted subassembly or nothing.
  std::optional<Subassembly> validate_candidate(std::vector<int> node_ids) {
    std::map<int, PrintDirection> dirs; // beam -> fixed direction
    std::vector<int> beams;
    std::set<int> used_nodes;
    int paths = 0;

    auto add_node_path = [&](int nid) -> bool {
      if (used_nodes.count(nid)) return true;
      const Node& n = nodes_[static_cast<std::size_t>(nid)];
      if (!n.alive) return false;
      for (std::size_t i = 0; i < n.path_beams.size(); ++i) {
        int b = n.path_beams[i];
        PrintDirection dir = n.path_dirs[i];
        auto it = dirs.find(b);
        if (it != dirs.end() && it->second != dir) return false; // conflicting traversals
        if (it == dirs.end()) {
          dirs[b] = dir;
          beams.push_back(b);
        }
      }
      used_nodes.insert(nid);
      ++paths;
      return true;
    };

    for (int nid : node_ids)
      if (!add_node_path(nid)) return std::nullopt;

    // Predecessor closure over tree paths.
    for (int round = 0; round < opts_.closure_max_paths; ++round) {
      int missing = -1;
      for (int b : beams) {
        for (int p : prec_.preds[static_cast<std::size_t>(b)]) {
          if (state_.placed.test(p) || dirs.count(p)) continue;
          missing = p;
          break;
        }
        if (missing != -1) break;
      }
      if (missing == -1) break;
      int donor = -1;
      for (const Node& n : nodes_) {
        if (!n.alive || n.beam == -1) continue;
        if (std::find(n.path_beams.begin(), n.path_beams.end(), missing) == n.path_beams.end()) continue;
        if (donor == -1 || n.id < donor) donor = n.id;
      }
      if (donor == -1) return std::nullopt;
      if (paths + 1 > opts_.closure_max_paths) return std::nullopt;
      if (!add_node_path(donor)) return std::nullopt;
    }
    // Final check: closure converged.
    for (int b : beams)
      for (int p : prec_.preds[static_cast<std::size_t>(b)])
        if (!state_.placed.test(p) && !dirs.count(p)) return std::nullopt;

    if (!condition3_holds(beams)) return std::nullopt;

    std::vector<std::pair<int, PrintDirection>> moves;
    for (int b : beams) moves.push_back({b, dirs[b]});
    auto seq = sequence_dfs(moves);
    if (!seq) return std::nullopt;
    Subassembly sub;
    sub.steps = std::move(*seq);
    return sub;
  }

  std::optional<Subassembly> candidates_for_node(const Node& node) {
    // Single-path candidate: worth validating when the tip closes onto stable
    // structure or the substrate, or the whole path is design-cantilevered.
    bool tip_closes = design_.joint(node.tip).grounded || anchored(*stability_, node.tip);
    bool all_h_cant = !node.path_beams.empty();
    for (int b : node.path_beams)
      if (!h_cant_[static_cast<std::size_t>(b)]) { all_h_cant = false; break; }
    if (tip_closes || all_h_cant) {
      auto sub = validate_candidate({node.id});
      if (sub) return sub;
      retry_singles_.insert(node.id);
    }

    auto it = reached_.find(node.tip);
    if (it != reached_.end()) {
      std::vector<int> partners = it->second;
      std::sort(partners.begin(), partners.end());
      for (int pid : partners) {
        const Node& partner = nodes_[static_cast<std::size_t>(pid)];
        if (!partner.alive || partner.tree == node.tree) continue;
        auto sub = validate_candidate({node.id, pid});
        if (sub) return sub;
        retry_meets_.insert({std::min(node.id, pid), std::max(node.id, pid)});
      }
    }
    return std::nullopt;
  }

  std::optional<Subassembly> process_retries() {
    for (auto it = retry_singles_.begin(); it != retry_singles_.end();) {
      const Node& n = nodes_[static_cast<std::size_t>(*it)];
      if (!n.alive) { it = retry_singles_.erase(it); continue; }
      auto sub = validate_candidate({n.id});
      if (sub) { retry_singles_.erase(it); return sub; }
      ++it;
    }
    for (auto it = retry_meets_.begin(); it != retry_meets_.end();) {
      const Node& a = nodes_[static_cast<std::size_t>(it->first)];
      const Node& b = nodes_[static_cast<std::size_t>(it->second)];
      if (!a.alive || !b.alive) { it = retry_meets_.erase(it); continue; }
      auto sub = validate_candidate({it->first, it->second});
      if (sub) { retry_meets_.erase(it); return sub; }
      ++it;
    }
    return std::nullopt;
  }

  std::optional<Subassembly> find_consistent_subassembly() {
    if (auto sub = take_zero_closer()) return sub;
    if (auto sub = process_retries()) return sub;

    while (!frontier_.empty()) {
      Entry e = frontier_.top();
      frontier_.pop();
      Node& node = nodes_[static_cast<std::size_t>(e.node)];
      if (!node.alive || state_.placed.test(e.beam)) continue;
      if (node.children.count({e.beam, static_cast<int>(e.dir)})) continue;

      bool path_stale = false;
      for (int b : node.path_beams)
        if (state_.placed.test(b)) { path_stale = true; break; }
      if (path_stale) continue;

      bool missing_somewhere = false;
      for (int p : prec_.preds[static_cast<std::size_t>(e.beam)]) {
        if (state_.placed.test(p) || tree_count_[static_cast<std::size_t>(p)] > 0) continue;
        if (std::find(node.path_beams.begin(), node.path_beams.end(), p) != node.path_beams.end()) continue;
        waiting_[p].push_back(e);
        missing_somewhere = true;
        break;
      }
      if (missing_somewhere) continue;

      const int root_joint = trees_[static_cast<std::size_t>(node.tree)].root_joint;
      const int other = design_.other_joint(e.beam, node.tip);
      if (comps_.version_of(root_joint) != e.root_version ||
          comps_.version_of(other) != e.end_version) {
        AssemblyState sim = sim_with_path(node);
        StabilityAnalysis st(sim);
        e.cost = entry_cost(sim, st, e.beam, e.dir);
        e.root_version = comps_.version_of(root_joint);
        e.end_version = comps_.version_of(other);
        frontier_.push(e);
        continue;
      }

      {
        AssemblyState sim = sim_with_path(node);
        // Transient blocks (a pivoting cantilever at the attach joint) clear
        // once later subassemblies stabilize it; park the entry.
        if (!connection_feasible(sim, e.beam, e.dir) || !cantilever_feasible(sim, e.beam, e.dir)) {
          blocked_.push_back(e);
          continue;
        }
      }

      node.children.insert({e.beam, static_cast<int>(e.dir)});
      Node child;
      child.id = static_cast<int>(nodes_.size());
      child.tree = node.tree;
      child.parent = node.id;
      child.beam = e.beam;
      child.dir = e.dir;
      child.tip = other;
      child.path_beams = node.path_beams;
      child.path_beams.push_back(e.beam);
      child.path_dirs = node.path_dirs;
      child.path_dirs.push_back(e.dir);
      child.path_joints = node.path_joints;
      child.path_joints.push_back(other);
      nodes_.push_back(child);
      Node& stored = nodes_.back();
      reached_[stored.tip].push_back(stored.id);
      ++tree_count_[static_cast<std::size_t>(e.beam)];
      release_waiters(e.beam);

      if (auto sub = candidates_for_node(stored)) return sub;
      enqueue_expansions(stored);
    }
    return std::nullopt;
  }

  std::optional<Subassembly> exhaustive_fallback() {
    std::vector<std::pair<int, PrintDirection>> rest;
    for (int bi = 0; bi < design_.beam_count(); ++bi)
      if (!state_.placed.test(bi)) rest.push_back({bi, PrintDirection::forward});
    if (static_cast<int>(rest.size()) > opts_.fallback_limit) return std::nullopt;

    // Directions are free here; search over both per beam.
    AssemblyState sim = state_;
    std::unordered_set<BeamSet, BeamSetHash> dead;
    std::vector<PlanStep> out;
    std::function<bool()> dfs = [&]() -> bool {
      if (sim.full()) return true;
      if (dead.count(sim.placed)) return false;
      for (auto& [bi, unused] : rest) {
        (void)unused;
        if (sim.placed.test(bi)) continue;
        bool preds_ok = true;
        for (int p : prec_.preds[static_cast<std::size_t>(bi)])
          if (!sim.placed.test(p)) { preds_ok = false; break; }
        if (!preds_ok) continue;
        for (PrintDirection dir : {PrintDirection::forward, PrintDirection::reverse}) {
          if (!prec_.allows(bi, dir)) continue;
          if (!connection_feasible(sim, bi, dir)) continue;
          if (!cantilever_feasible(sim, bi, dir)) continue;
          sim.place(bi);
          out.push_back({bi, dir, 0.0, 0});
          if (dfs()) return true;
          out.pop_back();
          sim.unplace(bi);
        }
      }
      dead.insert(sim.placed);
      return false;
    };
    if (!dfs()) return std::nullopt;
    Subassembly sub;
    sub.steps = std::move(out);
    return sub;
  }

  void accept(Subassembly& sub, Plan& plan) {
    const int group = group_count_++;

    // Record the partial order: the new subassembly succeeds the previous one
    // in every component it attaches to.
    std::set<int> attach_roots;
    for (auto& s : sub.steps) {
      const Beam& b = design_.beam(s.beam);
      for (int j : {b.p, b.q})
        if (state_.joint_touched(j)) attach_roots.insert(comps_.find(j));
    }
    std::vector<int> group_beams;
    for (int root : attach_roots) {
      auto it = last_group_.find(root);
      if (it == last_group_.end()) continue;
      for (const auto& prev : plan.sequence) {
        if (prev.group != it->second) continue;
        for (const auto& s : sub.steps) plan.partial_order.push_back({prev.beam, s.beam});
      }
    }

    // Physical step costs along the accepted order, then commit.
    AssemblyState sim = state_;
    for (std::size_t i = 0; i < sub.steps.size(); ++i) {
      auto& s = sub.steps[i];
      StabilityAnalysis st(sim);
      s.cost = step_cost(sim, st, s.beam, s.dir, opts_.cost_mode, opts_.nominal_force,
                         opts_.material, opts_.section_override);
      s.group = group;
      sim.place(s.beam);
      if (i > 0) plan.partial_order.push_back({sub.steps[i - 1].beam, s.beam});
      group_beams.push_back(s.beam);
    }

    for (auto& s : sub.steps) {
      state_.place(s.beam);
      tree_count_levels_fix(s.beam);
      plan.sequence.push_back(s);
      release_waiters(s.beam);
    }
    for (int root : attach_roots) comps_.bump(root);
    for (int b : group_beams) {
      const Beam& beam = design_.beam(b);
      comps_.unite(beam.p, beam.q);
    }
    last_group_[comps_.find(design_.beam(group_beams.front()).p)] = group;

    stability_ = std::make_unique<StabilityAnalysis>(state_);
    rebase();
    rescan_closers();
  }

  // A beam placed for real no longer counts as tree-available.
  void tree_count_levels_fix(int beam) { tree_count_[static_cast<std::size_t>(beam)] = 0; }

  void rebase() {
    const int existing = static_cast<int>(nodes_.size());
    std::vector<std::pair<int, std::vector<std::pair<int, PrintDirection>>>> reroots; // joint, suffix

    for (int nid = 0; nid < existing; ++nid) {
      Node& n = nodes_[static_cast<std::size_t>(nid)];
      if (!n.alive || n.beam == -1) continue;
      std::size_t prefix = 0;
      while (prefix < n.path_beams.size() && state_.placed.test(n.path_beams[prefix])) ++prefix;
      if (prefix == 0) continue; // untouched by this acceptance
      bool rest_clean = true;
      for (std::size_t i = prefix; i < n.path_beams.size(); ++i)
        if (state_.placed.test(n.path_beams[i])) { rest_clean = false; break; }

      // Retire the node; maybe resurrect its unplaced suffix under a new root.
      if (rest_clean && prefix < n.path_beams.size()) {
        int pivot = n.path_joints[prefix];
        if (stability_->stable(pivot)) {
          std::vector<std::pair<int, PrintDirection>> suffix;
          int cur = nid;
          std::vector<std::pair<int, PrintDirection>> chain;
          while (cur != -1 && nodes_[static_cast<std::size_t>(cur)].beam != -1) {
            chain.push_back({nodes_[static_cast<std::size_t>(cur)].beam, nodes_[static_cast<std::size_t>(cur)].dir});
            cur = nodes_[static_cast<std::size_t>(cur)].parent;
          }
          std::reverse(chain.begin(), chain.end());
          for (std::size_t i = prefix; i < chain.size(); ++i) suffix.push_back(chain[i]);
          if (!suffix.empty()) reroots.push_back({pivot, std::move(suffix)});
        }
      }
      kill_node(nid);
    }

    refresh_trees();

    for (auto& [joint, suffix] : reroots) {
      int tid = tree_of_joint_[static_cast<std::size_t>(joint)];
      if (tid == -1) continue;
      int cur = trees_[static_cast<std::size_t>(tid)].root_node;
      bool ok = true;
      for (auto& [beam, dir] : suffix) {
        if (state_.placed.test(beam)) { ok = false; break; }
        Node& parent = nodes_[static_cast<std::size_t>(cur)];
        if (parent.children.count({beam, static_cast<int>(dir)})) {
          // Suffix already present; follow it.
          int found = -1;
          for (int cid = 0; cid < static_cast<int>(nodes_.size()); ++cid) {
            const Node& c = nodes_[static_cast<std::size_t>(cid)];
            if (c.alive && c.parent == cur && c.beam == beam && c.dir == dir) { found = cid; break; }
          }
          if (found == -1) { ok = false; break; }
          cur = found;
          continue;
        }
        int expected_start = start_joint(design_.beam(beam), dir);
        if (expected_start != parent.tip) { ok = false; break; }
        parent.children.insert({beam, static_cast<int>(dir)});
        Node child;
        child.id = static_cast<int>(nodes_.size());
        child.tree = parent.tree;
        child.parent = parent.id;
        child.beam = beam;
        child.dir = dir;
        child.tip = design_.other_joint(beam, parent.tip);
        child.path_beams = parent.path_beams;
        child.path_beams.push_back(beam);
        child.path_dirs = parent.path_dirs;
        child.path_dirs.push_back(dir);
        child.path_joints = parent.path_joints;
        child.path_joints.push_back(child.tip);
        nodes_.push_back(child);
        reached_[child.tip].push_back(child.id);
        ++tree_count_[static_cast<std::size_t>(beam)];
        release_waiters(beam);
        enqueue_expansions(nodes_.back());
        retry_singles_.insert(child.id);
        cur = child.id;
      }
      (void)ok;
    }

    // Entries parked on transient blocks get another chance now that the
    // stability picture changed. Cost staleness is caught at pop time.
    std::vector<Entry> blocked;
    blocked.swap(blocked_);
    for (auto& e : blocked) {
      if (!nodes_[static_cast<std::size_t>(e.node)].alive || state_.placed.test(e.beam)) continue;
      frontier_.push(e);
    }
  }

  void kill_node(int nid) {
    Node& n = nodes_[static_cast<std::size_t>(nid)];
    if (!n.alive) return;
    n.alive = false;
    if (n.beam != -1 && !state_.placed.test(n.beam))
      tree_count_[static_cast<std::size_t>(n.beam)] =
          std::max(0, tree_count_[static_cast<std::size_t>(n.beam)] - 1);
  }

  std::string diagnostics() const {
    std::ostringstream os;
    os << "unconstructable: no consistent subassembly found\n";
    os << "placed " << state_.placed_count() << "/" << design_.beam_count() << " beams\n";
    os << "trees:";
    for (const auto& t : trees_) os << " " << design_.joint(t.root_joint).id;
    os << "\nunplaced:";
    for (int bi = 0; bi < design_.beam_count(); ++bi)
      if (!state_.placed.test(bi)) os << " " << design_.beam(bi).id;
    os << "\nwaiting on predecessors:";
    for (const auto& [beam, entries] : waiting_)
      os << " " << design_.beam(beam).id << "(" << entries.size() << ")";
    os << "\n";
    return os.str();
  }
};

} // namespace

PlanOutcome plan(const FrameDesign& design, const PrecedenceSet& prec, const PlannerOptions& options) {
  Engine engine(design, prec, options);
  return engine.run();
}

double deadhead_time(const Vec3& from, const Vec3& to, double z_safe, const MachineModel& machine) {
  const double z_travel = std::max({z_safe, from.z(), to.z()});
  const double up = (z_travel - from.z()) / machine.axis_max_speed.z();
  const double down = (z_travel - to.z()) / machine.axis_max_speed.z();
  const double horiz = std::max(std::abs(to.x() - from.x()) / machine.axis_max_speed.x(),
                                std::abs(to.y() - from.y()) / machine.axis_max_speed.y());
  return up + horiz + down;
}

double deadhead_time(const Vec3& from, const Vec3& to, const AssemblyState& state,
                     const MachineModel& machine) {
  double maxz = state.design->substrate_z;
  for (int bi = 0; bi < state.design->beam_count(); ++bi)
    if (state.placed.test(bi)) maxz = std::max(maxz, state.design->beam(bi).max_z());
  return deadhead_time(from, to, maxz + machine.z_clearance, machine);
}

Plan order_for_deadheading(const FrameDesign& design, const Plan& input, const PrecedenceSet& prec,
                           const MachineModel& machine) {
  std::unordered_map<int, PlanStep> step_of;
  for (const auto& s : input.sequence) step_of[s.beam] = s;

  std::vector<std::vector<int>> order_preds(static_cast<std::size_t>(design.beam_count()));
  for (auto [a, b] : input.partial_order) order_preds[static_cast<std::size_t>(b)].push_back(a);

  Plan out = input;
  out.sequence.clear();

  AssemblyState state(design);
  double maxz = design.substrate_z;
  Vec3 pos(0, 0, 0);
  if (!input.sequence.empty()) {
    const auto& first = input.sequence.front();
    const Beam& b = design.beam(first.beam);
    pos = design.joint(start_joint(b, first.dir)).position;
  }

  while (out.sequence.size() < input.sequence.size()) {
    int best = -1;
    double best_time = 0;
    for (const auto& s : input.sequence) {
      if (state.placed.test(s.beam)) continue;
      bool ready = true;
      for (int p : order_preds[static_cast<std::size_t>(s.beam)])
        if (!state.placed.test(p)) { ready = false; break; }
      if (!ready) continue;
      for (int p : prec.preds[static_cast<std::size_t>(s.beam)])
        if (!state.placed.test(p)) { ready = false; break; }
      if (!ready) continue;
      if (!prec.allows(s.beam, s.dir)) continue;
      if (!connection_feasible(state, s.beam, s.dir)) continue;
      if (!cantilever_feasible(state, s.beam, s.dir)) continue;
      const Beam& b = design.beam(s.beam);
      Vec3 start = design.joint(start_joint(b, s.dir)).position;
      double t = deadhead_time(pos, start, maxz + machine.z_clearance, machine);
      if (best == -1 || t < best_time - 1e-12 ||
          (std::abs(t - best_time) <= 1e-12 && design.beam(s.beam).id < design.beam(best).id)) {
        best = s.beam;
        best_time = t;
      }
    }
    if (best == -1)
      throw std::runtime_error("resequencing failed: recorded constraints admit no action");
    const PlanStep& s = step_of[best];
    out.sequence.push_back(s);
    state.place(best);
    const Beam& b = design.beam(best);
    maxz = std::max(maxz, b.max_z());
    std::vector<Vec3> pts = b.path;
    pos = (s.dir == PrintDirection::forward) ? pts.back() : pts.front();
  }
  return out;
}

double Toolpath::print_time(double print_speed) const {
  double len = 0;
  for (const auto& m : moves) {
    if (m.kind != ToolpathMove::Kind::print) continue;
    for (std::size_t i = 1; i < m.points.size(); ++i) len += (m.points[i] - m.points[i - 1]).norm();
  }
  return len / print_speed;
}

Toolpath emit_toolpath(const FrameDesign& design, const Plan& plan, const MachineModel& machine) {
  Toolpath tp;
  double maxz = design.substrate_z;
  Vec3 pos(0, 0, design.substrate_z);
  bool first = true;
  for (int i = 0; i < static_cast<int>(plan.sequence.size()); ++i) {
    const auto& s = plan.sequence[static_cast<std::size_t>(i)];
    const Beam& b = design.beam(s.beam);
    std::vector<Vec3> pts = b.path;
    if (s.dir == PrintDirection::reverse) std::reverse(pts.begin(), pts.end());

    const double z_safe = maxz + machine.z_clearance;
    const double z_travel = std::max({z_safe, pos.z(), pts.front().z()});
    ToolpathMove travel;
    travel.kind = ToolpathMove::Kind::travel;
    travel.step = i;
    if (first) {
      travel.points = {pts.front()};
      first = false;
    } else {
      travel.points = {pos, Vec3(pos.x(), pos.y(), z_travel),
                       Vec3(pts.front().x(), pts.front().y(), z_travel), pts.front()};
    }
    tp.moves.push_back(travel);

    ToolpathMove print;
    print.kind = ToolpathMove::Kind::print;
    print.step = i;
    print.points = pts;
    print.speed = machine.print_speed;
    tp.moves.push_back(print);

    ToolpathMove dwell;
    dwell.kind = ToolpathMove::Kind::dwell;
    dwell.step = i;
    dwell.points = {pts.back()};
    dwell.seconds = machine.dwell_s;
    tp.moves.push_back(dwell);

    pos = pts.back();
    maxz = std::max(maxz, b.max_z());
  }
  return tp;
}

} // namespace wireplan
