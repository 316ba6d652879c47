#include "wireplan/frame_model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace wireplan {

int FrameDesign::add_joint(Joint j) {
  if (joint_by_id_.count(j.id)) throw std::invalid_argument("duplicate joint id: " + j.id);
  int idx = static_cast<int>(joints_.size());
  joint_by_id_[j.id] = idx;
  joints_.push_back(std::move(j));
  incident_.emplace_back();
  return idx;
}

int FrameDesign::add_beam(Beam b) {
  if (beam_by_id_.count(b.id)) throw std::invalid_argument("duplicate beam id: " + b.id);
  if (b.p < 0 || b.p >= joint_count() || b.q < 0 || b.q >= joint_count())
    throw std::invalid_argument("beam references missing joint: " + b.id);
  if (b.path.empty()) b.path = {joints_[static_cast<std::size_t>(b.p)].position,
                                joints_[static_cast<std::size_t>(b.q)].position};
  int idx = static_cast<int>(beams_.size());
  beam_by_id_[b.id] = idx;
  incident_[static_cast<std::size_t>(b.p)].push_back(idx);
  incident_[static_cast<std::size_t>(b.q)].push_back(idx);
  beams_.push_back(std::move(b));
  return idx;
}

int FrameDesign::joint_index(const std::string& id) const {
  auto it = joint_by_id_.find(id);
  return it == joint_by_id_.end() ? -1 : it->second;
}

int FrameDesign::beam_index(const std::string& id) const {
  auto it = beam_by_id_.find(id);
  return it == beam_by_id_.end() ? -1 : it->second;
}

int FrameDesign::other_joint(int beam_idx, int joint_idx) const {
  const Beam& b = beam(beam_idx);
  if (b.p == joint_idx) return b.q;
  if (b.q == joint_idx) return b.p;
  throw std::invalid_argument("joint is not an endpoint of beam " + b.id);
}

std::vector<int> FrameDesign::grounded_joints() const {
  std::vector<int> out;
  for (int i = 0; i < joint_count(); ++i)
    if (joints_[static_cast<std::size_t>(i)].grounded) out.push_back(i);
  return out;
}

int BeamSet::count() const {
  int c = 0;
  for (auto w : words_) c += static_cast<int>(__builtin_popcountll(w));
  return c;
}

std::size_t BeamSet::hash() const {
  std::size_t h = 0x9e3779b97f4a7c15ull ^ static_cast<std::size_t>(n_);
  for (auto w : words_) {
    h ^= static_cast<std::size_t>(w) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

bool AssemblyState::joint_touched(int joint_idx) const {
  for (int b : design->beams_at(joint_idx))
    if (placed.test(b)) return true;
  return false;
}

std::vector<Defect> validate_design(const FrameDesign& design, double min_segment_length) {
  std::vector<Defect> defects;
  bool any_ground = false;
  for (const auto& j : design.joints()) {
    if (!j.position.allFinite())
      defects.push_back({"non-finite-position", j.id, "joint position has non-finite component"});
    if (j.grounded) {
      any_ground = true;
      if (std::abs(j.position.z() - design.substrate_z) > kCoincidenceTol)
        defects.push_back({"grounded-off-substrate", j.id,
                           "grounded joint not on substrate plane z=" + std::to_string(design.substrate_z)});
    }
  }
  if (!any_ground) defects.push_back({"no-ground", "", "design has no grounded joint"});

  for (int bi = 0; bi < design.beam_count(); ++bi) {
    const Beam& b = design.beam(bi);
    if (b.p == b.q) defects.push_back({"degenerate-endpoints", b.id, "beam joins a joint to itself"});
    if (b.diameter <= 0) defects.push_back({"bad-diameter", b.id, "diameter must be positive"});
    if (b.path.size() < 2) {
      defects.push_back({"short-path", b.id, "path needs at least 2 points"});
      continue;
    }
    if ((b.path.front() - design.joint(b.p).position).norm() > kCoincidenceTol)
      defects.push_back({"endpoint-mismatch", b.id, "path start does not coincide with joint " + design.joint(b.p).id});
    if ((b.path.back() - design.joint(b.q).position).norm() > kCoincidenceTol)
      defects.push_back({"endpoint-mismatch", b.id, "path end does not coincide with joint " + design.joint(b.q).id});
    for (std::size_t i = 1; i < b.path.size(); ++i) {
      if (!b.path[i - 1].allFinite() || !b.path[i].allFinite()) {
        defects.push_back({"non-finite-path", b.id, "path point has non-finite component"});
        break;
      }
      if ((b.path[i] - b.path[i - 1]).norm() < min_segment_length) {
        defects.push_back({"short-segment", b.id,
                           "segment " + std::to_string(i - 1) + " shorter than min_segment_length"});
        break;
      }
    }
  }

  // Duplicate check: same unordered joint pair and identical path.
  for (int a = 0; a < design.beam_count(); ++a) {
    for (int b = a + 1; b < design.beam_count(); ++b) {
      const Beam& ba = design.beam(a);
      const Beam& bb = design.beam(b);
      bool same_pair = (ba.p == bb.p && ba.q == bb.q) || (ba.p == bb.q && ba.q == bb.p);
      if (!same_pair || ba.path.size() != bb.path.size()) continue;
      bool same_path = true;
      for (std::size_t i = 0; i < ba.path.size() && same_path; ++i)
        same_path = (ba.path[i] - bb.path[i]).norm() <= kCoincidenceTol;
      if (same_path) defects.push_back({"duplicate-beam", bb.id, "duplicates beam " + ba.id});
    }
  }
  return defects;
}

namespace {

// Adjacency of the placed multigraph with a virtual ground vertex appended at
// index n (adjacent to every grounded joint). Edges carry ids so parallel
// beams count as distinct.
struct PlacedGraph {
  int n = 0;                 // joints; virtual ground is vertex n
  std::vector<std::vector<std::pair<int, int>>> adj; // vertex -> (neighbor, edge id)

  explicit PlacedGraph(const AssemblyState& state) {
    const FrameDesign& d = *state.design;
    n = d.joint_count();
    adj.assign(static_cast<std::size_t>(n) + 1, {});
    int edge_id = 0;
    for (int bi = 0; bi < d.beam_count(); ++bi) {
      if (!state.placed.test(bi)) continue;
      const Beam& b = d.beam(bi);
      adj[static_cast<std::size_t>(b.p)].push_back({b.q, edge_id});
      adj[static_cast<std::size_t>(b.q)].push_back({b.p, edge_id});
      ++edge_id;
    }
    for (int j = 0; j < n; ++j) {
      if (!d.joint(j).grounded) continue;
      adj[static_cast<std::size_t>(j)].push_back({n, edge_id});
      adj[static_cast<std::size_t>(n)].push_back({j, edge_id});
      ++edge_id;
    }
  }
};

// Reachability from ground, optionally with one joint removed.
std::vector<char> reach_from_ground(const PlacedGraph& g, int skip_joint = -1) {
  std::vector<char> seen(static_cast<std::size_t>(g.n) + 1, 0);
  std::deque<int> queue;
  seen[static_cast<std::size_t>(g.n)] = 1;
  queue.push_back(g.n);
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (auto [w, e] : g.adj[static_cast<std::size_t>(v)]) {
      (void)e;
      if (w == skip_joint || seen[static_cast<std::size_t>(w)]) continue;
      seen[static_cast<std::size_t>(w)] = 1;
      queue.push_back(w);
    }
  }
  return seen;
}

} // namespace

StabilityAnalysis::StabilityAnalysis(const AssemblyState& state) {
  const FrameDesign& d = *state.design;
  const int n = d.joint_count();
  PlacedGraph g(state);
  stable_.assign(static_cast<std::size_t>(n), 0);
  auto seen = reach_from_ground(g);
  reach_.assign(seen.begin(), seen.begin() + n);
  for (int j = 0; j < n; ++j)
    if (d.joint(j).grounded) stable_[static_cast<std::size_t>(j)] = 1;

  // Iterative Tarjan biconnected components; mark vertices sharing a
  // component with the virtual ground as stable.
  const int ground = g.n;
  std::vector<int> disc(static_cast<std::size_t>(ground) + 1, -1);
  std::vector<int> low(static_cast<std::size_t>(ground) + 1, 0);
  std::vector<std::size_t> iter(static_cast<std::size_t>(ground) + 1, 0);
  std::vector<int> parent_edge(static_cast<std::size_t>(ground) + 1, -1);
  std::vector<std::pair<int, int>> edge_stack; // (v, w) tree/back edges
  int timer = 0;

  auto process_component = [&](std::size_t from) {
    bool has_ground = false;
    std::vector<int> verts;
    for (std::size_t k = from; k < edge_stack.size(); ++k) {
      verts.push_back(edge_stack[k].first);
      verts.push_back(edge_stack[k].second);
    }
    for (int v : verts)
      if (v == ground) has_ground = true;
    if (has_ground)
      for (int v : verts)
        if (v != ground) stable_[static_cast<std::size_t>(v)] = 1;
    edge_stack.resize(from);
  };

  std::vector<std::pair<int, std::size_t>> stack; // (vertex, edge-stack mark at entry)
  for (int root = 0; root <= ground; ++root) {
    if (disc[static_cast<std::size_t>(root)] != -1) continue;
    stack.push_back({root, 0});
    disc[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = timer++;
    while (!stack.empty()) {
      int v = stack.back().first;
      auto& it = iter[static_cast<std::size_t>(v)];
      if (it < g.adj[static_cast<std::size_t>(v)].size()) {
        auto [w, e] = g.adj[static_cast<std::size_t>(v)][it++];
        if (e == parent_edge[static_cast<std::size_t>(v)]) continue;
        if (disc[static_cast<std::size_t>(w)] == -1) {
          edge_stack.push_back({v, w});
          parent_edge[static_cast<std::size_t>(w)] = e;
          disc[static_cast<std::size_t>(w)] = low[static_cast<std::size_t>(w)] = timer++;
          stack.push_back({w, edge_stack.size() - 1});
        } else if (disc[static_cast<std::size_t>(w)] < disc[static_cast<std::size_t>(v)]) {
          edge_stack.push_back({v, w});
          low[static_cast<std::size_t>(v)] = std::min(low[static_cast<std::size_t>(v)], disc[static_cast<std::size_t>(w)]);
        }
      } else {
        auto [vv, mark] = stack.back();
        stack.pop_back();
        if (!stack.empty()) {
          int u = stack.back().first;
          low[static_cast<std::size_t>(u)] = std::min(low[static_cast<std::size_t>(u)], low[static_cast<std::size_t>(vv)]);
          if (low[static_cast<std::size_t>(vv)] >= disc[static_cast<std::size_t>(u)]) process_component(mark);
        }
      }
    }
  }
}

bool is_stable_joint(const AssemblyState& state, int joint_idx) {
  if (joint_idx < 0 || joint_idx >= state.design->joint_count())
    throw std::invalid_argument("unknown joint index");
  if (state.design->joint(joint_idx).grounded) return true;
  StabilityAnalysis analysis(state);
  return analysis.stable(joint_idx);
}

bool pivots_about(const AssemblyState& state, int beam_idx, int joint_idx) {
  if (!state.placed.test(beam_idx)) throw std::invalid_argument("beam is not placed");
  int other = state.design->other_joint(beam_idx, joint_idx); // throws when not an endpoint
  PlacedGraph g(state);
  auto seen = reach_from_ground(g, joint_idx);
  return !seen[static_cast<std::size_t>(other)];
}

bool is_cantilevered_beam(const AssemblyState& state, int beam_idx) {
  if (!state.placed.test(beam_idx)) throw std::invalid_argument("beam is not placed");
  StabilityAnalysis analysis(state);
  const Beam& b = state.design->beam(beam_idx);
  return !(analysis.stable(b.p) && analysis.stable(b.q));
}

bool joint_supports_pivoting_cantilever(const AssemblyState& state, int joint_idx) {
  const FrameDesign& d = *state.design;
  bool any_placed = false;
  for (int bi : d.beams_at(joint_idx))
    if (state.placed.test(bi)) { any_placed = true; break; }
  if (!any_placed) return false;
  PlacedGraph g(state);
  auto seen = reach_from_ground(g, joint_idx);
  for (int bi : d.beams_at(joint_idx)) {
    if (!state.placed.test(bi)) continue;
    int other = d.other_joint(bi, joint_idx);
    if (!seen[static_cast<std::size_t>(other)]) return true;
  }
  return false;
}

std::vector<std::vector<int>> connected_components(const AssemblyState& state) {
  const FrameDesign& d = *state.design;
  std::vector<int> comp(static_cast<std::size_t>(d.joint_count()), -1);
  std::vector<std::vector<int>> out;
  for (int start = 0; start < d.joint_count(); ++start) {
    if (comp[static_cast<std::size_t>(start)] != -1 || !state.joint_touched(start)) continue;
    int id = static_cast<int>(out.size());
    out.emplace_back();
    std::deque<int> queue{start};
    comp[static_cast<std::size_t>(start)] = id;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int bi : d.beams_at(v)) {
        if (!state.placed.test(bi)) continue;
        int w = d.other_joint(bi, v);
        if (comp[static_cast<std::size_t>(w)] == -1) {
          comp[static_cast<std::size_t>(w)] = id;
          queue.push_back(w);
        }
      }
    }
  }
  // Collect beams per component via their p endpoint.
  for (int bi = 0; bi < d.beam_count(); ++bi) {
    if (!state.placed.test(bi)) continue;
    out[static_cast<std::size_t>(comp[static_cast<std::size_t>(d.beam(bi).p)])].push_back(bi);
  }
  std::erase_if(out, [](const std::vector<int>& c) { return c.empty(); });
  return out;
}

} // namespace wireplan
