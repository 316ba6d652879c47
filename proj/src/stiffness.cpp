#include "wireplan/stiffness.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>

namespace wireplan {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSingularPivotRatio = 1e-12;
} // namespace

SectionProperties SectionProperties::circular(double diameter) {
  SectionProperties s;
  s.area = kPi * diameter * diameter / 4.0;
  s.bending_inertia = kPi * std::pow(diameter, 4) / 64.0;
  s.torsion_constant = kPi * std::pow(diameter, 4) / 32.0;
  return s;
}

Mat12 element_stiffness(const Vec3& a, const Vec3& b, const Material& material,
                        const SectionProperties& section) {
  const double L = (b - a).norm();
  if (L <= 0) throw std::invalid_argument("zero-length segment");
  const double E = material.elastic_modulus;
  const double G = material.shear_modulus;
  const double A = section.area;
  const double I = section.bending_inertia;
  const double J = section.torsion_constant;

  Mat12 k = Mat12::Zero();
  const double ax = E * A / L;
  const double tq = G * J / L;
  const double b1 = 12.0 * E * I / (L * L * L);
  const double b2 = 6.0 * E * I / (L * L);
  const double b3 = 4.0 * E * I / L;
  const double b4 = 2.0 * E * I / L;

  k(0, 0) = k(6, 6) = ax;
  k(0, 6) = k(6, 0) = -ax;
  k(3, 3) = k(9, 9) = tq;
  k(3, 9) = k(9, 3) = -tq;
  // Bending in the local x-y plane (rotation about z).
  k(1, 1) = k(7, 7) = b1;
  k(1, 7) = k(7, 1) = -b1;
  k(1, 5) = k(5, 1) = k(1, 11) = k(11, 1) = b2;
  k(5, 7) = k(7, 5) = k(7, 11) = k(11, 7) = -b2;
  k(5, 5) = k(11, 11) = b3;
  k(5, 11) = k(11, 5) = b4;
  // Bending in the local x-z plane (rotation about y).
  k(2, 2) = k(8, 8) = b1;
  k(2, 8) = k(8, 2) = -b1;
  k(2, 4) = k(4, 2) = k(2, 10) = k(10, 2) = -b2;
  k(4, 8) = k(8, 4) = k(8, 10) = k(10, 8) = b2;
  k(4, 4) = k(10, 10) = b3;
  k(4, 10) = k(10, 4) = b4;

  // Local axes: x along the segment; the circular section makes the roll
  // angle irrelevant.
  Vec3 x = (b - a) / L;
  Vec3 ref = std::abs(x.z()) > 0.999 ? Vec3(1, 0, 0) : Vec3(0, 0, 1);
  Vec3 y = ref.cross(x).normalized();
  Vec3 z = x.cross(y);
  Eigen::Matrix3d R;
  R.row(0) = x;
  R.row(1) = y;
  R.row(2) = z;

  Mat12 T = Mat12::Zero();
  for (int blk = 0; blk < 4; ++blk) T.block<3, 3>(3 * blk, 3 * blk) = R;
  return T.transpose() * k * T;
}

namespace {

struct LDLTHolder {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  Eigen::SparseMatrix<double> K;
};

} // namespace

FrameSystem::FrameSystem(const AssemblyState& state, const Material& material,
                         std::optional<Candidate> candidate,
                         std::optional<SectionProperties> section_override) {
  const FrameDesign& d = *state.design;
  joint_node_.assign(static_cast<std::size_t>(d.joint_count()), -1);

  std::vector<int> included;
  for (int bi = 0; bi < d.beam_count(); ++bi)
    if (state.placed.test(bi)) included.push_back(bi);

  bool any_ground = false;
  auto touch_joint = [&](int j) {
    if (joint_node_[static_cast<std::size_t>(j)] == -1) {
      joint_node_[static_cast<std::size_t>(j)] = node_count_++;
      node_fixed_.push_back(d.joint(j).grounded ? 1 : 0);
    }
    if (d.joint(j).grounded) any_ground = true;
  };
  for (int bi : included) {
    touch_joint(d.beam(bi).p);
    touch_joint(d.beam(bi).q);
  }

  auto section_for = [&](const Beam& b) {
    return section_override ? *section_override : SectionProperties::circular(b.diameter);
  };

  for (int bi : included) {
    const Beam& b = d.beam(bi);
    const SectionProperties sec = section_for(b);
    int prev = joint_node_[static_cast<std::size_t>(b.p)];
    for (std::size_t i = 1; i < b.path.size(); ++i) {
      int next;
      if (i + 1 == b.path.size()) {
        next = joint_node_[static_cast<std::size_t>(b.q)];
      } else {
        next = node_count_++;
        node_fixed_.push_back(0);
      }
      add_element(b.path[i - 1], b.path[i], prev, next, material, sec);
      prev = next;
    }
  }

  if (candidate) {
    const Beam& b = d.beam(candidate->beam);
    const SectionProperties sec = section_for(b);
    std::vector<Vec3> pts = b.path;
    int start = b.p;
    if (candidate->dir == PrintDirection::reverse) {
      std::reverse(pts.begin(), pts.end());
      start = b.q;
    }
    if (joint_node_[static_cast<std::size_t>(start)] == -1) {
      // Fresh start joint: legal only when grounded (connection constraint).
      touch_joint(start);
    }
    int prev = joint_node_[static_cast<std::size_t>(start)];
    for (std::size_t i = 1; i < pts.size(); ++i) {
      int next = node_count_++;
      node_fixed_.push_back(0);
      add_element(pts[i - 1], pts[i], prev, next, material, sec);
      prev = next;
    }
    tip_node_ = prev;
    if (d.joint(start).grounded) any_ground = true;
  }

  if (!any_ground) throw std::runtime_error("system has no grounded joint");

  // Every node must reach ground through assembled elements.
  {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(node_count_));
    for (std::size_t t = 0; t < triplets_.size(); ++t) {
      int r = triplets_[t].row() / 6;
      int c = triplets_[t].col() / 6;
      if (r != c) {
        adj[static_cast<std::size_t>(r)].push_back(c);
        adj[static_cast<std::size_t>(c)].push_back(r);
      }
    }
    std::vector<char> seen(static_cast<std::size_t>(node_count_), 0);
    std::deque<int> queue;
    for (int v = 0; v < node_count_; ++v)
      if (node_fixed_[static_cast<std::size_t>(v)]) { seen[static_cast<std::size_t>(v)] = 1; queue.push_back(v); }
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int w : adj[static_cast<std::size_t>(v)])
        if (!seen[static_cast<std::size_t>(w)]) { seen[static_cast<std::size_t>(w)] = 1; queue.push_back(w); }
    }
    for (int v = 0; v < node_count_; ++v) {
      if (seen[static_cast<std::size_t>(v)]) continue;
      for (int j = 0; j < d.joint_count(); ++j)
        if (joint_node_[static_cast<std::size_t>(j)] == v)
          throw std::runtime_error("floating component: joint " + d.joint(j).id + " has no path to ground");
      throw std::runtime_error("floating component: internal node " + std::to_string(v));
    }
  }

  free_index_.assign(static_cast<std::size_t>(node_count_) * 6, -1);
  for (int v = 0; v < node_count_; ++v) {
    if (node_fixed_[static_cast<std::size_t>(v)]) continue;
    for (int c = 0; c < 6; ++c) free_index_[static_cast<std::size_t>(v * 6 + c)] = free_dofs_++;
  }
}

void FrameSystem::add_element(const Vec3& a, const Vec3& b, int node_a, int node_b,
                              const Material& material, const SectionProperties& section) {
  Mat12 k = element_stiffness(a, b, material, section);
  const int nodes[2] = {node_a, node_b};
  for (int i = 0; i < 12; ++i) {
    for (int j = 0; j < 12; ++j) {
      if (k(i, j) == 0.0) continue;
      int gi = nodes[i / 6] * 6 + i % 6;
      int gj = nodes[j / 6] * 6 + j % 6;
      triplets_.emplace_back(gi, gj, k(i, j));
    }
  }
}

void FrameSystem::factorize() const {
  if (factor_) return;
  auto holder = std::make_shared<LDLTHolder>();
  std::vector<Eigen::Triplet<double>> reduced;
  reduced.reserve(triplets_.size());
  for (const auto& t : triplets_) {
    int r = free_index_[static_cast<std::size_t>(t.row())];
    int c = free_index_[static_cast<std::size_t>(t.col())];
    if (r >= 0 && c >= 0) reduced.emplace_back(r, c, t.value());
  }
  holder->K.resize(free_dofs_, free_dofs_);
  holder->K.setFromTriplets(reduced.begin(), reduced.end());
  holder->solver.compute(holder->K);
  if (holder->solver.info() != Eigen::Success)
    throw std::runtime_error("stiffness factorization failed");
  const auto& D = holder->solver.vectorD();
  double dmax = 0;
  for (int i = 0; i < D.size(); ++i) dmax = std::max(dmax, std::abs(D[i]));
  for (int i = 0; i < D.size(); ++i) {
    if (std::abs(D[i]) < kSingularPivotRatio * dmax)
      throw std::runtime_error("mechanism detected: unconstrained DOF " + std::to_string(i));
  }
  factor_ = holder;
}

int FrameSystem::node_of_joint(int joint_idx) const {
  int node = joint_node_.at(static_cast<std::size_t>(joint_idx));
  return node;
}

DeflectionField FrameSystem::solve_at_node(int node, const Vec3& force, const Vec3& moment) const {
  if (node < 0 || node >= node_count_) throw std::invalid_argument("load node outside the system");
  if (node_fixed_[static_cast<std::size_t>(node)])
    throw std::invalid_argument("load applied to a fixed node");
  factorize();
  auto holder = std::static_pointer_cast<LDLTHolder>(factor_);

  Eigen::VectorXd F = Eigen::VectorXd::Zero(free_dofs_);
  for (int c = 0; c < 3; ++c) {
    F[free_index_[static_cast<std::size_t>(node * 6 + c)]] = force[c];
    F[free_index_[static_cast<std::size_t>(node * 6 + 3 + c)]] = moment[c];
  }
  DeflectionField field;
  field.translation.assign(static_cast<std::size_t>(node_count_), Vec3::Zero());
  field.rotation.assign(static_cast<std::size_t>(node_count_), Vec3::Zero());
  if (F.norm() == 0.0) return field;

  Eigen::VectorXd delta = holder->solver.solve(F);
  double residual = (holder->K * delta - F).norm();
  if (residual > 1e-9 * F.norm())
    throw std::runtime_error("solver residual above tolerance");

  for (int v = 0; v < node_count_; ++v) {
    if (node_fixed_[static_cast<std::size_t>(v)]) continue;
    for (int c = 0; c < 3; ++c) {
      field.translation[static_cast<std::size_t>(v)][c] = delta[free_index_[static_cast<std::size_t>(v * 6 + c)]];
      field.rotation[static_cast<std::size_t>(v)][c] = delta[free_index_[static_cast<std::size_t>(v * 6 + 3 + c)]];
    }
  }
  return field;
}

DeflectionField FrameSystem::solve(const LoadCase& load) const {
  int node = node_of_joint(load.joint);
  if (node == -1) throw std::invalid_argument("load joint has no DOFs in the system");
  return solve_at_node(node, load.force, load.moment);
}

double exact_cost(const AssemblyState& state, int beam_idx, PrintDirection dir,
                  double nominal_force, const Material& material,
                  std::optional<SectionProperties> section_override) {
  FrameSystem system(state, material, FrameSystem::Candidate{beam_idx, dir}, section_override);
  DeflectionField field = system.solve_at_node(system.tip_node(), Vec3(0, 0, -nominal_force), Vec3::Zero());
  return field.translation[static_cast<std::size_t>(system.tip_node())].norm();
}

std::optional<std::vector<int>> cantilever_chain(const AssemblyState& state, int joint_idx) {
  StabilityAnalysis stability(state);
  std::vector<int> chain;
  int j = joint_idx;
  int came_from = -1;
  while (!stability.stable(j)) {
    int next_beam = -1;
    for (int bi : state.design->beams_at(j)) {
      if (!state.placed.test(bi) || bi == came_from) continue;
      if (next_beam != -1) return std::nullopt; // branching cantilever, not a simple path
      next_beam = bi;
    }
    if (next_beam == -1) return std::nullopt; // dangling joint with no support
    chain.push_back(next_beam);
    j = state.design->other_joint(next_beam, j);
    came_from = next_beam;
    if (chain.size() > static_cast<std::size_t>(state.design->beam_count())) return std::nullopt;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

namespace {

// Block-tridiagonal LDL elimination over 6x6 node blocks of a chain rooted at
// a fixed node 0; nodes 1..m are free.
struct ChainSolver {
  std::vector<Eigen::Matrix<double, 6, 6>> diag;
  std::vector<Eigen::Matrix<double, 6, 6>> upper; // coupling i -> i+1

  void resize(int free_nodes) {
    diag.assign(static_cast<std::size_t>(free_nodes), Eigen::Matrix<double, 6, 6>::Zero());
    upper.assign(static_cast<std::size_t>(free_nodes), Eigen::Matrix<double, 6, 6>::Zero());
  }

  // Tip load at the last node; returns its translation norm.
  double solve_tip(const Vec3& force) const {
    const int m = static_cast<int>(diag.size());
    std::vector<Eigen::Matrix<double, 6, 6>> dtil(static_cast<std::size_t>(m));
    dtil[0] = diag[0];
    for (int i = 1; i < m; ++i) {
      Eigen::Matrix<double, 6, 6> Linv = dtil[static_cast<std::size_t>(i - 1)]
                                             .ldlt()
                                             .solve(upper[static_cast<std::size_t>(i - 1)]);
      dtil[static_cast<std::size_t>(i)] =
          diag[static_cast<std::size_t>(i)] -
          upper[static_cast<std::size_t>(i - 1)].transpose() * Linv;
    }
    // Forward substitution: only the tip carries load, so y_i = 0 for i < m-1.
    Eigen::Matrix<double, 6, 1> f = Eigen::Matrix<double, 6, 1>::Zero();
    f.head<3>() = force;
    std::vector<Eigen::Matrix<double, 6, 1>> y(static_cast<std::size_t>(m),
                                               Eigen::Matrix<double, 6, 1>::Zero());
    y[static_cast<std::size_t>(m - 1)] = f;
    // Back substitution.
    std::vector<Eigen::Matrix<double, 6, 1>> x(static_cast<std::size_t>(m));
    x[static_cast<std::size_t>(m - 1)] =
        dtil[static_cast<std::size_t>(m - 1)].ldlt().solve(y[static_cast<std::size_t>(m - 1)]);
    for (int i = m - 2; i >= 0; --i) {
      Eigen::Matrix<double, 6, 1> rhs =
          y[static_cast<std::size_t>(i)] - upper[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i + 1)];
      x[static_cast<std::size_t>(i)] = dtil[static_cast<std::size_t>(i)].ldlt().solve(rhs);
    }
    return x[static_cast<std::size_t>(m - 1)].head<3>().norm();
  }
};

} // namespace

double heuristic_cost(const AssemblyState& state, const std::vector<int>& cantilever_path,
                      int beam_idx, PrintDirection dir, double nominal_force,
                      const Material& material,
                      std::optional<SectionProperties> section_override) {
  const FrameDesign& d = *state.design;
  const Beam& candidate = d.beam(beam_idx);
  const int cand_start = start_joint(candidate, dir);

  // Assemble the ordered point list root -> candidate tip, validating that the
  // path is simple and ends at the candidate's start joint.
  std::vector<Vec3> points;
  std::vector<SectionProperties> sections; // per segment
  int current = cand_start;
  if (!cantilever_path.empty()) {
    // Determine the root by walking the path from its far end.
    std::vector<int> joints(cantilever_path.size() + 1, -1);
    joints[cantilever_path.size()] = cand_start;
    for (std::size_t i = cantilever_path.size(); i-- > 0;) {
      joints[i] = d.other_joint(cantilever_path[i], joints[i + 1]);
    }
    current = joints[0];
    StabilityAnalysis stability(state);
    if (!stability.stable(current))
      throw std::invalid_argument("cantilever path is not rooted at a stable joint");
    std::set<int> seen_joints{current};
    points.push_back(d.joint(current).position);
    for (std::size_t i = 0; i < cantilever_path.size(); ++i) {
      const Beam& b = d.beam(cantilever_path[i]);
      if (!state.placed.test(cantilever_path[i]))
        throw std::invalid_argument("cantilever path beam is not placed");
      std::vector<Vec3> pts = b.path;
      if (b.q == joints[i]) std::reverse(pts.begin(), pts.end()); // orient root-outward
      if (!seen_joints.insert(joints[i + 1]).second)
        throw std::invalid_argument("cantilever path is not simple");
      SectionProperties sec = section_override ? *section_override : SectionProperties::circular(b.diameter);
      for (std::size_t s = 1; s < pts.size(); ++s) {
        points.push_back(pts[s]);
        sections.push_back(sec);
      }
    }
  } else {
    StabilityAnalysis stability(state);
    if (!stability.stable(cand_start))
      throw std::invalid_argument("empty cantilever path requires a stable start joint");
    points.push_back(d.joint(cand_start).position);
  }

  {
    std::vector<Vec3> pts = candidate.path;
    if (dir == PrintDirection::reverse) std::reverse(pts.begin(), pts.end());
    SectionProperties sec =
        section_override ? *section_override : SectionProperties::circular(candidate.diameter);
    for (std::size_t s = 1; s < pts.size(); ++s) {
      points.push_back(pts[s]);
      sections.push_back(sec);
    }
  }

  const int m = static_cast<int>(points.size()) - 1; // free nodes
  ChainSolver chain;
  chain.resize(m);
  for (int e = 0; e < m; ++e) {
    Mat12 k = element_stiffness(points[static_cast<std::size_t>(e)], points[static_cast<std::size_t>(e + 1)],
                                material, sections[static_cast<std::size_t>(e)]);
    // Free node ids are shifted by one (node 0 is the fixed root).
    int na = e - 1;
    int nb = e;
    if (na >= 0) chain.diag[static_cast<std::size_t>(na)] += k.block<6, 6>(0, 0);
    chain.diag[static_cast<std::size_t>(nb)] += k.block<6, 6>(6, 6);
    if (na >= 0) chain.upper[static_cast<std::size_t>(na)] += k.block<6, 6>(0, 6);
  }
  return chain.solve_tip(Vec3(0, 0, -nominal_force));
}

double step_cost(const AssemblyState& state, const StabilityAnalysis& stability, int beam_idx,
                 PrintDirection dir, CostMode mode, double nominal_force, const Material& material,
                 std::optional<SectionProperties> section_override) {
  const Beam& b = state.design->beam(beam_idx);
  const int start = start_joint(b, dir);
  const int end = end_joint(b, dir);
  const bool start_anchored =
      stability.stable(start) && (state.design->joint(start).grounded || state.joint_touched(start));
  const bool end_anchored =
      stability.stable(end) && (state.design->joint(end).grounded || state.joint_touched(end));
  if (start_anchored && end_anchored) return 0.0;

  if (mode == CostMode::exact)
    return exact_cost(state, beam_idx, dir, nominal_force, material, section_override);

  auto chain = cantilever_chain(state, start);
  if (!chain) return exact_cost(state, beam_idx, dir, nominal_force, material, section_override);
  return heuristic_cost(state, *chain, beam_idx, dir, nominal_force, material, section_override);
}

} // namespace wireplan
