#pragma once

#include "wireplan/constraints.hpp"
#include "wireplan/frame_model.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace wireplan {

struct Material {
  double elastic_modulus = 2600.0; // MPa
  double shear_modulus = 1100.0;   // MPa
};

struct SectionProperties {
  double area = 0;            // mm^2
  double bending_inertia = 0; // mm^4, both principal axes
  double torsion_constant = 0; // mm^4

  static SectionProperties circular(double diameter);
};

struct LoadCase {
  int joint = -1; // joint index carrying the load (or a system node id via FrameSystem)
  Vec3 force{0, 0, 0};  // N
  Vec3 moment{0, 0, 0}; // N mm
};

struct DeflectionField {
  // Indexed by system node; joints map to nodes via FrameSystem.
  std::vector<Vec3> translation; // mm
  std::vector<Vec3> rotation;    // rad
};

using Mat12 = Eigen::Matrix<double, 12, 12>;

// 3D Euler-Bernoulli frame element between two points, 6 DOF per end,
// assembled in local axes then rotated to global.
Mat12 element_stiffness(const Vec3& a, const Vec3& b, const Material& material,
                        const SectionProperties& section);

// Linear system over the free DOFs of the placed frame, with grounded joints
// fully fixed. An optional candidate beam attaches at its start joint only;
// its free tip gets DOFs of its own even when coincident with an existing
// joint.
class FrameSystem {
 public:
  struct Candidate {
    int beam = -1;
    PrintDirection dir = PrintDirection::forward;
  };

  FrameSystem(const AssemblyState& state, const Material& material,
              std::optional<Candidate> candidate = std::nullopt,
              std::optional<SectionProperties> section_override = std::nullopt);

  // Node carrying the candidate's free tip (-1 without a candidate).
  int tip_node() const { return tip_node_; }
  int node_of_joint(int joint_idx) const; // -1 when the joint is not in the system (grounded or untouched)
  int node_count() const { return node_count_; }

  DeflectionField solve(const LoadCase& load) const;
  DeflectionField solve_at_node(int node, const Vec3& force, const Vec3& moment) const;

 private:
  void add_element(const Vec3& a, const Vec3& b, int node_a, int node_b,
                   const Material& material, const SectionProperties& section);

  int node_count_ = 0;
  int tip_node_ = -1;
  std::vector<int> joint_node_;
  std::vector<char> node_fixed_;
  std::vector<Eigen::Triplet<double>> triplets_;
  mutable std::shared_ptr<void> factor_; // lazy SimplicialLDLT
  mutable std::vector<int> free_index_;
  int free_dofs_ = 0;
  void factorize() const;
};

// Euclidean norm of the free-tip translation when the candidate beam is
// attached at its start joint and loaded straight down at the tip.
double exact_cost(const AssemblyState& state, int beam_idx, PrintDirection dir,
                  double nominal_force, const Material& material,
                  std::optional<SectionProperties> section_override = std::nullopt);

// Placed beams forming the simple cantilever path from the nearest stable
// root to the given joint, ordered root-outward. Empty when the joint itself
// is stable; nullopt when the walk is ambiguous or fails.
std::optional<std::vector<int>> cantilever_chain(const AssemblyState& state, int joint_idx);

// Same load case as exact_cost but the model holds only the cantilever path
// plus the candidate with the root fully fixed; solved by blockwise
// elimination of the chain's block-tridiagonal stiffness.
double heuristic_cost(const AssemblyState& state, const std::vector<int>& cantilever_path,
                      int beam_idx, PrintDirection dir, double nominal_force,
                      const Material& material,
                      std::optional<SectionProperties> section_override = std::nullopt);

enum class CostMode { exact, heuristic };

// Planner cost policy: zero when both endpoints are stable existing joints
// (fusing between rigid anchors), otherwise the free-tip deflection under the
// nominal load in the requested mode.
double step_cost(const AssemblyState& state, const StabilityAnalysis& stability, int beam_idx,
                 PrintDirection dir, CostMode mode, double nominal_force, const Material& material,
                 std::optional<SectionProperties> section_override = std::nullopt);

} // namespace wireplan
