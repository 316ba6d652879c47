#pragma once

#include "wireplan/frame_model.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace wireplan {

enum class PrintDirection { forward, reverse }; // forward = p -> q along the stored path

inline const char* to_string(PrintDirection d) {
  return d == PrintDirection::forward ? "forward" : "reverse";
}

struct NozzleModel {
  double tip_radius = 0.055;     // mm, matches a 110 um nozzle
  double cone_half_angle = 20.0; // degrees from vertical
  double clearance = 0.1;        // mm added to intersection tests
};

struct DirectionMask {
  bool forward = false;
  bool reverse = false;
  bool allows(PrintDirection d) const { return d == PrintDirection::forward ? forward : reverse; }
  bool empty() const { return !forward && !reverse; }
};

struct ForcedStart {
  int beam = -1;
  int start_joint = -1; // single-direction beam must start here, so it succeeds a beam at this joint
};

struct PrecedenceSet {
  std::vector<DirectionMask> allowed; // per beam index
  std::vector<std::pair<int, int>> order_pairs; // (a, b) meaning a must precede b
  std::vector<std::vector<int>> preds; // per beam: collision predecessors
  std::vector<ForcedStart> forced_starts;

  bool allows(int beam, PrintDirection d) const { return allowed[static_cast<std::size_t>(beam)].allows(d); }
  // Beams on a directed cycle of order_pairs (empty when acyclic).
  std::vector<int> find_cycle() const;
};

// Union over path samples of an upward-opening truncated cone (apex radius
// tip_radius at the deposition point, half-angle cone_half_angle, extending to
// the machine ceiling). Distance queries are exact per sampled apex.
class SweptVolume {
 public:
  SweptVolume(const Beam& beam, const NozzleModel& nozzle, double step);
  SweptVolume(std::vector<Vec3> apexes, const NozzleModel& nozzle, double step);

  double distance(const Vec3& point) const; // to the cone solid, 0 inside
  bool contains(const Vec3& point) const { return distance(point) <= 0; }
  double sample_step() const { return step_; }

 private:
  std::vector<Vec3> apexes_;
  double tip_radius_;
  double tan_half_angle_;
  double step_;
};

double collision_sample_step(const Beam& beam); // min(0.1, shortest segment / 4)
std::vector<Vec3> sample_path(const std::vector<Vec3>& path, double step);

bool direction_feasible(const Beam& beam, PrintDirection dir, const NozzleModel& nozzle);

// Fusing happens deliberately at shared joints, so the intersection test
// ignores material within this radius of a joint common to both beams.
constexpr double kSharedJointExclusion = 1.0; // mm

// True when beam B's thickened path enters beam A's swept volume, i.e. A must
// precede B. Conservative: threshold inflated by the sampling step. Shared
// joints are passed as exclusion points.
bool collision_pair(const Beam& a, const Beam& b, const NozzleModel& nozzle,
                    const std::vector<Vec3>& shared_joints = {});

struct ConstraintResult {
  PrecedenceSet prec;
  std::vector<Defect> defects; // empty-direction beams, mutual pairs, precedence cycles
  bool ok() const { return defects.empty(); }
};

ConstraintResult derive_constraints(const FrameDesign& design, const NozzleModel& nozzle);

bool connection_feasible(const AssemblyState& state, int beam_idx, PrintDirection dir);
bool cantilever_feasible(const AssemblyState& state, int beam_idx, PrintDirection dir);

struct Action {
  int beam = -1;
  PrintDirection dir = PrintDirection::forward;
};

// All (beam, dir) playable now: unplaced, direction allowed, collision
// predecessors placed, connection and cantilever feasible. Ordered by
// (beam id, direction) for determinism.
std::vector<Action> feasible_actions(const AssemblyState& state, const PrecedenceSet& prec);

// Start/end joints of a beam under a print direction.
inline int start_joint(const Beam& b, PrintDirection d) { return d == PrintDirection::forward ? b.p : b.q; }
inline int end_joint(const Beam& b, PrintDirection d) { return d == PrintDirection::forward ? b.q : b.p; }

} // namespace wireplan
