#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

namespace wireplan {

using Vec3 = Eigen::Vector3d;

constexpr double kCoincidenceTol = 1e-6;   // mm, joint/path coincidence
constexpr double kMinSegmentLength = 0.05; // mm, default shortest path segment

struct Joint {
  std::string id;
  Vec3 position{0, 0, 0};
  bool grounded = false;
};

struct Beam {
  std::string id;
  int p = -1; // joint index of the stored path start
  int q = -1; // joint index of the stored path end
  std::vector<Vec3> path; // polyline from position(p) to position(q)
  double diameter = 0.15; // mm

  double length() const {
    double len = 0;
    for (std::size_t i = 1; i < path.size(); ++i) len += (path[i] - path[i - 1]).norm();
    return len;
  }
  double max_z() const {
    double z = path.empty() ? 0 : path.front().z();
    for (const auto& pt : path) z = std::max(z, pt.z());
    return z;
  }
};

struct Defect {
  std::string kind;    // no-ground, endpoint-mismatch, short-segment, bad-diameter, ...
  std::string subject; // offending joint or beam id
  std::string detail;
};

class FrameDesign {
 public:
  double substrate_z = 0.0;

  int add_joint(Joint j);
  int add_beam(Beam b); // path defaulted to straight segment when empty

  const std::vector<Joint>& joints() const { return joints_; }
  const std::vector<Beam>& beams() const { return beams_; }
  const Joint& joint(int idx) const { return joints_.at(static_cast<std::size_t>(idx)); }
  const Beam& beam(int idx) const { return beams_.at(static_cast<std::size_t>(idx)); }
  int joint_count() const { return static_cast<int>(joints_.size()); }
  int beam_count() const { return static_cast<int>(beams_.size()); }

  int joint_index(const std::string& id) const; // -1 when unknown
  int beam_index(const std::string& id) const;

  // Beam endpoint opposite to the given joint.
  int other_joint(int beam_idx, int joint_idx) const;

  const std::vector<int>& beams_at(int joint_idx) const { return incident_.at(static_cast<std::size_t>(joint_idx)); }

  std::vector<int> grounded_joints() const;

 private:
  std::vector<Joint> joints_;
  std::vector<Beam> beams_;
  std::vector<std::vector<int>> incident_;
  std::unordered_map<std::string, int> joint_by_id_;
  std::unordered_map<std::string, int> beam_by_id_;
};

// Dense bitset over beam indices; doubles as the memoization key in the oracle.
class BeamSet {
 public:
  BeamSet() = default;
  explicit BeamSet(int n) : n_(n), words_((n + 63) / 64, 0) {}

  int size() const { return n_; }
  bool test(int i) const { return (words_[static_cast<std::size_t>(i >> 6)] >> (i & 63)) & 1u; }
  void set(int i) { words_[static_cast<std::size_t>(i >> 6)] |= (std::uint64_t{1} << (i & 63)); }
  void reset(int i) { words_[static_cast<std::size_t>(i >> 6)] &= ~(std::uint64_t{1} << (i & 63)); }
  int count() const;
  bool operator==(const BeamSet& o) const { return n_ == o.n_ && words_ == o.words_; }
  std::size_t hash() const;

 private:
  int n_ = 0;
  std::vector<std::uint64_t> words_;
};

struct BeamSetHash {
  std::size_t operator()(const BeamSet& s) const { return s.hash(); }
};

struct AssemblyState {
  const FrameDesign* design = nullptr;
  BeamSet placed;

  explicit AssemblyState(const FrameDesign& d) : design(&d), placed(d.beam_count()) {}
  bool is_placed(int beam_idx) const { return placed.test(beam_idx); }
  void place(int beam_idx) { placed.set(beam_idx); }
  void unplace(int beam_idx) { placed.reset(beam_idx); }
  int placed_count() const { return placed.count(); }
  bool full() const { return placed.count() == design->beam_count(); }

  // Joint has at least one placed incident beam.
  bool joint_touched(int joint_idx) const;
};

std::vector<Defect> validate_design(const FrameDesign& design,
                                    double min_segment_length = kMinSegmentLength);

// Per-state stability: a joint is stable when grounded or when two
// vertex-disjoint paths reach the virtual ground vertex (Menger via
// biconnected components of the placed multigraph).
class StabilityAnalysis {
 public:
  StabilityAnalysis(const AssemblyState& state);

  bool stable(int joint_idx) const { return stable_[static_cast<std::size_t>(joint_idx)]; }
  bool reaches_ground(int joint_idx) const { return reach_[static_cast<std::size_t>(joint_idx)]; }

 private:
  std::vector<char> stable_;
  std::vector<char> reach_;
};

bool is_stable_joint(const AssemblyState& state, int joint_idx);

// True when deleting `joint_idx` disconnects the beam's other endpoint from
// ground, i.e. the beam hangs from this joint and would rotate if it melted.
bool pivots_about(const AssemblyState& state, int beam_idx, int joint_idx);

bool is_cantilevered_beam(const AssemblyState& state, int beam_idx);

// True when some placed beam incident to the joint pivots about it; such a
// joint cannot accept new attachments.
bool joint_supports_pivoting_cantilever(const AssemblyState& state, int joint_idx);

// Partition of placed beams into connected components (classes keyed by
// smallest beam index, deterministic order).
std::vector<std::vector<int>> connected_components(const AssemblyState& state);

} // namespace wireplan
