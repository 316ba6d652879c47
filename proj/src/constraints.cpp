#include "wireplan/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace wireplan {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Distance from a point to the solid {z >= apex.z, rho <= r0 + k*(z-apex.z)}.
// The solid is a body of revolution of a convex meridian region containing the
// axis, so the 3D distance equals the 2D meridian distance.
double point_to_upcone(const Vec3& p, const Vec3& apex, double r0, double k) {
  const double dz = p.z() - apex.z();
  const double rho = std::hypot(p.x() - apex.x(), p.y() - apex.y());
  if (dz >= 0 && rho <= r0 + k * dz) return 0.0;
  // Bottom disk z = 0, rho <= r0.
  double best = std::numeric_limits<double>::infinity();
  if (rho <= r0) best = std::min(best, -dz); // dz < 0 here, point below the disk
  // Corner (r0, 0).
  best = std::min(best, std::hypot(rho - r0, dz));
  // Slant ray from (r0, 0) along (k, 1)/sqrt(1+k^2).
  const double inv = 1.0 / std::sqrt(1.0 + k * k);
  const double t = ((rho - r0) * k + dz) * inv;
  if (t > 0) {
    const double qr = r0 + t * k * inv;
    const double qz = t * inv;
    best = std::min(best, std::hypot(rho - qr, dz - qz));
  }
  return best;
}

} // namespace

double collision_sample_step(const Beam& beam) {
  double shortest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < beam.path.size(); ++i)
    shortest = std::min(shortest, (beam.path[i] - beam.path[i - 1]).norm());
  return std::min(0.1, shortest / 4.0);
}

std::vector<Vec3> sample_path(const std::vector<Vec3>& path, double step) {
  std::vector<Vec3> out;
  if (path.empty()) return out;
  out.push_back(path.front());
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Vec3& a = path[i - 1];
    const Vec3& b = path[i];
    const double len = (b - a).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int s = 1; s <= n; ++s) out.push_back(a + (b - a) * (static_cast<double>(s) / n));
  }
  return out;
}

SweptVolume::SweptVolume(const Beam& beam, const NozzleModel& nozzle, double step)
    : tip_radius_(nozzle.tip_radius),
      tan_half_angle_(std::tan(nozzle.cone_half_angle * kPi / 180.0)),
      step_(step) {
  apexes_ = sample_path(beam.path, step);
}

SweptVolume::SweptVolume(std::vector<Vec3> apexes, const NozzleModel& nozzle, double step)
    : apexes_(std::move(apexes)),
      tip_radius_(nozzle.tip_radius),
      tan_half_angle_(std::tan(nozzle.cone_half_angle * kPi / 180.0)),
      step_(step) {}

double SweptVolume::distance(const Vec3& point) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& a : apexes_) {
    best = std::min(best, point_to_upcone(point, a, tip_radius_, tan_half_angle_));
    if (best <= 0) return 0.0;
  }
  return best;
}

bool direction_feasible(const Beam& beam, PrintDirection dir, const NozzleModel& nozzle) {
  std::vector<Vec3> pts = beam.path;
  if (dir == PrintDirection::reverse) std::reverse(pts.begin(), pts.end());

  // Fast pre-filter: a traversal that never descends cannot sweep over its own
  // deposit.
  bool descends = false;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].z() < pts[i - 1].z() - 1e-12) { descends = true; break; }
  if (!descends) return true;

  // Self-sweep with the cone apex treated as a point: the freshly deposited
  // material adjacent to the tip is molten, so only the interior of the
  // opening cone counts. For straight segments this reduces exactly to the
  // 90 - half_angle descent threshold.
  const double k = std::tan(nozzle.cone_half_angle * kPi / 180.0);
  const double step = collision_sample_step(beam);
  std::vector<Vec3> samples = sample_path(pts, step);
  for (std::size_t j = 1; j < samples.size(); ++j) {
    const Vec3& tip = samples[j];
    for (std::size_t i = 0; i < j; ++i) {
      const double dz = samples[i].z() - tip.z();
      if (dz <= 1e-12) continue;
      const double rho = std::hypot(samples[i].x() - tip.x(), samples[i].y() - tip.y());
      if (rho < k * dz - 1e-12) return false;
    }
  }
  return true;
}

bool collision_pair(const Beam& a, const Beam& b, const NozzleModel& nozzle,
                    const std::vector<Vec3>& shared_joints) {
  const double step = std::min(collision_sample_step(a), collision_sample_step(b));
  const double threshold = b.diameter / 2.0 + nozzle.clearance + step;
  const double k = std::tan(nozzle.cone_half_angle * kPi / 180.0);

  // Bounding reject: highest point of B against the widest possible cone
  // radius from A's lowest apex.
  double a_minz = std::numeric_limits<double>::infinity();
  double b_maxz = -std::numeric_limits<double>::infinity();
  for (const auto& p : a.path) a_minz = std::min(a_minz, p.z());
  for (const auto& p : b.path) b_maxz = std::max(b_maxz, p.z());
  if (b_maxz < a_minz - threshold) return false;

  double min_xy = std::numeric_limits<double>::infinity();
  for (const auto& pa : a.path)
    for (const auto& pb : b.path)
      min_xy = std::min(min_xy, std::hypot(pa.x() - pb.x(), pa.y() - pb.y()));
  const double reach = nozzle.tip_radius + k * std::max(0.0, b_maxz - a_minz) + threshold +
                       a.length() + b.length();
  if (min_xy > reach) return false;

  auto near_shared = [&](const Vec3& p) {
    for (const auto& j : shared_joints)
      if ((p - j).norm() <= kSharedJointExclusion) return true;
    return false;
  };

  std::vector<Vec3> apexes;
  for (const auto& pa : sample_path(a.path, step))
    if (!near_shared(pa)) apexes.push_back(pa);
  if (apexes.empty()) return false;
  SweptVolume sweep(std::move(apexes), nozzle, step);
  for (const auto& pb : sample_path(b.path, step)) {
    if (near_shared(pb)) continue;
    if (sweep.distance(pb) <= threshold) return true;
  }
  return false;
}

std::vector<int> PrecedenceSet::find_cycle() const {
  const int n = static_cast<int>(allowed.size());
  std::vector<std::vector<int>> succ(static_cast<std::size_t>(n));
  std::vector<int> indeg(static_cast<std::size_t>(n), 0);
  for (auto [a, b] : order_pairs) {
    succ[static_cast<std::size_t>(a)].push_back(b);
    ++indeg[static_cast<std::size_t>(b)];
  }
  std::deque<int> queue;
  for (int i = 0; i < n; ++i)
    if (indeg[static_cast<std::size_t>(i)] == 0) queue.push_back(i);
  int seen = 0;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    ++seen;
    for (int w : succ[static_cast<std::size_t>(v)])
      if (--indeg[static_cast<std::size_t>(w)] == 0) queue.push_back(w);
  }
  std::vector<int> cyclic;
  if (seen == n) return cyclic;
  for (int i = 0; i < n; ++i)
    if (indeg[static_cast<std::size_t>(i)] > 0) cyclic.push_back(i);
  return cyclic;
}

ConstraintResult derive_constraints(const FrameDesign& design, const NozzleModel& nozzle) {
  ConstraintResult result;
  const int n = design.beam_count();
  result.prec.allowed.resize(static_cast<std::size_t>(n));
  result.prec.preds.resize(static_cast<std::size_t>(n));

  for (int bi = 0; bi < n; ++bi) {
    const Beam& b = design.beam(bi);
    DirectionMask mask;
    mask.forward = direction_feasible(b, PrintDirection::forward, nozzle);
    mask.reverse = direction_feasible(b, PrintDirection::reverse, nozzle);
    result.prec.allowed[static_cast<std::size_t>(bi)] = mask;
    if (mask.empty())
      result.defects.push_back({"unprintable-beam", b.id, "no feasible print direction"});
    else if (!mask.forward || !mask.reverse) {
      int start = mask.forward ? b.p : b.q;
      if (!design.joint(start).grounded)
        result.prec.forced_starts.push_back({bi, start});
    }
  }

  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const Beam& ba = design.beam(a);
      const Beam& bb = design.beam(b);
      std::vector<Vec3> shared;
      for (int ja : {ba.p, ba.q})
        for (int jb : {bb.p, bb.q})
          if (ja == jb) shared.push_back(design.joint(ja).position);
      if (collision_pair(ba, bb, nozzle, shared))
        result.prec.order_pairs.push_back({a, b});
    }
  }
  std::set<std::pair<int, int>> pairs(result.prec.order_pairs.begin(), result.prec.order_pairs.end());
  for (auto [a, b] : pairs) {
    if (a < b && pairs.count({b, a}))
      result.defects.push_back({"mutual-precedence", design.beam(a).id,
                                "beams " + design.beam(a).id + " and " + design.beam(b).id +
                                    " must each precede the other"});
  }
  for (auto [a, b] : result.prec.order_pairs)
    result.prec.preds[static_cast<std::size_t>(b)].push_back(a);
  for (auto& p : result.prec.preds) {
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
  }

  if (result.defects.empty()) {
    auto cyclic = result.prec.find_cycle();
    if (!cyclic.empty()) {
      std::string names;
      for (int bi : cyclic) names += (names.empty() ? "" : ", ") + design.beam(bi).id;
      result.defects.push_back({"precedence-cycle", design.beam(cyclic.front()).id,
                                "collision precedence cycle through: " + names});
    }
  }
  return result;
}

bool connection_feasible(const AssemblyState& state, int beam_idx, PrintDirection dir) {
  const Beam& b = state.design->beam(beam_idx);
  const int start = start_joint(b, dir);
  return state.design->joint(start).grounded || state.joint_touched(start);
}

bool cantilever_feasible(const AssemblyState& state, int beam_idx, PrintDirection dir) {
  const Beam& b = state.design->beam(beam_idx);
  const int start = start_joint(b, dir);
  const int end = end_joint(b, dir);
  // Both the start joint and, when it lands on existing structure, the end
  // joint must be free of pivoting cantilevers.
  if (state.joint_touched(start) && joint_supports_pivoting_cantilever(state, start)) return false;
  if (state.joint_touched(end) && joint_supports_pivoting_cantilever(state, end)) return false;
  return true;
}

std::vector<Action> feasible_actions(const AssemblyState& state, const PrecedenceSet& prec) {
  const FrameDesign& d = *state.design;
  std::vector<int> order(static_cast<std::size_t>(d.beam_count()));
  for (int i = 0; i < d.beam_count(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return d.beam(a).id < d.beam(b).id; });

  std::vector<Action> out;
  for (int bi : order) {
    if (state.placed.test(bi)) continue;
    bool preds_ok = true;
    for (int p : prec.preds[static_cast<std::size_t>(bi)])
      if (!state.placed.test(p)) { preds_ok = false; break; }
    if (!preds_ok) continue;
    for (PrintDirection dir : {PrintDirection::forward, PrintDirection::reverse}) {
      if (!prec.allows(bi, dir)) continue;
      if (!connection_feasible(state, bi, dir)) continue;
      if (!cantilever_feasible(state, bi, dir)) continue;
      out.push_back({bi, dir});
    }
  }
  return out;
}

} // namespace wireplan
