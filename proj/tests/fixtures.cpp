#include "fixtures.hpp"

#include "wireplan/constraints.hpp"

#include <cmath>
#include <random>

namespace wireplan::fixtures {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

FrameDesign tripod() {
  FrameDesign d;
  // Legs rise steeply from the base (reverse printing is impossible) then
  // shallow out toward the apex so the legs stay clear of each other's cones.
  int apex = -1;
  std::vector<int> bases;
  for (int k = 0; k < 3; ++k) {
    double phi = 2.0 * kPi * k / 3.0;
    Joint j;
    j.id = "g" + std::to_string(k + 1);
    j.position = Vec3(6 * std::cos(phi), 6 * std::sin(phi), 0);
    j.grounded = true;
    bases.push_back(d.add_joint(j));
  }
  apex = d.add_joint({"apex", Vec3(0, 0, 7), false});
  for (int k = 0; k < 3; ++k) {
    double phi = 2.0 * kPi * k / 3.0;
    Beam b;
    b.id = "leg" + std::to_string(k + 1);
    b.p = bases[static_cast<std::size_t>(k)];
    b.q = apex;
    b.path = {Vec3(6 * std::cos(phi), 6 * std::sin(phi), 0),
              Vec3(5.5 * std::cos(phi), 5.5 * std::sin(phi), 3), Vec3(0, 0, 7)};
    b.diameter = 0.2;
    d.add_beam(b);
  }
  return d;
}

FrameDesign chain3() {
  FrameDesign d;
  int g0 = d.add_joint({"g0", Vec3(0, 0, 0), true});
  int j1 = d.add_joint({"j1", Vec3(4, 0, 3), false});
  int j2 = d.add_joint({"j2", Vec3(8, 0, 6), false});
  int j3 = d.add_joint({"j3", Vec3(12, 0, 9), false});
  d.add_beam({"b1", g0, j1, {}, 0.2});
  d.add_beam({"b2", j1, j2, {}, 0.2});
  d.add_beam({"b3", j2, j3, {}, 0.2});
  return d;
}

FrameDesign loop() {
  FrameDesign d;
  int g1 = d.add_joint({"g1", Vec3(0, 0, 0), true});
  int g2 = d.add_joint({"g2", Vec3(16, 0, 0), true});
  int apex = d.add_joint({"apex", Vec3(8, 0, 6), false});
  d.add_beam({"b1", g1, apex, {}, 0.2});
  d.add_beam({"b2", g2, apex, {}, 0.2});
  return d;
}

FrameDesign vbeam() {
  FrameDesign d;
  int g = d.add_joint({"g", Vec3(0, 0, 0), true});
  int j0 = d.add_joint({"j0", Vec3(0, 0, 5), false});
  int j1 = d.add_joint({"j1", Vec3(7.6, 0, 5), false});
  d.add_beam({"post", g, j0, {}, 0.2});
  Beam v;
  v.id = "v";
  v.p = j0;
  v.q = j1;
  // Descends at 80 degrees, then ascends at 30.
  v.path = {Vec3(0, 0, 5), Vec3(0.7, 0, 1.03), Vec3(7.6, 0, 5)};
  v.diameter = 0.2;
  d.add_beam(v);
  return d;
}

FrameDesign helix_post() {
  FrameDesign d;
  int gh = d.add_joint({"gh", Vec3(2.5, 0, 0), true});
  int ht = d.add_joint({"ht", Vec3(2.5, 0, 10), false});
  int gp = d.add_joint({"gp", Vec3(14, 0, 0), true});
  int pt = d.add_joint({"pt", Vec3(14, 0, 10), false});

  Beam helix;
  helix.id = "helix";
  helix.p = gh;
  helix.q = ht;
  const int turns = 4;
  const int segs_per_turn = 12;
  const double radius = 2.5;
  const double height = 10.0;
  for (int s = 0; s <= turns * segs_per_turn; ++s) {
    double t = static_cast<double>(s) / (turns * segs_per_turn);
    double ang = 2.0 * kPi * turns * t;
    helix.path.push_back(Vec3(radius * std::cos(ang), radius * std::sin(ang), height * t));
  }
  helix.diameter = 0.15;
  d.add_beam(helix);

  d.add_beam({"post", gp, pt, {}, 0.6});
  d.add_beam({"bridge", ht, pt, {}, 0.2});
  return d;
}

FrameDesign double_leaf() {
  FrameDesign d;
  int g = d.add_joint({"g", Vec3(0, 0, 0), true});
  int top = d.add_joint({"top", Vec3(0.5, 0, 4), false});
  int l1 = d.add_joint({"l1", Vec3(3.5, 0, 6), false});
  int l2 = d.add_joint({"l2", Vec3(-2.5, 0, 6), false});
  d.add_beam({"stem", g, top, {}, 0.2});
  d.add_beam({"leaf1", top, l1, {}, 0.2});
  d.add_beam({"leaf2", top, l2, {}, 0.2});
  return d;
}

FrameDesign lattice(int nx, int ny, int layers, double pitch, double layer_height) {
  FrameDesign d;
  auto jid = [](int i, int j, int l) {
    return "j" + std::to_string(i) + "_" + std::to_string(j) + "_" + std::to_string(l);
  };
  for (int l = 0; l <= layers; ++l)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        d.add_joint({jid(i, j, l), Vec3(i * pitch, j * pitch, l * layer_height), l == 0});

  int bcount = 0;
  auto bid = [&]() { return "b" + std::to_string(bcount++); };
  for (int l = 1; l <= layers; ++l) {
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        d.add_beam({bid(), d.joint_index(jid(i, j, l - 1)), d.joint_index(jid(i, j, l)), {}, 0.3});
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i + 1 < nx; ++i)
        d.add_beam({bid(), d.joint_index(jid(i, j, l)), d.joint_index(jid(i + 1, j, l)), {}, 0.3});
    for (int j = 0; j + 1 < ny; ++j)
      for (int i = 0; i < nx; ++i)
        d.add_beam({bid(), d.joint_index(jid(i, j, l)), d.joint_index(jid(i, j + 1, l)), {}, 0.3});
  }
  return d;
}

FrameDesign random_constructable(std::uint64_t seed, int beams) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };

  FrameDesign d;
  NozzleModel nozzle;
  AssemblyState state(d);

  auto rebuild_state = [&]() {
    AssemblyState s(d);
    for (int bi = 0; bi < d.beam_count(); ++bi) s.place(bi);
    return s;
  };

  int joint_count = 0;
  int beam_count = 0;
  auto new_joint = [&](const Vec3& pos, bool grounded) {
    Joint j;
    j.id = "j" + std::to_string(joint_count++);
    j.position = pos;
    j.grounded = grounded;
    return d.add_joint(j);
  };

  // The generation order doubles as a feasibility witness: every added beam is
  // checked against connection, cantilever, direction and must not sweep into
  // already-added beams.
  auto clear_of_structure = [&](const Beam& candidate) {
    for (int bi = 0; bi < d.beam_count(); ++bi) {
      const Beam& other = d.beam(bi);
      std::vector<Vec3> shared;
      for (int ja : {candidate.p, candidate.q})
        for (int jb : {other.p, other.q})
          if (ja == jb) shared.push_back(d.joint(ja).position);
      if (collision_pair(candidate, other, nozzle, shared)) return false; // candidate must precede placed beam
    }
    for (int ji = 0; ji < d.joint_count(); ++ji) {
      if (ji == candidate.p || ji == candidate.q) continue;
      for (const auto& pt : candidate.path)
        if ((pt - d.joint(ji).position).norm() < 1.2) return false;
    }
    return true;
  };

  auto try_add = [&](int from, const Vec3& to_pos, int to_joint, double diameter) -> bool {
    Vec3 target = to_joint == -1 ? to_pos : d.joint(to_joint).position;
    Vec3 delta = target - d.joint(from).position;
    double run = std::hypot(delta.x(), delta.y());
    // Reject steep or degenerate runs outright; keeps both directions printable.
    if (run < 1.5) return false;
    if (std::abs(delta.z()) / run > std::tan(55.0 * kPi / 180.0)) return false;
    if (delta.norm() < 2.0 || delta.norm() > 14.0) return false;
    if (to_joint == -1)
      for (int ji = 0; ji < d.joint_count(); ++ji)
        if ((to_pos - d.joint(ji).position).norm() < 2.2) return false;

    Beam b;
    b.id = "b" + std::to_string(beam_count);
    b.p = from;
    b.q = to_joint; // -1 while probing a fresh endpoint
    b.path = {d.joint(from).position, target};
    b.diameter = diameter;
    if (!direction_feasible(b, PrintDirection::forward, nozzle)) return false;
    if (!clear_of_structure(b)) return false;

    AssemblyState s = rebuild_state();
    if (!d.joint(from).grounded && !s.joint_touched(from)) return false;
    if (joint_supports_pivoting_cantilever(s, from)) return false;
    if (to_joint != -1 && s.joint_touched(to_joint) &&
        joint_supports_pivoting_cantilever(s, to_joint))
      return false;

    b.q = to_joint == -1 ? new_joint(to_pos, to_pos.z() <= 1e-9) : to_joint;
    d.add_beam(b);
    ++beam_count;
    return true;
  };

  // Seed stubs from the substrate.
  int grounded_stubs = 2 + pick(3);
  for (int k = 0; k < grounded_stubs && beam_count < beams; ++k) {
    double gx = uniform(-20, 20);
    double gy = uniform(-20, 20);
    int g = new_joint(Vec3(gx, gy, 0), true);
    try_add(g, Vec3(gx + uniform(-5, 5), gy + uniform(-5, 5), uniform(2, 5)), -1, 0.25);
  }

  int guard = 0;
  while (beam_count < beams && guard++ < beams * 60) {
    AssemblyState s = rebuild_state();
    StabilityAnalysis stability(s);
    int action = pick(10);
    if (action < 2) {
      // New grounded stub.
      double gx = uniform(-24, 24);
      double gy = uniform(-24, 24);
      int g = new_joint(Vec3(gx, gy, 0), true);
      try_add(g, Vec3(gx + uniform(-5, 5), gy + uniform(-5, 5), uniform(2, 5)), -1, 0.25);
    } else if (action < 7) {
      // Extend at a joint without pivoting cantilevers.
      int j = pick(d.joint_count());
      if (!s.joint_touched(j) && !d.joint(j).grounded) continue;
      if (joint_supports_pivoting_cantilever(s, j)) continue;
      Vec3 base = d.joint(j).position;
      Vec3 to = base + Vec3(uniform(-6, 6), uniform(-6, 6), uniform(-2.5, 3.5));
      to.z() = std::max(0.0, to.z());
      if (to.z() < 1.0) to.z() = 0.0;
      try_add(j, to, -1, 0.25);
    } else {
      // Close between two stable structure joints.
      std::vector<int> stable;
      for (int j = 0; j < d.joint_count(); ++j)
        if (stability.stable(j) && (s.joint_touched(j) || d.joint(j).grounded) &&
            !joint_supports_pivoting_cantilever(s, j))
          stable.push_back(j);
      if (stable.size() < 2) continue;
      int a = stable[static_cast<std::size_t>(pick(static_cast<int>(stable.size())))];
      int b = stable[static_cast<std::size_t>(pick(static_cast<int>(stable.size())))];
      if (a == b) continue;
      bool duplicate = false;
      for (int bi = 0; bi < d.beam_count(); ++bi) {
        const Beam& e = d.beam(bi);
        if ((e.p == a && e.q == b) || (e.p == b && e.q == a)) { duplicate = true; break; }
      }
      if (duplicate) continue;
      try_add(a, Vec3(0, 0, 0), b, 0.25);
    }
  }
  return d;
}

} // namespace wireplan::fixtures
