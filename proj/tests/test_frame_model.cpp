#include "fixtures.hpp"
#include "wireplan/frame_model.hpp"

#include <doctest.h>

#include <random>

using namespace wireplan;

namespace {

AssemblyState full_state(const FrameDesign& d) {
  AssemblyState s(d);
  for (int i = 0; i < d.beam_count(); ++i) s.place(i);
  return s;
}

} // namespace

TEST_CASE("validate_design accepts the tripod fixture") {
  auto d = fixtures::tripod();
  CHECK(validate_design(d).empty());
}

TEST_CASE("validate_design flags endpoint mismatch") {
  FrameDesign d;
  int g = d.add_joint({"g", Vec3(0, 0, 0), true});
  int j = d.add_joint({"j", Vec3(5, 0, 3), false});
  Beam b;
  b.id = "b";
  b.p = g;
  b.q = j;
  b.path = {Vec3(0.01, 0, 0), Vec3(5, 0, 3)};
  d.add_beam(b);
  auto defects = validate_design(d);
  REQUIRE(defects.size() == 1);
  CHECK(defects[0].kind == "endpoint-mismatch");
  CHECK(defects[0].subject == "b");
}

TEST_CASE("validate_design flags missing ground") {
  FrameDesign d;
  d.add_joint({"a", Vec3(0, 0, 1), false});
  d.add_joint({"b", Vec3(5, 0, 3), false});
  d.add_beam({"b0", 0, 1, {}, 0.2});
  auto defects = validate_design(d);
  REQUIRE(defects.size() == 1);
  CHECK(defects[0].kind == "no-ground");
}

TEST_CASE("stability on chain and loop fixtures") {
  auto chain = fixtures::chain3();
  auto s = full_state(chain);
  CHECK(is_stable_joint(s, chain.joint_index("g0"))); // grounded
  CHECK_FALSE(is_stable_joint(s, chain.joint_index("j1")));
  CHECK_FALSE(is_stable_joint(s, chain.joint_index("j3"))); // tip: single path to ground

  auto loop = fixtures::loop();
  auto sl = full_state(loop);
  CHECK(is_stable_joint(sl, loop.joint_index("apex"))); // two vertex-disjoint paths

  // Partial loop: only one side placed, apex unstable.
  AssemblyState half(loop);
  half.place(loop.beam_index("b1"));
  CHECK_FALSE(is_stable_joint(half, loop.joint_index("apex")));
}

TEST_CASE("pivots_about matches the hand-worked cases") {
  auto chain = fixtures::chain3();
  auto s = full_state(chain);
  int b1 = chain.beam_index("b1");
  CHECK(pivots_about(s, b1, chain.joint_index("g0"))); // whole chain hangs from ground
  CHECK_FALSE(pivots_about(s, b1, chain.joint_index("j1")));

  auto loop = fixtures::loop();
  auto sl = full_state(loop);
  CHECK_FALSE(pivots_about(sl, loop.beam_index("b1"), loop.joint_index("apex")));
  CHECK_FALSE(pivots_about(sl, loop.beam_index("b2"), loop.joint_index("apex")));

  CHECK_THROWS(pivots_about(sl, loop.beam_index("b1"), loop.joint_index("g2")));
}

TEST_CASE("is_cantilevered_beam on the fixtures") {
  auto chain = fixtures::chain3();
  auto s = full_state(chain);
  for (int bi = 0; bi < chain.beam_count(); ++bi) CHECK(is_cantilevered_beam(s, bi));

  auto loop = fixtures::loop();
  auto sl = full_state(loop);
  CHECK_FALSE(is_cantilevered_beam(sl, loop.beam_index("b1")));
  CHECK_FALSE(is_cantilevered_beam(sl, loop.beam_index("b2")));

  FrameDesign d;
  int g1 = d.add_joint({"g1", Vec3(0, 0, 0), true});
  int g2 = d.add_joint({"g2", Vec3(6, 0, 0), true});
  Beam b;
  b.id = "b";
  b.p = g1;
  b.q = g2;
  b.path = {Vec3(0, 0, 0), Vec3(3, 0, 2), Vec3(6, 0, 0)};
  d.add_beam(b);
  auto sg = full_state(d);
  CHECK_FALSE(is_cantilevered_beam(sg, 0)); // grounded endpoints are stable
}

TEST_CASE("connected_components partitions placed beams") {
  auto chain = fixtures::chain3();
  AssemblyState empty(chain);
  CHECK(connected_components(empty).empty());

  auto tripod = fixtures::tripod();
  auto st = full_state(tripod);
  auto comps = connected_components(st);
  REQUIRE(comps.size() == 1);
  CHECK(comps[0].size() == 3);

  // Two disjoint chains.
  FrameDesign d;
  int a0 = d.add_joint({"a0", Vec3(0, 0, 0), true});
  int a1 = d.add_joint({"a1", Vec3(4, 0, 2), false});
  int b0 = d.add_joint({"b0", Vec3(20, 0, 0), true});
  int b1 = d.add_joint({"b1", Vec3(24, 0, 2), false});
  d.add_beam({"A", a0, a1, {}, 0.2});
  d.add_beam({"B", b0, b1, {}, 0.2});
  auto sd = full_state(d);
  CHECK(connected_components(sd).size() == 2);
}

TEST_CASE("pivoting implies cantilevered and stability is monotone") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 12; ++trial) {
    auto d = fixtures::random_constructable(1000 + trial, 18);
    if (d.beam_count() < 4) continue;
    AssemblyState s(d);
    std::vector<int> order(static_cast<std::size_t>(d.beam_count()));
    for (int i = 0; i < d.beam_count(); ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    // Random subset of beams.
    for (int i = 0; i < d.beam_count() / 2; ++i) s.place(order[static_cast<std::size_t>(i)]);

    for (int bi = 0; bi < d.beam_count(); ++bi) {
      if (!s.placed.test(bi)) continue;
      const Beam& b = d.beam(bi);
      for (int j : {b.p, b.q})
        if (pivots_about(s, bi, j)) CHECK(is_cantilevered_beam(s, bi));
    }

    // Monotonicity: placing one more beam never destabilizes a joint.
    StabilityAnalysis before(s);
    int extra = -1;
    for (int i = d.beam_count() / 2; i < d.beam_count(); ++i)
      if (!s.placed.test(order[static_cast<std::size_t>(i)])) { extra = order[static_cast<std::size_t>(i)]; break; }
    if (extra == -1) continue;
    s.place(extra);
    StabilityAnalysis after(s);
    for (int j = 0; j < d.joint_count(); ++j)
      if (before.stable(j)) CHECK(after.stable(j));
  }
}

TEST_CASE("component classes are disjoint and cover placed beams") {
  for (int trial = 0; trial < 6; ++trial) {
    auto d = fixtures::random_constructable(50 + trial, 24);
    auto s = full_state(d);
    auto comps = connected_components(s);
    std::vector<char> seen(static_cast<std::size_t>(d.beam_count()), 0);
    for (const auto& c : comps)
      for (int bi : c) {
        CHECK_FALSE(seen[static_cast<std::size_t>(bi)]);
        seen[static_cast<std::size_t>(bi)] = 1;
      }
    for (int bi = 0; bi < d.beam_count(); ++bi) CHECK(seen[static_cast<std::size_t>(bi)]);
  }
}
