#pragma once

#include "wireplan/frame_model.hpp"

#include <cstdint>
#include <optional>

namespace wireplan::fixtures {

// Three grounded base joints with beams rising to one apex.
FrameDesign tripod();

// One grounded joint with a three-beam dangling chain.
FrameDesign chain3();

// Two grounded joints joined by two beam paths through a common apex.
FrameDesign loop();

// Polyline beam descending at 80 degrees then ascending at 30.
FrameDesign vbeam();

// Compliant helix and stiff post with a horizontal bridge between their tops.
FrameDesign helix_post();

// Elevated joint that must carry two leaf cantilevers: unconstructable.
FrameDesign double_leaf();

// Lattice tower: columns of verticals tied by horizontals, layer by layer.
FrameDesign lattice(int nx, int ny, int layers, double pitch = 8.0, double layer_height = 6.0);

// Seeded generator of constructable designs: grows chains from the substrate,
// closes loops between stable joints, keeps everything printable.
FrameDesign random_constructable(std::uint64_t seed, int beams);

} // namespace wireplan::fixtures
