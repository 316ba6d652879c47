#pragma once

#include "wireplan/constraints.hpp"
#include "wireplan/frame_model.hpp"
#include "wireplan/stiffness.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace wireplan {

struct Violation {
  int step = 0;
  std::string beam;
  std::string kind; // directionality | collision | connection | cantilever | duplicate | missing
  std::string detail;
};

struct SequenceStep {
  int beam = -1;
  PrintDirection dir = PrintDirection::forward;
};

// Simulates the sequence forward and reports every violated constraint at its
// first occurrence; also checks the sequence is a permutation of the design.
std::vector<Violation> verify_sequence(const FrameDesign& design,
                                       const std::vector<SequenceStep>& sequence,
                                       const PrecedenceSet& prec);

inline constexpr int kDefaultExhaustiveLimit = 14;

// Depth-first search with memoization on placed-beam sets; true when a
// feasible forward sequence from G reaches H exactly.
bool reachable(const FrameDesign& design, const AssemblyState& from, const AssemblyState& to,
               const PrecedenceSet& prec, int exhaustive_limit = kDefaultExhaustiveLimit);

// Greedy reachability-guided enumeration of a full feasible sequence.
std::optional<std::vector<SequenceStep>> brute_force_plan(const FrameDesign& design,
                                                          const PrecedenceSet& prec,
                                                          int exhaustive_limit = kDefaultExhaustiveLimit);

using StepCostFn = std::function<double(const AssemblyState&, int beam, PrintDirection)>;

struct MinMaxResult {
  bool constructable = false;
  double max_cost = 0;
  std::vector<SequenceStep> sequence;
};

// Exhaustive subset DP over all feasible sequences and direction assignments;
// returns the minimum over sequences of the maximum per-step cost.
MinMaxResult brute_force_minmax(const FrameDesign& design, const PrecedenceSet& prec,
                                const StepCostFn& cost, int limit = 10);

} // namespace wireplan
