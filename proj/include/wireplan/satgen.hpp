#pragma once

#include "wireplan/frame_model.hpp"

#include <map>
#include <string>
#include <vector>

namespace wireplan {

struct Gate {
  std::string out;
  std::string in_a;
  std::string in_b;
};

struct Circuit {
  std::vector<std::string> inputs;
  std::vector<Gate> gates; // NOR gates, topologically ordered after validation
  std::string output;

  std::vector<std::string> wires() const;
  bool validate(std::string* error = nullptr) const; // acyclic, single driver
  // Truth-table evaluation for a full input assignment.
  bool evaluate(const std::map<std::string, bool>& assignment) const;
  // Exhaustive satisfiability (inputs <= 20).
  bool satisfiable() const;
};

// Parses the minimal netlist: `INPUT a;`, `out = NOR(a, b);`, `OUTPUT w;`.
Circuit parse_netlist(const std::string& text);
std::string write_netlist(const Circuit& circuit);

// Rewrites every fan-out-k wire through a tree of k-1 splitter copies so each
// wire drives exactly one consumer. Splitter copies keep the source value.
Circuit insert_splitters(const Circuit& circuit);

// Replaces wire crossings of the column-ordered embedding with the NOR-built
// crossover gate. Circuits already planar in that embedding are unchanged.
Circuit planarize(const Circuit& circuit);

// Crossover subcircuit on two wires (built from NOR gates); exposed for
// truth-table tests.
Circuit crossover_circuit();

struct CompiledCircuit {
  FrameDesign design;
  // Gadget bookkeeping for behavioral checks: per gadget (loop), the red and
  // blue half beams and the wire the loop carries.
  struct Gadget {
    std::string wire;
    std::vector<std::string> red;
    std::vector<std::string> blue;
    std::string magenta;
    std::string closer;
  };
  std::vector<Gadget> gadgets;
  std::string output_beam; // the circuit output beam id
};

// Emits joints and beams realizing the circuit: one loop gadget per NOR or
// splitter output (and per input variable), sandwiched value wires, clause
// tees, and the output beam with its stabilizer closers. The design is
// constructable iff the circuit is satisfiable.
CompiledCircuit compile_circuit(const Circuit& circuit);

} // namespace wireplan
