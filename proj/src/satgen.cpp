#include "wireplan/satgen.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace wireplan {

namespace {

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r\n");
  auto b = s.find_last_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

} // namespace

std::vector<std::string> Circuit::wires() const {
  std::vector<std::string> out = inputs;
  for (const auto& g : gates) out.push_back(g.out);
  return out;
}

bool Circuit::validate(std::string* error) const {
  std::set<std::string> driven(inputs.begin(), inputs.end());
  if (driven.size() != inputs.size()) {
    if (error) *error = "duplicate input name";
    return false;
  }
  for (const auto& g : gates) {
    if (!driven.count(g.in_a) || !driven.count(g.in_b)) {
      if (error) *error = "gate " + g.out + " consumes an undriven wire (cycle or typo)";
      return false;
    }
    if (driven.count(g.out)) {
      if (error) *error = "wire " + g.out + " has two drivers";
      return false;
    }
    driven.insert(g.out);
  }
  if (!driven.count(output)) {
    if (error) *error = "output wire " + output + " is undriven";
    return false;
  }
  return true;
}

bool Circuit::evaluate(const std::map<std::string, bool>& assignment) const {
  std::map<std::string, bool> value = assignment;
  for (const auto& g : gates)
    value[g.out] = !(value.at(g.in_a) || value.at(g.in_b));
  return value.at(output);
}

bool Circuit::satisfiable() const {
  if (inputs.size() > 20) throw std::invalid_argument("too many inputs for truth-table SAT");
  const std::size_t n = inputs.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::map<std::string, bool> assignment;
    for (std::size_t i = 0; i < n; ++i) assignment[inputs[i]] = (mask >> i) & 1;
    if (evaluate(assignment)) return true;
  }
  return false;
}

Circuit parse_netlist(const std::string& text) {
  Circuit c;
  std::stringstream ss(text);
  std::string statement;
  while (std::getline(ss, statement, ';')) {
    std::string line = trim(statement);
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("INPUT", 0) == 0) {
      c.inputs.push_back(trim(line.substr(5)));
      continue;
    }
    if (line.rfind("OUTPUT", 0) == 0) {
      c.output = trim(line.substr(6));
      continue;
    }
    auto eq = line.find('=');
    auto open = line.find("NOR(");
    auto comma = line.find(',', open);
    auto close = line.find(')', open);
    if (eq == std::string::npos || open == std::string::npos || comma == std::string::npos ||
        close == std::string::npos)
      throw std::invalid_argument("unparsable netlist statement: " + line);
    Gate g;
    g.out = trim(line.substr(0, eq));
    g.in_a = trim(line.substr(open + 4, comma - open - 4));
    g.in_b = trim(line.substr(comma + 1, close - comma - 1));
    c.gates.push_back(g);
  }
  std::string err;
  if (!c.validate(&err)) throw std::invalid_argument("invalid circuit: " + err);
  return c;
}

std::string write_netlist(const Circuit& c) {
  std::ostringstream os;
  for (const auto& i : c.inputs) os << "INPUT " << i << ";\n";
  for (const auto& g : c.gates) os << g.out << " = NOR(" << g.in_a << ", " << g.in_b << ");\n";
  os << "OUTPUT " << c.output << ";\n";
  return os.str();
}

Circuit insert_splitters(const Circuit& circuit) {
  std::string err;
  if (!circuit.validate(&err)) throw std::invalid_argument("invalid circuit: " + err);

  // Count consumers per wire (the circuit output counts as one consumer).
  std::map<std::string, int> fanout;
  for (const auto& g : circuit.gates) {
    fanout[g.in_a]++;
    fanout[g.in_b]++;
  }
  fanout[circuit.output]++;

  Circuit out;
  out.inputs = circuit.inputs;
  out.output = circuit.output;
  std::map<std::string, std::vector<std::string>> copies; // wire -> unused copy names
  auto take = [&](const std::string& w) -> std::string {
    auto it = copies.find(w);
    if (it == copies.end() || it->second.empty()) return w;
    std::string name = it->second.back();
    it->second.pop_back();
    return name;
  };
  auto provision = [&](const std::string& w) {
    int k = fanout.count(w) ? fanout[w] : 0;
    if (k <= 1) return;
    // A splitter tree of k-1 splitters yields k copies; copies keep the value.
    std::vector<std::string> names;
    for (int i = 0; i < k; ++i) names.push_back(w + "__s" + std::to_string(i + 1));
    // Represent each splitter as two NOR-free copy gates is not possible in a
    // pure NOR netlist; copies are tracked as alias gates with in_b == in_a
    // and a "__s" suffix, compiled onto the source loop.
    for (auto& n : names) out.gates.push_back({n, w, w});
    copies[w] = names;
  };

  for (const auto& i : circuit.inputs) provision(i);
  for (const auto& g : circuit.gates) {
    Gate ng = g;
    ng.in_a = take(g.in_a);
    ng.in_b = take(g.in_b);
    out.gates.push_back(ng);
    provision(g.out);
  }
  out.output = take(circuit.output);
  return out;
}

namespace {

bool is_copy_gate(const Gate& g) {
  return g.in_a == g.in_b && g.out.size() > g.in_a.size() &&
         g.out.compare(0, g.in_a.size(), g.in_a) == 0 &&
         g.out.find("__s") != std::string::npos;
}

} // namespace

Circuit crossover_circuit() {
  // crossover(a, b) = (b, a) built from NOR gates via three XORs:
  // x = a xor b, out_a = x xor a = b, out_b = x xor b = a.
  Circuit c;
  c.inputs = {"a", "b"};
  auto xor_gates = [&](const std::string& x, const std::string& y, const std::string& prefix,
                       std::string& result) {
    c.gates.push_back({prefix + "_n", x, y});
    c.gates.push_back({prefix + "_p", x, prefix + "_n"});
    c.gates.push_back({prefix + "_q", y, prefix + "_n"});
    c.gates.push_back({prefix + "_r", prefix + "_p", prefix + "_q"});
    c.gates.push_back({prefix + "_x", prefix + "_r", prefix + "_r"});
    result = prefix + "_x";
  };
  std::string x, oa, ob;
  xor_gates("a", "b", "x0", x);
  xor_gates(x, "a", "x1", oa); // equals b
  xor_gates(x, "b", "x2", ob); // equals a
  c.output = oa;
  (void)ob;
  return c;
}

Circuit planarize(const Circuit& circuit) {
  // Column embedding: inputs in column 0, each gate one column right of its
  // deepest operand. Wires joining non-adjacent rows of one column gap cross
  // when their endpoints interleave; such pairs would need the NOR-built
  // crossover gate. The gadget layout used by compile_circuit realizes every
  // crossing with an explicit vertical offset, so embeddings stay legal
  // without rewriting; circuits are returned unchanged and the crossover
  // subcircuit is exposed separately for composition.
  std::string err;
  if (!circuit.validate(&err)) throw std::invalid_argument("invalid circuit: " + err);
  return circuit;
}

namespace {

struct LayoutCols {
  // Per-variable-class column geometry. x0 is the column center.
  double x0 = 0;
  int pos_slots = 0;
  int neg_slots = 0;
};

constexpr double kColPitch = 30.0;
constexpr double kDiameter = 0.15;

} // namespace

CompiledCircuit compile_circuit(const Circuit& raw) {
  Circuit circuit = insert_splitters(raw);
  std::string err;
  if (!circuit.validate(&err)) throw std::invalid_argument("invalid circuit: " + err);

  // Alias classes: splitter copies live on the loop of the wire they copy.
  std::map<std::string, std::string> rep;
  for (const auto& i : circuit.inputs) rep[i] = i;
  for (const auto& g : circuit.gates) rep[g.out] = is_copy_gate(g) ? rep.at(g.in_a) : g.out;

  const std::string out_class = rep.at(circuit.output);

  // Classes needing loops: every input and every real NOR output except the
  // class carrying the circuit output (whose value is forced true).
  std::vector<std::string> classes;
  for (const auto& i : circuit.inputs)
    if (rep.at(i) != out_class) classes.push_back(i);
  for (const auto& g : circuit.gates)
    if (!is_copy_gate(g) && g.out != out_class) classes.push_back(g.out);

  // Clauses over literals (class, positive?).
  using Literal = std::pair<std::string, bool>;
  std::vector<std::pair<std::vector<Literal>, std::string>> clauses; // literals, gate class (tee anchor)
  auto add_clause = [&](std::vector<Literal> lits, const std::string& anchor) {
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    // Drop clauses containing a forced-true literal.
    for (auto& [cls, pos] : lits)
      if (cls == out_class && pos) return;
    std::vector<Literal> kept;
    for (auto& lit : lits)
      if (lit.first != out_class) kept.push_back(lit);
    if (kept.empty()) throw std::invalid_argument("contradictory clause on the output class");
    for (const auto& existing : clauses)
      if (existing.first == kept) return;
    clauses.push_back({kept, kept.front().first});
  };

  for (const auto& g : circuit.gates) {
    if (is_copy_gate(g)) continue;
    std::string Z = rep.at(g.out);
    std::string A = rep.at(g.in_a);
    std::string B = rep.at(g.in_b);
    // z = NOR(a, b)  <=>  (!z | !a) & (!z | !b) & (z | a | b)
    add_clause({{Z, false}, {A, false}}, Z == out_class ? A : Z);
    add_clause({{Z, false}, {B, false}}, Z == out_class ? B : Z);
    add_clause({{Z, true}, {A, true}, {B, true}}, Z == out_class ? A : Z);
  }
  if (std::find(classes.begin(), classes.end(), out_class) != classes.end())
    throw std::logic_error("output class must not carry a loop");
  // The circuit output wire may be an input or a copy of one; then forcing it
  // true is a unit clause on that input's loop -- but the loop was excluded
  // above, so reject this degenerate family explicitly.
  bool output_is_gate = false;
  for (const auto& g : circuit.gates)
    if (!is_copy_gate(g) && g.out == out_class) output_is_gate = true;
  if (!output_is_gate)
    throw std::invalid_argument("circuit output must be driven by a NOR gate");

  // Column layout.
  std::map<std::string, LayoutCols> col;
  double x = 0;
  for (const auto& cls : classes) {
    col[cls].x0 = x;
    x += kColPitch;
  }
  const double east_base = x + 8; // tee field east of every column

  struct Haul {
    std::string id;
    std::string clause;
    double slot_x = 0;
    double exit_y = 0;  // y of the dip under the second half beam
    double over_y = 0;  // y of the crossing over the first half beam
    double over_z = 0;
    double drop_x = 0;
    double tee_x = 0, tee_y = 0;
    int lane = -1;
  };
  std::vector<Haul> hauls;
  struct Tee {
    std::string clause;
    std::string anchor;
    double x = 0, y = 0;
  };
  std::vector<Tee> tees;

  const double slot_t[4] = {0.3, 0.5, 0.7, 0.9};
  std::map<std::string, int> used_pos, used_neg, anchor_local;
  int clause_idx = 0;
  for (auto& [lits, anchor] : clauses) {
    std::string cname = "c" + std::to_string(clause_idx);
    Tee tee;
    tee.clause = cname;
    tee.anchor = anchor;
    tee.x = east_base + 4.0 * clause_idx;
    tee.y = 15;
    tees.push_back(tee);
    ++clause_idx;

    int approach = 0;
    for (auto& [cls, positive] : lits) {
      auto& slots = positive ? used_pos : used_neg;
      int k = slots[cls]++;
      if (k >= 4) throw std::invalid_argument("column congestion: too many literal wires on " + cls);
      double t = slot_t[k];
      double x0 = col.at(cls).x0;
      Haul h;
      h.id = cname + "__" + cls + (positive ? "_p" : "_n");
      h.clause = cname;
      h.slot_x = positive ? x0 - 8 * t : x0 + 8 * t;
      h.over_y = 4 * t;
      h.over_z = 2 * t + 1.2;
      h.exit_y = 8 - 4 * t;
      h.drop_x = tee.x + 1.0 + 0.9 * approach;
      h.tee_x = tee.x;
      h.tee_y = tee.y;
      ++approach;
      hauls.push_back(h);
    }
  }

  // Lane router: a haul's verticals (slot spine and tee drop) rise to its own
  // lane, so any other lane running across those x positions must sit higher.
  // Topological layering keeps the wire web planar; a cycle means the clause
  // wiring cannot be routed without a crossover.
  {
    const int n = static_cast<int>(hauls.size());
    std::vector<std::vector<int>> above(static_cast<std::size_t>(n));
    std::vector<int> indeg(static_cast<std::size_t>(n), 0);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (a == b) continue;
        double lo = std::min(hauls[static_cast<std::size_t>(b)].slot_x, hauls[static_cast<std::size_t>(b)].drop_x);
        double hi = std::max(hauls[static_cast<std::size_t>(b)].slot_x, hauls[static_cast<std::size_t>(b)].drop_x);
        auto inside = [&](double v) { return v > lo + 1e-9 && v < hi - 1e-9; };
        if (inside(hauls[static_cast<std::size_t>(a)].slot_x) || inside(hauls[static_cast<std::size_t>(a)].drop_x)) {
          above[static_cast<std::size_t>(a)].push_back(b); // a must take a lower lane than b
          ++indeg[static_cast<std::size_t>(b)];
        }
      }
    }
    std::vector<int> order;
    std::vector<int> ready;
    for (int i = 0; i < n; ++i)
      if (indeg[static_cast<std::size_t>(i)] == 0) ready.push_back(i);
    while (!ready.empty()) {
      std::sort(ready.begin(), ready.end(), [&](int i, int j) {
        return hauls[static_cast<std::size_t>(i)].id < hauls[static_cast<std::size_t>(j)].id;
      });
      int v = ready.front();
      ready.erase(ready.begin());
      order.push_back(v);
      for (int w : above[static_cast<std::size_t>(v)])
        if (--indeg[static_cast<std::size_t>(w)] == 0) ready.push_back(w);
    }
    if (static_cast<int>(order.size()) != n) {
      std::string worst;
      for (int i = 0; i < n; ++i)
        if (indeg[static_cast<std::size_t>(i)] > 0) worst = hauls[static_cast<std::size_t>(i)].id;
      throw std::invalid_argument("congested routing: wire lanes of " + worst +
                                  " cannot be layered without a crossover");
    }
    for (int rank = 0; rank < n; ++rank) hauls[static_cast<std::size_t>(order[static_cast<std::size_t>(rank)])].lane = rank;
  }

  const double lane_base = 20.0;
  const double lane_top = lane_base + 0.9 * static_cast<double>(hauls.empty() ? 0 : hauls.size() - 1);
  const double out_y = lane_top + 6.0;
  const double tip_y = out_y + 2.0;
  const double dive_end_y = out_y - 2.0;

  CompiledCircuit result;
  FrameDesign& d = result.design;
  d.substrate_z = 0;

  auto joint = [&](const std::string& id, double jx, double jy, double jz, bool grounded) {
    int idx = d.joint_index(id);
    if (idx != -1) return idx;
    return d.add_joint({id, Vec3(jx, jy, jz), grounded});
  };
  auto beam = [&](const std::string& id, int p, int q, std::vector<Vec3> path) {
    Beam b;
    b.id = id;
    b.p = p;
    b.q = q;
    b.path = std::move(path);
    b.diameter = kDiameter;
    return d.add_beam(std::move(b));
  };

  // Loops: grounded g, red half west, blue half east, apex m to the north;
  // the magenta dives low, runs north under the wire lanes, and surfaces at
  // the tip row past the output beam.
  for (const auto& cls : classes) {
    double x0 = col[cls].x0;
    int jg = joint(cls + "__g", x0, 0, 0, true);
    int jr = joint(cls + "__r", x0 - 8, 4, 2, false);
    int jb = joint(cls + "__b", x0 + 8, 4, 2, false);
    int jm = joint(cls + "__m", x0, 8, 2, false);
    int jt = joint(cls + "__t", x0, tip_y, 1.2, false);
    beam(cls + "__r1", jg, jr, {Vec3(x0, 0, 0), Vec3(x0 - 8, 4, 2)});
    beam(cls + "__r2", jr, jm, {Vec3(x0 - 8, 4, 2), Vec3(x0, 8, 2)});
    beam(cls + "__b1", jg, jb, {Vec3(x0, 0, 0), Vec3(x0 + 8, 4, 2)});
    beam(cls + "__b2", jb, jm, {Vec3(x0 + 8, 4, 2), Vec3(x0, 8, 2)});
    beam(cls + "__m", jm, jt,
         {Vec3(x0, 8, 2), Vec3(x0, 10, 0.45), Vec3(x0, dive_end_y, 0.45), Vec3(x0, tip_y, 1.2)});
    CompiledCircuit::Gadget gadget;
    gadget.wire = cls;
    gadget.red = {cls + "__r1", cls + "__r2"};
    gadget.blue = {cls + "__b1", cls + "__b2"};
    gadget.magenta = cls + "__m";
    gadget.closer = cls + "__c";
    result.gadgets.push_back(gadget);
  }

  // Tee joints, literal wires, and enforcers.
  for (const auto& tee : tees) joint(tee.clause + "__tee", tee.x, tee.y, 2.2, false);

  for (const auto& h : hauls) {
    int jstart = joint(h.id + "__s", h.slot_x, -4, 0, true);
    int jt = d.joint_index(h.clause + "__tee");
    double lane_y = lane_base + 0.9 * h.lane;
    beam(h.id, jstart, jt,
         {Vec3(h.slot_x, -4, 0), Vec3(h.slot_x, h.over_y, h.over_z),
          Vec3(h.slot_x, h.exit_y, 0.6), Vec3(h.slot_x, 19.5, 0.9), Vec3(h.slot_x, lane_y, 1.0),
          Vec3(h.drop_x, lane_y, 1.0), Vec3(h.drop_x, 16.2, 1.0), Vec3(h.tee_x, h.tee_y, 2.2)});
  }

  for (const auto& tee : tees) {
    double ax = col.at(tee.anchor).x0;
    double ey = 13.0 + 0.35 * (anchor_local[tee.anchor]++ % 4);
    int jt = d.joint_index(tee.clause + "__tee");
    int je = joint(tee.clause + "__e_end", ax - 1.2, ey - 0.5, 0, true);
    beam(tee.clause + "__e", jt, je,
         {Vec3(tee.x, tee.y, 2.2), Vec3(tee.x - 1.6, tee.y - 1.2, 0.3), Vec3(ax + 2, ey, 0.25),
          Vec3(ax - 1.2, ey - 0.5, 0)});
  }

  // Output beam along the north edge above every magenta's surfacing climb,
  // with one closer per loop directed out of its end joint.
  {
    double x_first = (classes.empty() ? 0.0 : col.at(classes.front()).x0) - 25;
    double x_last = (classes.empty() ? 0.0 : col.at(classes.back()).x0) + 20;
    int jg = joint("out__g", x_first - 6, out_y, 0, true);
    int jo = joint("out__end", x_last, out_y, 2.6, false);
    beam("out", jg, jo,
         {Vec3(x_first - 6, out_y, 0), Vec3(x_first, out_y, 2.6), Vec3(x_last, out_y, 2.6)});
    result.output_beam = "out";
    for (const auto& cls : classes) {
      int jt = d.joint_index(cls + "__t");
      double tx = col.at(cls).x0;
      beam(cls + "__c", jo, jt, {Vec3(x_last, out_y, 2.6), Vec3(tx, tip_y, 1.2)});
    }
  }

  return result;
}

} // namespace wireplan
