// Copyright 2026 The eswapsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "eswap/circuits.hpp"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

namespace eswap {

using json = nlohmann::json;

namespace {
constexpr double kPi = std::numbers::pi;
const cxd kI{0.0, 1.0};
}  // namespace

std::string axis_name(Axis a) {
  switch (a) {
    case Axis::X: return "X";
    case Axis::Y: return "Y";
    case Axis::Z: return "Z";
    case Axis::Hadamard: return "H";
  }
  return "?";
}

Axis axis_from_name(const std::string& name) {
  if (name == "X") return Axis::X;
  if (name == "Y") return Axis::Y;
  if (name == "Z") return Axis::Z;
  if (name == "H") return Axis::Hadamard;
  throw CompileError("unknown rotation axis: " + name);
}

GateSpec GateSpec::beamsplitter(double theta, double phi, double duration) {
  if (theta < 0.0 || theta > kPi) throw CompileError("beamsplitter theta outside [0, pi]");
  if (duration < 0.0) throw CompileError("negative gate duration");
  GateSpec g;
  g.kind = Kind::BeamSplitter;
  g.theta = theta;
  g.phi = phi;
  g.duration = duration;
  return g;
}

GateSpec GateSpec::cps(Mode target, double duration) {
  if (target != Mode::Bob)
    throw CompileError("CPS target must be the ancilla-coupled mode (Bob)");
  GateSpec g;
  g.kind = Kind::CPS;
  g.target = target;
  g.duration = duration;
  return g;
}

GateSpec GateSpec::rotation(Axis axis, double angle, double duration) {
  GateSpec g;
  g.kind = Kind::AncillaRotation;
  g.axis = axis;
  g.angle = angle;
  g.duration = duration;
  return g;
}

GateSpec GateSpec::hadamard(double duration) {
  return rotation(Axis::Hadamard, 0.0, duration);
}

GateSpec GateSpec::swap(Mode a, Mode b, double duration) {
  GateSpec g;
  g.kind = Kind::Swap;
  g.mode_a = a;
  g.mode_b = b;
  g.duration = duration;
  return g;
}

GateSpec GateSpec::custom_unitary(Operator op, double duration) {
  GateSpec g;
  g.kind = Kind::CustomUnitary;
  g.custom = std::make_shared<Operator>(std::move(op));
  g.duration = duration;
  return g;
}

std::string GateSpec::kind_name() const {
  switch (kind) {
    case Kind::BeamSplitter: return "beamsplitter";
    case Kind::CPS: return "cps";
    case Kind::AncillaRotation: return "rotation";
    case Kind::Swap: return "swap";
    case Kind::CustomUnitary: return "custom";
  }
  return "?";
}

double Circuit::total_duration() const {
  double t = 0.0;
  for (const auto& g : gates) t += g.duration;
  return t;
}

Operator beamsplitter_unitary(double theta, double phi, const ModeSpace& space_a,
                              const ModeSpace& space_b) {
  if (space_a.label == Mode::Ancilla || space_b.label == Mode::Ancilla)
    throw SpaceMismatch("beamsplitter couples cavity modes only");
  Operator a = annihilation(space_a);
  Operator b = annihilation(space_b);
  Operator hop = tensor({a.dagger(), b});
  Matrix h = std::exp(kI * phi) * hop.m + std::exp(-kI * phi) * hop.m.adjoint();
  return expm({h, hop.spaces}, -kI * theta);
}

Operator cps_unitary(const ModeSpace& ancilla, const ModeSpace& cavity) {
  if (ancilla.cutoff != 2) throw SpaceMismatch("ancilla cutoff must be 2");
  Operator par = parity_operator(cavity);
  long dc = cavity.cutoff;
  Matrix m = Matrix::Zero(2 * dc, 2 * dc);
  m.block(0, 0, dc, dc) = Matrix::Identity(dc, dc);
  m.block(dc, dc, dc, dc) = par.m;
  return {m, {ancilla, cavity}};
}

Operator swap_operator(const ModeSpace& space_a, const ModeSpace& space_b) {
  if (space_a.cutoff != space_b.cutoff)
    throw SpaceMismatch("swap needs equal cutoffs");
  long c = space_a.cutoff;
  Matrix s = Matrix::Zero(c * c, c * c);
  for (long m = 0; m < c; ++m)
    for (long n = 0; n < c; ++n) s(n * c + m, m * c + n) = 1.0;
  return {s, {space_a, space_b}};
}

Operator eswap_ideal(double theta_c, const ModeSpace& space_a, const ModeSpace& space_b) {
  Operator s = swap_operator(space_a, space_b);
  Matrix m = std::cos(theta_c) * Matrix::Identity(s.dim(), s.dim()) +
             kI * std::sin(theta_c) * s.m;
  return {m, s.spaces};
}

Operator cswap_ideal(const ModeSpace& ancilla, const ModeSpace& space_a,
                     const ModeSpace& space_b) {
  if (ancilla.cutoff != 2) throw SpaceMismatch("ancilla cutoff must be 2");
  Operator s = swap_operator(space_a, space_b);
  long dc = s.dim();
  Matrix m = Matrix::Zero(2 * dc, 2 * dc);
  m.block(0, 0, dc, dc) = Matrix::Identity(dc, dc);
  m.block(dc, dc, dc, dc) = s.m;
  Spaces spaces{ancilla};
  spaces.insert(spaces.end(), s.spaces.begin(), s.spaces.end());
  return {m, spaces};
}

namespace {

Matrix pauli_matrix(Axis axis) {
  Matrix m(2, 2);
  switch (axis) {
    case Axis::X: m << 0, 1, 1, 0; break;
    case Axis::Y: m << 0, -kI, kI, 0; break;
    case Axis::Z: m << 1, 0, 0, -1; break;
    case Axis::Hadamard: {
      double r = 1.0 / std::sqrt(2.0);
      m << r, r, r, -r;
      break;
    }
  }
  return m;
}

ModeSpace find_space(const Spaces& spaces, Mode label) {
  for (const auto& s : spaces)
    if (s.label == label) return s;
  throw SpaceMismatch("gate references mode " + mode_name(label) +
                      " absent from the circuit space");
}

}  // namespace

Operator gate_unitary(const GateSpec& gate, const Spaces& spaces) {
  switch (gate.kind) {
    case GateSpec::Kind::BeamSplitter: {
      ModeSpace a = find_space(spaces, gate.mode_a);
      ModeSpace b = find_space(spaces, gate.mode_b);
      return embed(beamsplitter_unitary(gate.theta, gate.phi, a, b), spaces);
    }
    case GateSpec::Kind::CPS: {
      ModeSpace anc = find_space(spaces, Mode::Ancilla);
      ModeSpace cav = find_space(spaces, gate.target);
      return embed(cps_unitary(anc, cav), spaces);
    }
    case GateSpec::Kind::AncillaRotation: {
      ModeSpace anc = find_space(spaces, Mode::Ancilla);
      Matrix u;
      if (gate.axis == Axis::Hadamard) {
        u = pauli_matrix(Axis::Hadamard);
      } else {
        Matrix sigma = pauli_matrix(gate.axis);
        double half = gate.angle / 2.0;
        u = std::cos(half) * Matrix::Identity(2, 2) - kI * std::sin(half) * sigma;
      }
      return embed({u, {anc}}, spaces);
    }
    case GateSpec::Kind::Swap: {
      ModeSpace a = find_space(spaces, gate.mode_a);
      ModeSpace b = find_space(spaces, gate.mode_b);
      return embed(swap_operator(a, b), spaces);
    }
    case GateSpec::Kind::CustomUnitary:
      return embed(*gate.custom, spaces);
  }
  throw CompileError("unhandled gate kind");
}

Operator circuit_unitary(const Circuit& circuit) {
  Operator u = identity(circuit.spaces);
  for (const auto& g : circuit.gates) u = mul(gate_unitary(g, circuit.spaces), u);
  return u;
}

StateVector apply(const Circuit& circuit, const StateVector& psi) {
  StateVector out = psi;
  for (const auto& g : circuit.gates) out = apply(gate_unitary(g, circuit.spaces), out);
  return out;
}

DensityMatrix apply(const Circuit& circuit, const DensityMatrix& rho) {
  DensityMatrix out = rho;
  for (const auto& g : circuit.gates) out = apply(gate_unitary(g, circuit.spaces), out);
  return out;
}

Circuit compile_eswap(double theta_c, int cutoff_a, int cutoff_b) {
  if (theta_c < -kPi || theta_c > kPi) throw CompileError("theta_c outside [-pi, pi]");
  Circuit c;
  c.control_angle = theta_c;
  c.bs_phase = kPi / 2.0;
  c.spaces = {ancilla_space(), alice_space(cutoff_a), bob_space(cutoff_b)};
  c.gates = {
      GateSpec::beamsplitter(kPi / 4.0, c.bs_phase),
      GateSpec::hadamard(),
      GateSpec::cps(),
      GateSpec::rotation(Axis::X, -2.0 * theta_c),
      GateSpec::cps(),
      GateSpec::hadamard(),
      GateSpec::beamsplitter(kPi / 4.0, c.bs_phase + kPi),
  };
  auto report = verify_equivalence(
      c, eswap_ideal(theta_c, alice_space(cutoff_a), bob_space(cutoff_b)));
  if (!report.pass)
    throw CompileError("eswap compilation failed verification, distance " +
                       std::to_string(report.distance));
  return c;
}

Circuit compile_fredkin(int cutoff_a, int cutoff_b) {
  Circuit c;
  c.control_angle = 0.0;
  c.bs_phase = kPi / 2.0;
  c.spaces = {ancilla_space(), alice_space(cutoff_a), bob_space(cutoff_b)};
  c.gates = {
      GateSpec::beamsplitter(kPi / 4.0, c.bs_phase),
      GateSpec::cps(),
      GateSpec::beamsplitter(kPi / 4.0, c.bs_phase + kPi),
  };
  auto report = verify_equivalence(
      c, cswap_ideal(ancilla_space(), alice_space(cutoff_a), bob_space(cutoff_b)));
  if (!report.pass)
    throw CompileError("fredkin compilation failed verification, distance " +
                       std::to_string(report.distance));
  return c;
}

namespace {

// Input columns whose total cavity photon number sits in a sector the
// truncation represents completely. Beamsplitters conserve total photon
// number, so the compiled circuit is exact on these columns and pure
// truncation artifact outside them.
std::vector<long> faithful_columns(const Spaces& cavity_spaces) {
  int ca = 0, cb = 0;
  for (const auto& s : cavity_spaces) {
    if (s.label == Mode::Alice) ca = s.cutoff;
    if (s.label == Mode::Bob) cb = s.cutoff;
  }
  int nmax = std::min(ca, cb) - 1;
  std::vector<long> cols;
  for (long na = 0; na < ca; ++na)
    for (long nb = 0; nb < cb; ++nb)
      if (na + nb <= nmax) cols.push_back(na * cb + nb);
  return cols;
}

}  // namespace

EquivalenceReport verify_equivalence(const Circuit& circuit, const Operator& target,
                                     double tolerance) {
  Operator u = circuit_unitary(circuit);
  EquivalenceReport report;

  Matrix compiled, wanted;
  long anc_blocks = 1;
  Spaces cavity_spaces;
  if (same_spaces(u.spaces, target.spaces)) {
    compiled = u.m;
    wanted = target.m;
    if (!circuit.spaces.empty() && circuit.spaces.front().label == Mode::Ancilla) {
      anc_blocks = 2;
      cavity_spaces.assign(circuit.spaces.begin() + 1, circuit.spaces.end());
    } else {
      cavity_spaces = circuit.spaces;
    }
  } else {
    // target on the cavities only: restrict to the ancilla-|g> input block
    if (circuit.spaces.empty() || circuit.spaces.front().label != Mode::Ancilla)
      throw SpaceMismatch("circuit has no ancilla to project on");
    cavity_spaces.assign(circuit.spaces.begin() + 1, circuit.spaces.end());
    if (!same_spaces(cavity_spaces, target.spaces))
      throw SpaceMismatch("target space matches neither the full nor the cavity space");
    long dc = dim_of(cavity_spaces);
    compiled = u.m.block(0, 0, dc, dc);
    wanted = target.m;

    std::vector<long> cols = faithful_columns(cavity_spaces);
    Matrix leak = u.m.block(dc, 0, dc, dc);
    double lk = 0.0;
    for (long col : cols) lk = std::max(lk, leak.col(col).cwiseAbs().maxCoeff());
    report.leakage = lk;
  }

  std::vector<long> cols = faithful_columns(cavity_spaces);
  long dc = dim_of(cavity_spaces);
  Matrix cmp(compiled.rows(), long(cols.size()) * anc_blocks);
  Matrix tgt(compiled.rows(), long(cols.size()) * anc_blocks);
  long k = 0;
  for (long blk = 0; blk < anc_blocks; ++blk)
    for (long col : cols) {
      cmp.col(k) = compiled.col(blk * dc + col);
      tgt.col(k) = wanted.col(blk * dc + col);
      ++k;
    }

  cxd corr = (tgt.adjoint() * cmp).trace();
  report.phase = (std::abs(corr) < 1e-300) ? cxd(1.0, 0.0) : corr / std::abs(corr);
  report.distance = (cmp * std::conj(report.phase) - tgt).cwiseAbs().maxCoeff();
  report.pass = report.distance < tolerance && report.leakage < 1e-9;
  return report;
}

std::string to_json(const Circuit& circuit) {
  json j;
  j["control_angle"] = circuit.control_angle;
  j["bs_phase"] = circuit.bs_phase;
  j["frame_phase_alice"] = circuit.frame_phase_alice;
  j["frame_phase_bob"] = circuit.frame_phase_bob;
  json dims = json::array(), order = json::array();
  for (const auto& s : circuit.spaces) {
    dims.push_back(s.cutoff);
    order.push_back(mode_name(s.label));
  }
  j["dims"] = dims;
  j["mode_order"] = order;
  json gates = json::array();
  for (const auto& g : circuit.gates) {
    json gg;
    gg["kind"] = g.kind_name();
    gg["duration"] = g.duration;
    switch (g.kind) {
      case GateSpec::Kind::BeamSplitter:
        gg["theta"] = g.theta;
        gg["phi"] = g.phi;
        gg["mode_a"] = mode_name(g.mode_a);
        gg["mode_b"] = mode_name(g.mode_b);
        break;
      case GateSpec::Kind::CPS:
        gg["target"] = mode_name(g.target);
        break;
      case GateSpec::Kind::AncillaRotation:
        gg["axis"] = axis_name(g.axis);
        gg["angle"] = g.angle;
        break;
      case GateSpec::Kind::Swap:
        gg["mode_a"] = mode_name(g.mode_a);
        gg["mode_b"] = mode_name(g.mode_b);
        break;
      case GateSpec::Kind::CustomUnitary:
        gg["payload"] = json::parse(eswap::to_json(*g.custom));
        break;
    }
    gates.push_back(gg);
  }
  j["gates"] = gates;
  return j.dump();
}

Circuit circuit_from_json(const std::string& text) {
  json j = json::parse(text);
  Circuit c;
  c.control_angle = j.at("control_angle").get<double>();
  c.bs_phase = j.value("bs_phase", 0.0);
  c.frame_phase_alice = j.value("frame_phase_alice", 0.0);
  c.frame_phase_bob = j.value("frame_phase_bob", 0.0);
  const auto& dims = j.at("dims");
  const auto& order = j.at("mode_order");
  for (size_t i = 0; i < dims.size(); ++i)
    c.spaces.push_back({dims[i].get<int>(), mode_from_name(order[i].get<std::string>())});
  for (const auto& gg : j.at("gates")) {
    std::string kind = gg.at("kind").get<std::string>();
    double duration = gg.at("duration").get<double>();
    if (kind == "beamsplitter") {
      auto g = GateSpec::beamsplitter(gg.at("theta").get<double>(),
                                      gg.at("phi").get<double>(), duration);
      g.mode_a = mode_from_name(gg.value("mode_a", std::string("alice")));
      g.mode_b = mode_from_name(gg.value("mode_b", std::string("bob")));
      c.gates.push_back(g);
    } else if (kind == "cps") {
      c.gates.push_back(
          GateSpec::cps(mode_from_name(gg.at("target").get<std::string>()), duration));
    } else if (kind == "rotation") {
      c.gates.push_back(GateSpec::rotation(axis_from_name(gg.at("axis").get<std::string>()),
                                           gg.at("angle").get<double>(), duration));
    } else if (kind == "swap") {
      c.gates.push_back(GateSpec::swap(mode_from_name(gg.at("mode_a").get<std::string>()),
                                       mode_from_name(gg.at("mode_b").get<std::string>()),
                                       duration));
    } else if (kind == "custom") {
      c.gates.push_back(GateSpec::custom_unitary(
          operator_from_json(gg.at("payload").dump()), duration));
    } else {
      throw CompileError("unknown gate kind in JSON: " + kind);
    }
  }
  return c;
}

}  // namespace eswap
