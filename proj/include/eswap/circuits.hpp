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

#ifndef ESWAP_CIRCUITS_HPP
#define ESWAP_CIRCUITS_HPP

#include <memory>
#include <string>
#include <vector>

#include "eswap/fock.hpp"

namespace eswap {

// Default gate durations (seconds). The beamsplitter is the slow element;
// the ancilla only leaves |g> around the CPS/rotation block.
namespace durations {
inline constexpr double beamsplitter = 5.0e-6;
inline constexpr double cps = 0.5e-6;
inline constexpr double rotation = 50.0e-9;
}  // namespace durations

enum class Axis { X, Y, Z, Hadamard };

std::string axis_name(Axis a);
Axis axis_from_name(const std::string& name);

struct GateSpec {
  enum class Kind { BeamSplitter, CPS, AncillaRotation, Swap, CustomUnitary };

  Kind kind;
  double theta = 0.0;  // beamsplitter mixing angle, [0, pi]
  double phi = 0.0;    // beamsplitter phase
  Axis axis = Axis::X;
  double angle = 0.0;  // rotation angle (ignored for Hadamard)
  Mode target = Mode::Bob;  // CPS target cavity
  Mode mode_a = Mode::Alice, mode_b = Mode::Bob;  // Swap / BeamSplitter pair
  std::shared_ptr<Operator> custom;               // CustomUnitary payload
  double duration = 0.0;  // seconds, used only for noise scheduling

  static GateSpec beamsplitter(double theta, double phi,
                               double duration = durations::beamsplitter);
  static GateSpec cps(Mode target = Mode::Bob, double duration = durations::cps);
  static GateSpec rotation(Axis axis, double angle, double duration = durations::rotation);
  static GateSpec hadamard(double duration = durations::rotation);
  static GateSpec swap(Mode a, Mode b, double duration = durations::beamsplitter);
  static GateSpec custom_unitary(Operator op, double duration = 0.0);

  std::string kind_name() const;
};

struct Circuit {
  std::vector<GateSpec> gates;
  Spaces spaces;
  double control_angle = 0.0;
  // compiler conventions, recorded so the verification contract is explicit
  double bs_phase = 0.0;
  double frame_phase_alice = 0.0;
  double frame_phase_bob = 0.0;

  double total_duration() const;
};

struct EquivalenceReport {
  double distance = 0.0;  // max-norm after the optimal global phase
  double leakage = 0.0;   // max-norm of the ancilla e<-g block
  cxd phase{1.0, 0.0};    // fitted global phase
  bool pass = false;
};

// exp(-i theta (e^{i phi} a^dag b + e^{-i phi} a b^dag)); theta = pi/4 is a
// 50:50 beamsplitter, theta = pi/2 a full swap up to single-mode phases.
Operator beamsplitter_unitary(double theta, double phi, const ModeSpace& space_a,
                              const ModeSpace& space_b);

// |g><g| (x) I + |e><e| (x) exp(i pi n) on (ancilla, cavity).
Operator cps_unitary(const ModeSpace& ancilla, const ModeSpace& cavity);

// Permutation |m,n> -> |n,m>; cutoffs must match.
Operator swap_operator(const ModeSpace& space_a, const ModeSpace& space_b);

// exp(i theta_c SWAP) = cos(theta_c) I + i sin(theta_c) SWAP.
Operator eswap_ideal(double theta_c, const ModeSpace& space_a, const ModeSpace& space_b);

// |g><g| (x) I + |e><e| (x) SWAP on (ancilla, A, B).
Operator cswap_ideal(const ModeSpace& ancilla, const ModeSpace& space_a,
                     const ModeSpace& space_b);

// Single-gate unitary embedded in the circuit's full space.
Operator gate_unitary(const GateSpec& gate, const Spaces& spaces);

// Product of all gate unitaries in time order.
Operator circuit_unitary(const Circuit& circuit);

StateVector apply(const Circuit& circuit, const StateVector& psi);
DensityMatrix apply(const Circuit& circuit, const DensityMatrix& rho);

// The simplified sequence [BS, H, CPS, X(-2 theta_c), CPS, H, BS^dag]. The
// opening beamsplitter phase pi/2 closes the two-mode frame exactly, so the
// ancilla-|g> block of the product equals eswap_ideal(theta_c) with no
// residual phase frame. Verified at construction; throws CompileError.
Circuit compile_eswap(double theta_c, int cutoff_a = 8, int cutoff_b = 8);

// [BS, CPS, BS^dag] with the same phase convention; equals cswap_ideal with
// an identity phase frame. Verified at construction.
Circuit compile_fredkin(int cutoff_a = 8, int cutoff_b = 8);

// Compares the compiled circuit against a target. A target on the two
// cavities is checked against the ancilla-|g> input block (the ancilla is
// assumed to enter in |g>), and the e<-g leakage is reported; a target on the
// full space is compared directly. Distances are minimized over a global
// phase and restricted to input columns whose total photon number lies in a
// complete sector of the truncation; beamsplitters conserve total photon
// number, so only those columns are meaningful at finite cutoff.
EquivalenceReport verify_equivalence(const Circuit& circuit, const Operator& target,
                                     double tolerance = tol::phase_equivalence);

// Gate list serialization; parameters round-trip bit-exactly.
std::string to_json(const Circuit& circuit);
Circuit circuit_from_json(const std::string& text);

}  // namespace eswap

#endif  // ESWAP_CIRCUITS_HPP
