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

#ifndef ESWAP_FOCK_HPP
#define ESWAP_FOCK_HPP

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eswap/errors.hpp"

namespace eswap {

using cxd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Default numeric tolerance ledger, shared by all modules.
namespace tol {
inline constexpr double unitarity = 1e-9;
inline constexpr double hermiticity = 1e-10;
inline constexpr double phase_equivalence = 1e-8;
}  // namespace tol

// The three physical modes. Canonical tensor order is always
// (ancilla, Alice, Bob); every kron, embed and reshape relies on it.
enum class Mode { Ancilla = 0, Alice = 1, Bob = 2 };

std::string mode_name(Mode m);
Mode mode_from_name(const std::string& name);

struct ModeSpace {
  int cutoff;  // photon-number truncation, >= 2; ancilla is exactly 2
  Mode label;

  bool operator==(const ModeSpace&) const = default;
};

ModeSpace ancilla_space();
ModeSpace alice_space(int cutoff);
ModeSpace bob_space(int cutoff);

using Spaces = std::vector<ModeSpace>;

long dim_of(const Spaces& spaces);
bool same_spaces(const Spaces& a, const Spaces& b);
// Throws SpaceMismatch unless `spaces` is nonempty, canonically ordered
// (ancilla < Alice < Bob) without repeats, and every cutoff is valid.
void check_spaces(const Spaces& spaces);

struct Operator {
  Matrix m;
  Spaces spaces;

  long dim() const { return m.rows(); }
  Operator dagger() const { return {m.adjoint(), spaces}; }
  bool is_hermitian(double tolerance = tol::hermiticity) const;
  bool is_unitary(double tolerance = tol::unitarity) const;
};

struct StateVector {
  Vector v;
  Spaces spaces;

  long dim() const { return v.size(); }
  double norm() const { return v.norm(); }
  StateVector normalized() const;
};

struct DensityMatrix {
  Matrix m;
  Spaces spaces;

  long dim() const { return m.rows(); }
  double trace_real() const { return m.trace().real(); }
  double hermiticity_residual() const;
  double min_eigenvalue() const;
};

// --- construction -----------------------------------------------------------

Operator identity(const Spaces& spaces);
Operator zero_operator(const Spaces& spaces);

// <n-1|a|n> = sqrt(n) on one mode.
Operator annihilation(const ModeSpace& space);
Operator creation(const ModeSpace& space);
Operator number_operator(const ModeSpace& space);
// diag((-1)^n)
Operator parity_operator(const ModeSpace& space);

// exp(beta a^dag - conj(beta) a) on the truncated space. Emits a
// TruncationWarning when cutoff < 4|beta|^2 + 10.
Operator displacement(cxd beta, const ModeSpace& space);

// Fock basis state |n> of one mode.
StateVector fock_state(int n, const ModeSpace& space);
// Truncated coherent state, renormalized on the truncated space; same guard
// as displacement.
StateVector coherent_state(cxd alpha, const ModeSpace& space);

// --- composition ------------------------------------------------------------

// Kronecker product in the listed order; mode labels must be disjoint and
// canonically ordered across the result.
Operator tensor(const std::vector<Operator>& ops);
StateVector tensor(const std::vector<StateVector>& states);

// Pads `op` with identities on the modes of `full` it does not act on,
// preserving canonical order. Throws SpaceMismatch if op's modes are not a
// sublist of `full` with matching cutoffs.
Operator embed(const Operator& op, const Spaces& full);

Operator mul(const Operator& a, const Operator& b);
StateVector apply(const Operator& op, const StateVector& psi);
DensityMatrix apply(const Operator& op, const DensityMatrix& rho);

DensityMatrix to_density(const StateVector& psi);
cxd inner(const StateVector& a, const StateVector& b);
cxd expectation(const Operator& op, const StateVector& psi);
cxd expectation(const Operator& op, const DensityMatrix& rho);

// Trace out every mode not in `keep` (labels listed in canonical order).
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<Mode>& keep);

// --- matrix functions and metrics -------------------------------------------

// exp(scale * h). Hermitian and anti-Hermitian generators go through the
// eigendecomposition; anything else falls back to scaling-and-squaring.
// Throws NonFinite if the result overflows.
Operator expm(const Operator& h, cxd scale = cxd(1.0, 0.0));

// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2; for a pure sigma
// this reduces to <psi|rho|psi>.
double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
double state_fidelity(const DensityMatrix& rho, const StateVector& psi);
double state_fidelity(const StateVector& a, const StateVector& b);

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

// max_ij |a - b| after minimizing over a global phase on `a`.
double phase_distance(const Matrix& a, const Matrix& b);

// --- serialization -----------------------------------------------------------
// Schema: {"dims": [...], "re": [...], "im": [...], "mode_order": [...]} with
// row-major matrix entries.

std::string to_json(const Operator& op);
std::string to_json(const StateVector& psi);
std::string to_json(const DensityMatrix& rho);
Operator operator_from_json(const std::string& text);
StateVector state_from_json(const std::string& text);
DensityMatrix density_from_json(const std::string& text);

}  // namespace eswap

#endif  // ESWAP_FOCK_HPP
