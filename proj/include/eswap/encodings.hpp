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

#ifndef ESWAP_ENCODINGS_HPP
#define ESWAP_ENCODINGS_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "eswap/fock.hpp"

namespace eswap {

// Single-cavity logical qubit. Codewords are stored as amplitude vectors at
// a fixed cutoff and re-labelled onto Alice or Bob on demand.
//
// Conventions: Fock {|0>, |1>}; coherent codeword0 = |-alpha>, codeword1 =
// |+alpha> (non-orthogonal, overlap e^{-2 alpha^2}); binomial level-1
// codeword0 = (|0>+|4>)/sqrt(2), codeword1 = |2>, both with nbar = 2.
struct LogicalEncoding {
  std::string name;  // "fock" | "coherent" | "binomial"
  int cutoff = 0;
  double alpha = 0.0;       // coherent amplitude, when applicable
  bool orthogonalized = true;  // false for the raw coherent codewords
  double nbar = 0.0;        // mean photon number averaged over the codewords
  Vector cw0, cw1;          // raw codewords, normalized
  Vector basis0, basis1;    // orthonormal logical basis (Loewdin pair for
                            // the coherent encoding, the codewords otherwise)

  StateVector codeword(int which, Mode label) const;
  StateVector basis_state(int which, Mode label) const;
  // |0̃><0̃| + |1̃><1̃| on one cavity
  Operator code_projector(Mode label) const;
};

// name: "fock" | "coherent" | "binomial"; alpha applies to "coherent".
LogicalEncoding make_encoding(const std::string& name, int cutoff, double alpha = 1.41);

// Two-qubit logical product state on Alice (x) Bob. Labels are two characters
// from {0, 1, +, -, i, j} with i = +i and j = -i eigenstates; superpositions
// of non-orthogonal codewords are renormalized.
StateVector encode_two_qubit(const LogicalEncoding& enc, const std::string& label);

// Bloch-angle version: per qubit, cos(t/2)|0_L> + e^{i p} sin(t/2)|1_L>.
StateVector encode_two_qubit(const LogicalEncoding& enc,
                             const std::array<double, 2>& bloch_theta,
                             const std::array<double, 2>& bloch_phi);

// Single-qubit logical Paulis {I, X, Y, Z} embedded in one cavity. I is the
// code-space projector, not the cavity identity.
std::array<Operator, 4> logical_pauli_single(const LogicalEncoding& enc, Mode label);

// The 16 two-qubit Paulis in the basis order II, IX, IY, IZ, XI, ..., ZZ.
std::array<Operator, 16> logical_pauli_operators(const LogicalEncoding& enc);

extern const std::array<std::string, 16> kPauliLabels;
int pauli_index(const std::string& label);

struct CorrelatorSet {
  std::array<double, 16> values{};

  double operator[](const std::string& label) const { return values[pauli_index(label)]; }
};

// Tr(rho P_i (x) P_j) for all 16 labels.
CorrelatorSet correlators(const DensityMatrix& rho_ab, const LogicalEncoding& enc);

// (1/4) (<II> - <XY> + <YX> - <ZZ>)
double direct_fidelity_estimate(const CorrelatorSet& c);

// rho_in -> rho_out channel parameterized by the control angle.
using ThetaChannel = std::function<DensityMatrix(double theta_c, const DensityMatrix&)>;

// Noiseless conjugation by eswap_ideal at the encoding's cutoff.
ThetaChannel ideal_eswap_channel(int cutoff);

struct SweepRow {
  double theta_c;
  double ii, zz, iz, zi, xy, yx;
};

// Applies the channel to the encoded "01" input for every angle and tabulates
// the six correlators of interest.
std::vector<SweepRow> theta_sweep(const LogicalEncoding& enc,
                                  const std::vector<double>& theta_list,
                                  const ThetaChannel& channel);

// Encoding metadata and codeword amplitudes for reproducibility manifests.
std::string to_json(const LogicalEncoding& enc);

}  // namespace eswap

#endif  // ESWAP_ENCODINGS_HPP
