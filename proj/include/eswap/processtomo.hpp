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

#ifndef ESWAP_PROCESSTOMO_HPP
#define ESWAP_PROCESSTOMO_HPP

#include <array>
#include <optional>
#include <string>

#include "eswap/dynamics.hpp"
#include "eswap/encodings.hpp"
#include "eswap/tomography.hpp"

namespace eswap {

// Real 16x16 process matrix in the basis order II, IX, ..., ZZ acting on
// Pauli expectation vectors: p_out = R p_in.
struct PauliTransferMatrix {
  Eigen::MatrixXd entries{16, 16};
  std::string encoding_name;
};

// Complex process matrix in the two-qubit Pauli operator basis,
// E(rho) = sum_mn chi_mn P_m rho P_n.
struct ChiMatrix {
  Matrix entries{16, 16};

  double hermiticity_residual() const;
  double min_eigenvalue() const;
  double trace_real() const { return entries.trace().real(); }
};

// R[i][j] = (1/4) Tr(P_i E(P_j)) over the encoding's logical Paulis.
PauliTransferMatrix ptm_from_channel(const Channel& channel, const LogicalEncoding& enc);

// Same contraction for a plain unitary acting on the two cavities.
PauliTransferMatrix ptm_of_unitary(const Operator& u, const LogicalEncoding& enc);

// Linear inversion between the two process representations (exact on the
// logical algebra).
ChiMatrix chi_from_ptm(const PauliTransferMatrix& r);
PauliTransferMatrix ptm_from_chi(const ChiMatrix& chi, const std::string& encoding_name);

// chi extracted through the PTM; flags NonPhysical content by reporting the
// most negative eigenvalue rather than clipping it.
ChiMatrix chi_from_channel(const Channel& channel, const LogicalEncoding& enc);

struct ProcessFidelity {
  double value = 0.0;
  double imag_residual = 0.0;
};

// F = Tr(chi_ideal chi_measured); the ideal chi must be trace-normalized.
ProcessFidelity process_fidelity_chi(const ChiMatrix& measured, const ChiMatrix& ideal);

// Tr(R_ideal^T R_measured) / Tr(R_ideal^T R_ideal)
double ptm_overlap(const PauliTransferMatrix& measured, const PauliTransferMatrix& ideal);

extern const std::array<std::string, 16> kQptInputLabels;

struct QptOptions {
  bool sampled = false;
  long shots_per_point = 500;
  std::optional<std::uint64_t> seed;
  int reconstruction_cutoff = 0;  // 0: pick from the encoding
  // measurement contrast model: per-ancilla parity assignment errors
  double readout_error_a = 0.0;
  double readout_error_b = 0.0;
  bool allow_coherent = false;  // QPT runs on Fock and binomial by default
};

struct QptReport {
  PauliTransferMatrix ptm;
  PauliTransferMatrix ptm_ideal;
  ChiMatrix chi;
  ChiMatrix chi_ideal;
  double fidelity_chi = 0.0;
  double fidelity_chi_imag_residual = 0.0;
  double overlap_ptm = 0.0;
  double chi_min_eigenvalue = 0.0;
  std::vector<double> reconstruction_residuals;
  std::uint64_t seed = 0;
  std::string encoding_name;
  int reconstruction_cutoff = 0;
};

// The full pipeline: prepare the 16 inputs {0,1,+,+i}^2, push them through
// the channel, measure joint displaced parities (exact expectations or
// sampled shots), reconstruct each output state without a trace constraint,
// fit the PTM by least squares over the input/output Pauli vectors, and
// report both fidelity conventions against the ideal unitary.
QptReport run_qpt(const Channel& operation, const Operator& ideal_unitary,
                  const LogicalEncoding& enc, const QptOptions& options = {});

// Report serialization for manifests; PTM as CSV for plotting.
std::string to_json(const QptReport& report);
std::string to_csv(const PauliTransferMatrix& r);

}  // namespace eswap

#endif  // ESWAP_PROCESSTOMO_HPP
