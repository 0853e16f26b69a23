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

#ifndef ESWAP_TOMOGRAPHY_HPP
#define ESWAP_TOMOGRAPHY_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "eswap/encodings.hpp"
#include "eswap/fock.hpp"

namespace eswap {

// One phase-space sample point; beta2 is absent for single-mode grids.
struct WignerPoint {
  cxd beta1;
  std::optional<cxd> beta2;
};

struct WignerGrid {
  std::vector<WignerPoint> points;
  std::vector<double> values;
  long shots_per_point = 0;       // 0 = exact expectation values
  bool parity_normalized = true;  // false: (2/pi) per mode
};

struct MeasurementRecord {
  struct Shot {
    long point_index;
    int parity_a;  // +1 / -1
    int parity_b;
  };
  std::vector<WignerPoint> points;
  std::vector<Shot> shots;
  std::uint64_t seed = 0;
  long shots_per_point = 0;
  double readout_error_a = 0.0, readout_error_b = 0.0;

  // per-point mean of the per-shot parity products
  std::vector<double> point_means() const;
};

// D(beta) P D(beta)^dag on one mode.
Operator displaced_parity(cxd beta, const ModeSpace& space);

// (2/pi) Tr[D P D^dag rho], or the bare parity expectation when
// parity_normalized is set.
double wigner_single(const DensityMatrix& rho_1mode, cxd beta,
                     bool parity_normalized = false);

// Joint displaced parity <D(b1) P_A D^dag (x) D(b2) P_B D^dag>,
// parity-normalized.
double joint_wigner(const DensityMatrix& rho_ab, cxd beta1, cxd beta2);

// Exact displaced-parity expectations over a point list.
std::vector<double> joint_parity_values(const DensityMatrix& rho_ab,
                                        const std::vector<std::pair<cxd, cxd>>& points);

// Per-shot +-1 pairs from the exact joint distribution of the two commuting
// displaced-parity observables, then independent readout flips. Requires a
// seed (SeedRequired otherwise) so runs are reproducible.
MeasurementRecord sample_parity_shots(const DensityMatrix& rho_ab,
                                      const std::vector<std::pair<cxd, cxd>>& points,
                                      long n_shots, double readout_err_a,
                                      double readout_err_b,
                                      std::optional<std::uint64_t> seed);

// Deterministic polar point set per mode (origin + rings), paired across the
// two modes; sized to over-determine a two-mode reconstruction at `cutoff`.
std::vector<std::pair<cxd, cxd>> reconstruction_point_set(int cutoff,
                                                          double radius_max = 2.45,
                                                          int nrings = 0,
                                                          int nangles = 0);

struct ReconstructionResult {
  DensityMatrix rho;
  double residual = 0.0;          // rms misfit of the solved linear model
  long effective_rank = 0;
  double clipped_magnitude = 0.0; // total negative weight removed
};

// Least-squares fit of a Hermitian, trace-unconstrained two-mode rho to
// measured displaced-parity values; positivity enforced afterwards by
// eigenvalue clipping. The design factorization is cached, so one
// reconstructor serves many solves on the same grid.
class WignerReconstructor {
 public:
  WignerReconstructor(std::vector<std::pair<cxd, cxd>> points, int cutoff,
                      double regularization = 0.0);

  ReconstructionResult solve(const std::vector<double>& values) const;
  std::vector<double> exact_values(const DensityMatrix& rho) const;

  long rank() const { return rank_; }
  long parameter_count() const { return long(dim_) * dim_; }
  const std::vector<std::pair<cxd, cxd>>& points() const { return points_; }
  const Spaces& spaces() const { return spaces_; }

 private:
  std::vector<std::pair<cxd, cxd>> points_;
  int cutoff_;
  long dim_;
  Spaces spaces_;
  std::vector<Matrix> point_ops_;
  Eigen::MatrixXd design_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  long rank_ = 0;
};

// Convenience wrapper for a one-off grid.
ReconstructionResult reconstruct_density_matrix(const WignerGrid& grid, int cutoff,
                                                double regularization = 0.0);

// Block assembly of the three-mode density matrix from the four ancilla
// conditionals. The |+> slot is the X eigenstate (|g>+|e>)/sqrt(2); by
// default the fourth slot is the Y eigenstate (|g>+i|e>)/sqrt(2), which is
// the convention the synthetic-channel oracle confirms. The literal
// (|g>-|e>)/sqrt(2) reading is kept behind the flag for comparison.
struct ThreeModeAssembly {
  DensityMatrix rho;
  double hermiticity_residual = 0.0;
};

ThreeModeAssembly assemble_three_mode(const DensityMatrix& e_gg, const DensityMatrix& e_ee,
                                      const DensityMatrix& e_pp, const DensityMatrix& e_mm);

// Exact ancilla conditionals <k|rho|k> of a three-mode state, ordered
// (g, e, +X, +Y) by default or (g, e, +X, -X) under the literal flag.
std::array<DensityMatrix, 4> ancilla_conditionals(const DensityMatrix& rho_full,
                                                  bool literal_minus_convention = false);

// 16-point joint-parity measurement plan for the coherent encoding plus the
// linear map from the 16 parity values to the 16 encoded correlators. The
// map is exact on the code space; leakage outside it is the only bias.
struct PauliPointsPlan {
  std::vector<std::pair<cxd, cxd>> points;
  Eigen::MatrixXd map;  // 16x16, correlators = map * parities

  CorrelatorSet correlators_from_parities(const std::vector<double>& parities) const;
};

PauliPointsPlan pauli_points_plan(const LogicalEncoding& encoding);

// --- persistence ---------------------------------------------------------------

std::string to_csv(const WignerGrid& grid);
WignerGrid wigner_grid_from_csv(const std::string& text);
std::string to_csv(const MeasurementRecord& record);
MeasurementRecord record_from_csv(const std::string& text);
std::string manifest_json(const MeasurementRecord& record);

}  // namespace eswap

#endif  // ESWAP_TOMOGRAPHY_HPP
