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

#ifndef ESWAP_DYNAMICS_HPP
#define ESWAP_DYNAMICS_HPP

#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Sparse>

#include "eswap/circuits.hpp"
#include "eswap/fock.hpp"

namespace eswap {

using SpMat = Eigen::SparseMatrix<cxd>;

// Coherence and coupling parameters. Defaults are the midpoints of the
// reported device ranges: qB T1 = 75 us, T2 = 30 us, Alice T1 = 250 us,
// Bob T1 = 325 us, chi(qB,Bob)/2pi = 1.26 MHz, K_A/2pi = 6 kHz,
// K_B/2pi = 4 kHz.
struct NoiseModel {
  double t1_alice = 250e-6;
  double t1_bob = 325e-6;
  double t1_q = 75e-6;
  double t2_q = 30e-6;
  double kerr_alice = 2.0 * 3.14159265358979323846 * 6e3;  // rad/s
  double kerr_bob = 2.0 * 3.14159265358979323846 * 4e3;    // rad/s
  double chi_qb_bob = 2.0 * 3.14159265358979323846 * 1.26e6;  // rad/s
  double n_th_alice = 0.0;
  double n_th_bob = 0.0;
  double n_th_q = 0.0;
  // per-ancilla parity readout assignment error (readout, parity mapping and
  // rotation imperfections combined)
  double readout_error_a = 0.02;
  double readout_error_b = 0.02;
  // gate imperfection knobs
  double cps_phase_error = 0.0;          // fractional error on the pi phase
  double rotation_angle_error = 0.0;     // fractional error on rotation angles
  double qc_heating_prob_per_bs = 0.01;  // dephasing-kick probability per BS
  double bs_loss_enhancement = 1.0;      // drive-induced cavity loss factor
  double bs_dephasing_enhancement = 1.0; // drive-induced transmon dephasing factor
  // Effective cavity-loss exposure per eSWAP schedule. The reported budget
  // quotes 3.9 us per cavity, well below the naive schedule sum; the channel
  // builder scales the loss rates accordingly. <= 0 disables the scaling.
  double loss_exposure_us = 3.9;

  double gamma_alice() const { return 1.0 / t1_alice; }
  double gamma_bob() const { return 1.0 / t1_bob; }
  double gamma_q() const { return 1.0 / t1_q; }
  // pure dephasing rate, 1/T2 - 1/(2 T1) >= 0
  double gamma_phi_q() const;

  void validate() const;  // throws ConfigError on inconsistent values

  static NoiseModel table_defaults() { return NoiseModel{}; }
  static NoiseModel noiseless();
};

// One scheduled gate plus the integrator step used for it.
struct PulseSchedule {
  struct Entry {
    GateSpec gate;
    double duration;  // seconds
    double dt;        // seconds, <= duration/50
  };
  std::vector<Entry> entries;

  double total_duration() const;
  void validate() const;

  // dt = min(duration/divisor, 1/(50 f_max)) per gate, f_max estimated from
  // the gate generator, the dispersive shift and the Kerr terms.
  static PulseSchedule from_circuit(const Circuit& circuit, const NoiseModel& noise,
                                    int divisor = 200);
};

// Fixed-step RK4 integration of
//   d rho/dt = -i[H, rho] + sum_k (L rho L^dag - 1/2 {L^dag L, rho}).
// The first step is error-checked by step doubling; StepTooLarge if the
// local estimate exceeds 1e-6.
DensityMatrix lindblad_evolve(const DensityMatrix& rho, const Operator& h,
                              const std::vector<Operator>& collapse_ops, double t,
                              double dt);

// Rotating-frame bilinear drive H(t) = g e^{i delta t} a b^dag + h.c.
struct DrivenBsHamiltonian {
  Operator hop;  // a b^dag embedded in the working space
  double g = 0.0;
  double delta = 0.0;  // rad/s
};

DrivenBsHamiltonian driven_bs_hamiltonian(double g, double delta, const Spaces& spaces);

DensityMatrix lindblad_evolve_driven(const DensityMatrix& rho,
                                     const DrivenBsHamiltonian& h,
                                     const std::vector<Operator>& collapse_ops, double t,
                                     double dt);

// exp(-i t (K_A/2) n_A(n_A-1)) (x) exp(-i t (K_B/2) n_B(n_B-1))
Operator kerr_unitary(double kerr_a, double kerr_b, double t, const ModeSpace& space_a,
                      const ModeSpace& space_b);

// Completely positive map on the two cavities. The lazy (schedule) form
// wraps the ancilla internally: apply() embeds |g><g|, runs every step on
// the three-mode space and traces the ancilla back out.
class Channel {
 public:
  struct LindbladSegment {
    SpMat drift;       // -iH - 1/2 sum L^dag L
    SpMat drift_dag;
    std::vector<SpMat> ls, ldags;
    // optional rotating drive pair added to the Hamiltonian
    SpMat hop, hop_dag;
    bool has_drive = false;
    double drive_delta = 0.0;
    cxd drive_amp{0.0, 0.0};
    double duration = 0.0;
    double dt = 0.0;
    bool ancilla_active = false;  // ancilla may be off |g> during this segment
    bool cavity_only = false;     // generator acts trivially on the ancilla
    // restricted copy on the ancilla-|g> block, set by the builder when the
    // segment is cavity_only; lets long beamsplitters run at quarter cost
    // while the ancilla is still deterministically in |g>
    std::shared_ptr<LindbladSegment> gblock;
  };
  struct KrausStep {
    std::vector<Matrix> ops;  // full-space Kraus operators
    bool cavity_only = false;
  };
  struct UnitaryStep {
    Matrix u;  // instantaneous frame correction
    bool cavity_only = false;
  };
  // Gaussian phase diffusion per cavity (rho_nm *= e^{-lambda (n-m)^2 / 2})
  // plus an optional joint photon-number dephasing kick of probability p.
  struct DephasingStep {
    double lambda_alice = 0.0;
    double lambda_bob = 0.0;
    double p_joint = 0.0;
    bool cavity_only = true;
  };

  static Channel identity(const Spaces& cavity_spaces);
  static Channel from_kraus(std::vector<Matrix> ops, const Spaces& cavity_spaces);
  static Channel from_superoperator(Matrix super, const Spaces& cavity_spaces,
                                    bool trace_preserving);
  static Channel from_unitary(const Operator& u);

  // rho on the cavity spaces; the ancilla starts in |g> and is traced out.
  DensityMatrix apply(const DensityMatrix& rho) const;
  // full three-mode input/output (only for schedule-backed channels)
  DensityMatrix apply_keep_ancilla(const DensityMatrix& rho_full) const;

  Channel then(const Channel& next) const;  // composition, this first

  // Materializes the column-major-vec superoperator by applying the channel
  // to matrix units; intended for small spaces.
  Matrix to_superoperator() const;
  Matrix choi_matrix() const;
  // Throws CPViolation / ConfigError when the Choi negativity or the trace
  // defect exceed the tolerances.
  void check_cp_tp(double cp_tol = 1e-6, double tp_tol = 1e-8) const;

  double ancilla_exposure() const;  // seconds with the ancilla off |g>

  const Spaces& cavity_spaces() const { return cavity_spaces_; }
  const Spaces& full_spaces() const { return full_spaces_; }
  bool trace_preserving_flag = true;

  // building blocks (used by the channel builders)
  void push_segment(LindbladSegment seg) { steps_.push_back(Step{std::move(seg)}); }
  void push_kraus(KrausStep k) { steps_.push_back(Step{std::move(k)}); }
  void push_unitary(UnitaryStep u) { steps_.push_back(Step{std::move(u)}); }
  void push_dephasing(DephasingStep d) { steps_.push_back(Step{std::move(d)}); }
  void set_spaces(Spaces cavity, Spaces full, bool wraps_ancilla);

 private:
  struct Step {
    std::variant<LindbladSegment, KrausStep, UnitaryStep, DephasingStep> payload;
  };
  Spaces cavity_spaces_, full_spaces_;
  bool wraps_ancilla_ = false;
  std::vector<Step> steps_;
  std::optional<Matrix> super_;  // explicit superoperator representation
  // sequential pair for compositions that cannot be merged step-wise
  std::shared_ptr<std::pair<Channel, Channel>> composed_;

  Matrix run_steps(Matrix rho_full, bool ancilla_pure_g) const;
};

struct ChannelBuildOptions {
  int dt_divisor = 200;
  // >= 1 enables the drive-calibration counterterm: the linear-in-n part of
  // the Kerr phase rate, fitted over n = 0..kerr_frame_nmax, is subtracted
  // from the Hamiltonian, modeling a drive frequency tracked to the mean
  // Kerr-induced detuning of the code states.
  int kerr_frame_nmax = 0;
  // multiplies the cavity loss rates (effective-exposure accounting)
  double cavity_loss_scale = 1.0;
  // multiplies the in-circuit self-Kerr rates over the same window
  double kerr_scale = 1.0;
};

// Per-gate Lindblad evolution of the compiled circuit: the ideal gate
// generator plus always-on decay, dephasing and Kerr, the dispersive shift
// inside CPS gates, the fractional miscalibration knobs, and the heating
// kick after each beamsplitter. Supports BeamSplitter, CPS and
// AncillaRotation gates.
Channel noisy_channel_of_circuit(const Circuit& circuit, const NoiseModel& noise,
                                 const PulseSchedule& schedule,
                                 const ChannelBuildOptions& options = {});

// Driven conditional SWAP (the Fredkin realization): the drive is resonant
// for one ancilla branch and detuned by chi for the other. The residual
// deterministic mode phases of the resonant branch are calibrated away so
// the noiseless limit approaches cswap_ideal up to the finite-detuning
// leakage that is part of the physics.
struct CswapOptions {
  double duration = 5e-6;
  bool resonant_branch_e = true;  // drive tuned to swap when the ancilla is |e>
  int dt_divisor = 200;
};

Channel noisy_cswap_channel(const NoiseModel& noise, int cutoff_a, int cutoff_b,
                            const CswapOptions& options = {});

// Conditional-resonance spectroscopy: transfer probability |0,1> -> |1,0>
// against drive detuning and duration, per ancilla branch.
struct ChevronMap {
  std::vector<double> detunings_hz;
  std::vector<double> durations_s;
  Eigen::MatrixXd transfer_g;    // rows: durations, cols: detunings
  Eigen::MatrixXd transfer_e;
  Eigen::MatrixXd transfer_avg;
  double separation_hz = 0.0;    // fitted distance between the two resonances
  double max_transfer = 0.0;
};

ChevronMap simulate_cswap_spectroscopy(const std::vector<double>& detunings_hz,
                                       const std::vector<double>& durations_s,
                                       const NoiseModel& noise, double g_rad = 0.0);

}  // namespace eswap

#endif  // ESWAP_DYNAMICS_HPP
