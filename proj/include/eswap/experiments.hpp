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

#ifndef ESWAP_EXPERIMENTS_HPP
#define ESWAP_EXPERIMENTS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "eswap/dynamics.hpp"
#include "eswap/processtomo.hpp"

namespace eswap {

inline constexpr const char* kCodeVersion = "eswapsim 0.1.0";

// State-preparation error model: per-cavity photon loss plus Gaussian number
// dephasing, calibrated per encoding to reproduce the encode-only process
// fidelity; measurement error enters separately as parity contrast.
struct SpamConfig {
  bool enabled = true;
  double prep_loss = 0.0;
  double prep_dephasing = 0.0;

  static SpamConfig defaults_for(const std::string& encoding);
};

struct GridSpec {
  int n = 21;
  double extent = 2.5;
  std::vector<std::string> planes = {"re_re", "im_im"};
};

struct ScheduleConfig {
  double t_bs_us = 5.0;
  double t_cps_us = 0.5;
  double t_rot_us = 0.05;
  int dt_divisor = 200;
};

struct BudgetConfig {
  // Effective photon-loss exposure. The reported budget quotes 3.9 us of
  // exposure per cavity, which is not the naive schedule sum; it stays a
  // config input here.
  double exposure_us = 3.9;
  std::vector<std::string> mechanisms = {"qc_heating", "photon_loss", "self_kerr",
                                         "cps_miscalibration", "ancilla_rotation"};
  double theta = 0.7853981633974483;  // pi/4
  double cps_phase_error = 0.02;
  double rotation_angle_error = 0.01;
  double qc_heating_prob_per_bs = 0.01;
};

struct FredkinConfig {
  double duration_us = 5.0;
  bool resonant_branch_e = true;
  double conditional_readout_error = 0.03;
  // spectroscopy grid
  double detuning_span_mhz = 2.2;
  int detuning_points = 45;
  double duration_max_us = 10.0;
  int duration_points = 21;
};

struct ExperimentConfig {
  std::string experiment;
  std::string encoding = "fock";
  double alpha = 1.41;
  std::vector<double> thetas;
  std::string mode = "exact";  // exact | sampled
  long shots_per_point = 500;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = "out";
  int cutoff_alice = 0;  // 0: per-experiment default
  int cutoff_bob = 0;
  GridSpec grid;
  bool noise_enabled = true;
  NoiseModel noise;
  SpamConfig spam;
  ScheduleConfig schedule;
  BudgetConfig budget;
  FredkinConfig fredkin;

  void validate() const;
};

// Strict parse: unknown keys anywhere raise ConfigError.
ExperimentConfig config_from_json(const std::string& text);
std::string to_json(const ExperimentConfig& config);
ExperimentConfig default_config(const std::string& experiment);

struct RunManifest {
  std::string config_hash;
  std::string code_version = kCodeVersion;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  std::vector<std::string> outputs;  // paths relative to out_dir
};

struct ExperimentResult {
  RunManifest manifest;
  std::string summary_json;
  bool ok = false;
};

// FNV-1a over the canonical (sorted-key) config JSON.
std::string config_hash(const ExperimentConfig& config);

// Dispatches on config.experiment: fock_demo, coherent_sweep, qpt, fredkin,
// kerr, error_budget. Writes every artifact under config.out_dir and echoes
// the resolved config into the manifest.
ExperimentResult run_experiment(const ExperimentConfig& config);

// --- building blocks shared by the runners and the acceptance suite -----------

// Per-cavity loss + dephasing Kraus channel on the cavity pair.
Channel spam_prep_channel(const SpamConfig& spam, const Spaces& cavity_spaces);

// Compiled eSWAP circuit with config durations, wrapped in the Lindblad
// engine; SPAM preparation is prepended when enabled.
Channel build_noisy_eswap(double theta_c, const ExperimentConfig& config, int cutoff);

// Joint parity contrast (1-2e_A)(1-2e_B) from the noise model, or 1 when
// SPAM is disabled.
double measurement_contrast(const ExperimentConfig& config);

struct BudgetRow {
  std::string mechanism;
  std::string encoding;
  double infidelity = 0.0;
};

// Per-mechanism QPT infidelities at budget.theta plus the all-on total.
std::vector<BudgetRow> error_budget(const ExperimentConfig& config);

}  // namespace eswap

#endif  // ESWAP_EXPERIMENTS_HPP
