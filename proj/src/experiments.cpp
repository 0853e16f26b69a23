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

#include "eswap/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eswap/parallel.hpp"
#include "eswap/tomography.hpp"

namespace eswap {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {
constexpr double kPi = std::numbers::pi;
const cxd kI{0.0, 1.0};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

SpamConfig SpamConfig::defaults_for(const std::string& encoding) {
  SpamConfig s;
  s.enabled = true;
  if (encoding == "fock") {
    s.prep_loss = 0.017;
    s.prep_dephasing = 0.058;
  } else if (encoding == "binomial") {
    s.prep_loss = 0.022;
    s.prep_dephasing = 0.012;
  } else if (encoding == "coherent") {
    s.prep_loss = 0.020;
    s.prep_dephasing = 0.045;
  } else {
    throw EncodingUnsupported("no SPAM defaults for encoding " + encoding);
  }
  return s;
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> kExperiments = {
      "fock_demo", "coherent_sweep", "qpt", "fredkin", "kerr", "error_budget"};
  if (!kExperiments.count(experiment))
    throw ConfigError("unknown experiment: " + experiment);
  if (mode != "exact" && mode != "sampled") throw ConfigError("mode must be exact|sampled");
  if (mode == "sampled" && !seed_set)
    throw SeedRequired("sampled mode needs an explicit seed");
  if (shots_per_point < 1) throw ConfigError("shots_per_point must be >= 1");
  if (grid.n < 2) throw ConfigError("grid.n must be >= 2");
  if (grid.extent <= 0) throw ConfigError("grid.extent must be positive");
  for (double t : thetas)
    if (t < -kPi - 1e-12 || t > kPi + 1e-12)
      throw ConfigError("theta_c outside [-pi, pi]");
  for (const auto& p : grid.planes)
    if (p != "re_re" && p != "im_im") throw ConfigError("unknown plane: " + p);
  noise.validate();
  if (spam.prep_loss < 0 || spam.prep_loss > 0.5 || spam.prep_dephasing < 0)
    throw ConfigError("spam parameters out of range");
  if (schedule.t_bs_us <= 0 || schedule.t_cps_us <= 0 || schedule.t_rot_us <= 0)
    throw ConfigError("gate durations must be positive");
  if (schedule.dt_divisor < 50) throw ConfigError("dt_divisor must be >= 50");
}

// --- JSON --------------------------------------------------------------------

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown config key '" + it.key() + "' in " + where);
}

NoiseModel noise_from_json(const json& j, bool* enabled) {
  reject_unknown(j,
                 {"enabled", "T1_Alice_us", "T1_Bob_us", "T1_qB_us", "T2_qB_us",
                  "K_A_kHz", "K_B_kHz", "chi_qB_Bob_MHz", "n_th_Alice", "n_th_Bob",
                  "n_th_qB", "readout_error_qA", "readout_error_qB",
                  "qc_heating_prob_per_bs", "cps_phase_error", "rotation_angle_error",
                  "bs_loss_enhancement", "bs_dephasing_enhancement", "loss_exposure_us"},
                 "noise");
  NoiseModel n;
  *enabled = j.value("enabled", true);
  n.t1_alice = j.value("T1_Alice_us", 250.0) * 1e-6;
  n.t1_bob = j.value("T1_Bob_us", 325.0) * 1e-6;
  n.t1_q = j.value("T1_qB_us", 75.0) * 1e-6;
  n.t2_q = j.value("T2_qB_us", 30.0) * 1e-6;
  n.kerr_alice = 2 * kPi * j.value("K_A_kHz", 6.0) * 1e3;
  n.kerr_bob = 2 * kPi * j.value("K_B_kHz", 4.0) * 1e3;
  n.chi_qb_bob = 2 * kPi * j.value("chi_qB_Bob_MHz", 1.26) * 1e6;
  n.n_th_alice = j.value("n_th_Alice", 0.0);
  n.n_th_bob = j.value("n_th_Bob", 0.0);
  n.n_th_q = j.value("n_th_qB", 0.0);
  n.readout_error_a = j.value("readout_error_qA", 0.02);
  n.readout_error_b = j.value("readout_error_qB", 0.02);
  n.qc_heating_prob_per_bs = j.value("qc_heating_prob_per_bs", 0.01);
  n.cps_phase_error = j.value("cps_phase_error", 0.0);
  n.rotation_angle_error = j.value("rotation_angle_error", 0.0);
  n.bs_loss_enhancement = j.value("bs_loss_enhancement", 1.0);
  n.bs_dephasing_enhancement = j.value("bs_dephasing_enhancement", 1.0);
  n.loss_exposure_us = j.value("loss_exposure_us", 3.9);
  return n;
}

json noise_to_json(const NoiseModel& n, bool enabled) {
  json j;
  j["enabled"] = enabled;
  j["T1_Alice_us"] = n.t1_alice * 1e6;
  j["T1_Bob_us"] = n.t1_bob * 1e6;
  j["T1_qB_us"] = n.t1_q * 1e6;
  j["T2_qB_us"] = n.t2_q * 1e6;
  j["K_A_kHz"] = n.kerr_alice / (2 * kPi * 1e3);
  j["K_B_kHz"] = n.kerr_bob / (2 * kPi * 1e3);
  j["chi_qB_Bob_MHz"] = n.chi_qb_bob / (2 * kPi * 1e6);
  j["n_th_Alice"] = n.n_th_alice;
  j["n_th_Bob"] = n.n_th_bob;
  j["n_th_qB"] = n.n_th_q;
  j["readout_error_qA"] = n.readout_error_a;
  j["readout_error_qB"] = n.readout_error_b;
  j["qc_heating_prob_per_bs"] = n.qc_heating_prob_per_bs;
  j["cps_phase_error"] = n.cps_phase_error;
  j["rotation_angle_error"] = n.rotation_angle_error;
  j["bs_loss_enhancement"] = n.bs_loss_enhancement;
  j["bs_dephasing_enhancement"] = n.bs_dephasing_enhancement;
  j["loss_exposure_us"] = n.loss_exposure_us;
  return j;
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  json j = json::parse(text);
  reject_unknown(j,
                 {"experiment", "encoding", "alpha", "thetas", "mode", "shots_per_point",
                  "seed", "out_dir", "cutoffs", "grid", "noise", "spam", "schedule",
                  "budget", "fredkin"},
                 "top level");
  std::string experiment = j.at("experiment").get<std::string>();
  ExperimentConfig c = default_config(experiment);
  if (j.contains("encoding")) {
    c.encoding = j["encoding"].get<std::string>();
    c.spam = SpamConfig::defaults_for(c.encoding);
  }
  if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
  if (j.contains("thetas")) c.thetas = j["thetas"].get<std::vector<double>>();
  if (j.contains("mode")) c.mode = j["mode"].get<std::string>();
  if (j.contains("shots_per_point")) c.shots_per_point = j["shots_per_point"].get<long>();
  if (j.contains("seed")) {
    c.seed = j["seed"].get<std::uint64_t>();
    c.seed_set = true;
  }
  if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("cutoffs")) {
    reject_unknown(j["cutoffs"], {"ancilla", "alice", "bob"}, "cutoffs");
    if (j["cutoffs"].contains("ancilla") && j["cutoffs"]["ancilla"].get<int>() != 2)
      throw ConfigError("the ancilla cutoff is fixed at 2");
    c.cutoff_alice = j["cutoffs"].value("alice", c.cutoff_alice);
    c.cutoff_bob = j["cutoffs"].value("bob", c.cutoff_bob);
  }
  if (j.contains("grid")) {
    reject_unknown(j["grid"], {"n", "extent", "planes"}, "grid");
    c.grid.n = j["grid"].value("n", c.grid.n);
    c.grid.extent = j["grid"].value("extent", c.grid.extent);
    if (j["grid"].contains("planes"))
      c.grid.planes = j["grid"]["planes"].get<std::vector<std::string>>();
  }
  if (j.contains("noise")) {
    bool enabled = true;
    c.noise = noise_from_json(j["noise"], &enabled);
    c.noise_enabled = enabled;
  }
  if (j.contains("spam")) {
    reject_unknown(j["spam"], {"enabled", "prep_loss", "prep_dephasing"}, "spam");
    c.spam.enabled = j["spam"].value("enabled", c.spam.enabled);
    c.spam.prep_loss = j["spam"].value("prep_loss", c.spam.prep_loss);
    c.spam.prep_dephasing = j["spam"].value("prep_dephasing", c.spam.prep_dephasing);
  }
  if (j.contains("schedule")) {
    reject_unknown(j["schedule"], {"t_bs_us", "t_cps_us", "t_rot_us", "dt_divisor"},
                   "schedule");
    c.schedule.t_bs_us = j["schedule"].value("t_bs_us", c.schedule.t_bs_us);
    c.schedule.t_cps_us = j["schedule"].value("t_cps_us", c.schedule.t_cps_us);
    c.schedule.t_rot_us = j["schedule"].value("t_rot_us", c.schedule.t_rot_us);
    c.schedule.dt_divisor = j["schedule"].value("dt_divisor", c.schedule.dt_divisor);
  }
  if (j.contains("budget")) {
    reject_unknown(j["budget"],
                   {"exposure_us", "mechanisms", "theta", "cps_phase_error",
                    "rotation_angle_error", "qc_heating_prob_per_bs"},
                   "budget");
    c.budget.exposure_us = j["budget"].value("exposure_us", c.budget.exposure_us);
    if (j["budget"].contains("mechanisms"))
      c.budget.mechanisms = j["budget"]["mechanisms"].get<std::vector<std::string>>();
    c.budget.theta = j["budget"].value("theta", c.budget.theta);
    c.budget.cps_phase_error =
        j["budget"].value("cps_phase_error", c.budget.cps_phase_error);
    c.budget.rotation_angle_error =
        j["budget"].value("rotation_angle_error", c.budget.rotation_angle_error);
    c.budget.qc_heating_prob_per_bs =
        j["budget"].value("qc_heating_prob_per_bs", c.budget.qc_heating_prob_per_bs);
  }
  if (j.contains("fredkin")) {
    reject_unknown(j["fredkin"],
                   {"duration_us", "resonant_branch_e", "conditional_readout_error",
                    "detuning_span_mhz", "detuning_points", "duration_max_us",
                    "duration_points"},
                   "fredkin");
    c.fredkin.duration_us = j["fredkin"].value("duration_us", c.fredkin.duration_us);
    c.fredkin.resonant_branch_e =
        j["fredkin"].value("resonant_branch_e", c.fredkin.resonant_branch_e);
    c.fredkin.conditional_readout_error = j["fredkin"].value(
        "conditional_readout_error", c.fredkin.conditional_readout_error);
    c.fredkin.detuning_span_mhz =
        j["fredkin"].value("detuning_span_mhz", c.fredkin.detuning_span_mhz);
    c.fredkin.detuning_points =
        j["fredkin"].value("detuning_points", c.fredkin.detuning_points);
    c.fredkin.duration_max_us =
        j["fredkin"].value("duration_max_us", c.fredkin.duration_max_us);
    c.fredkin.duration_points =
        j["fredkin"].value("duration_points", c.fredkin.duration_points);
  }
  c.validate();
  return c;
}

std::string to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["encoding"] = c.encoding;
  j["alpha"] = c.alpha;
  j["thetas"] = c.thetas;
  j["mode"] = c.mode;
  j["shots_per_point"] = c.shots_per_point;
  if (c.seed_set) j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["cutoffs"] = {{"ancilla", 2}, {"alice", c.cutoff_alice}, {"bob", c.cutoff_bob}};
  j["grid"] = {{"n", c.grid.n}, {"extent", c.grid.extent}, {"planes", c.grid.planes}};
  j["noise"] = noise_to_json(c.noise, c.noise_enabled);
  j["spam"] = {{"enabled", c.spam.enabled},
               {"prep_loss", c.spam.prep_loss},
               {"prep_dephasing", c.spam.prep_dephasing}};
  j["schedule"] = {{"t_bs_us", c.schedule.t_bs_us},
                   {"t_cps_us", c.schedule.t_cps_us},
                   {"t_rot_us", c.schedule.t_rot_us},
                   {"dt_divisor", c.schedule.dt_divisor}};
  j["budget"] = {{"exposure_us", c.budget.exposure_us},
                 {"mechanisms", c.budget.mechanisms},
                 {"theta", c.budget.theta},
                 {"cps_phase_error", c.budget.cps_phase_error},
                 {"rotation_angle_error", c.budget.rotation_angle_error},
                 {"qc_heating_prob_per_bs", c.budget.qc_heating_prob_per_bs}};
  j["fredkin"] = {{"duration_us", c.fredkin.duration_us},
                  {"resonant_branch_e", c.fredkin.resonant_branch_e},
                  {"conditional_readout_error", c.fredkin.conditional_readout_error},
                  {"detuning_span_mhz", c.fredkin.detuning_span_mhz},
                  {"detuning_points", c.fredkin.detuning_points},
                  {"duration_max_us", c.fredkin.duration_max_us},
                  {"duration_points", c.fredkin.duration_points}};
  return j.dump(2);
}

ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == "fock_demo") {
    c.encoding = "fock";
    c.thetas = {kPi / 4.0};
    c.cutoff_alice = c.cutoff_bob = 8;
    c.spam = SpamConfig::defaults_for("fock");
    c.spam.prep_loss = 0.009;  // |3> preparation, calibrated to <P_B> ~ -0.90
    c.noise.readout_error_a = c.noise.readout_error_b = 0.025;
  } else if (experiment == "coherent_sweep") {
    c.encoding = "coherent";
    c.thetas = {0.0, kPi / 4.0, kPi / 2.0};
    c.cutoff_alice = c.cutoff_bob = 12;
    c.spam = SpamConfig::defaults_for("coherent");
    c.noise.readout_error_a = c.noise.readout_error_b = 0.02;
  } else if (experiment == "qpt") {
    c.encoding = "fock";
    c.thetas = {0.0, kPi / 4.0, kPi / 2.0};
    c.cutoff_alice = c.cutoff_bob = 0;  // resolved from the encoding
    c.spam = SpamConfig::defaults_for("fock");
  } else if (experiment == "fredkin") {
    c.encoding = "fock";
    c.thetas = {};
    c.cutoff_alice = c.cutoff_bob = 4;
    c.spam = SpamConfig::defaults_for("fock");
    c.noise.bs_loss_enhancement = 3.0;
    c.noise.bs_dephasing_enhancement = 2.0;
    c.noise.readout_error_a = c.noise.readout_error_b = 0.025;
  } else if (experiment == "kerr") {
    c.encoding = "coherent";
    c.thetas = {kPi / 4.0};
    c.cutoff_alice = c.cutoff_bob = 18;
    c.spam.enabled = false;
  } else if (experiment == "error_budget") {
    c.encoding = "binomial";
    c.thetas = {kPi / 4.0};
    c.cutoff_alice = c.cutoff_bob = 10;
    c.spam.enabled = false;
  } else {
    throw ConfigError("unknown experiment: " + experiment);
  }
  return c;
}

std::string config_hash(const ExperimentConfig& config) {
  std::string canonical = to_json(config);  // nlohmann sorts object keys
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// --- shared building blocks -----------------------------------------------------

Channel spam_prep_channel(const SpamConfig& spam, const Spaces& cavity_spaces) {
  if (cavity_spaces.size() != 2) throw SpaceMismatch("cavity pair expected");
  Channel chan = Channel::identity(cavity_spaces);
  if (!spam.enabled) return chan;

  if (spam.prep_loss > 0) {
    double p = spam.prep_loss;
    for (int mode = 0; mode < 2; ++mode) {
      int c = cavity_spaces[mode].cutoff;
      std::vector<Matrix> local;
      for (int k = 0; k < c; ++k) {
        Matrix kk = Matrix::Zero(c, c);
        bool any = false;
        for (int n = k; n < c; ++n) {
          double binom = 1.0;
          for (int x = 0; x < k; ++x) binom *= double(n - x) / double(x + 1);
          double amp = std::sqrt(binom * std::pow(1.0 - p, n - k) * std::pow(p, k));
          if (amp > 0) {
            kk(n - k, n) = amp;
            any = true;
          }
        }
        if (any) local.push_back(kk);
      }
      std::vector<Matrix> embedded;
      for (const auto& kk : local)
        embedded.push_back(embed({kk, {cavity_spaces[mode]}}, cavity_spaces).m);
      Channel::KrausStep step;
      step.ops = std::move(embedded);
      step.cavity_only = true;
      chan.push_kraus(std::move(step));
    }
  }
  if (spam.prep_dephasing > 0) {
    Channel::DephasingStep d;
    d.lambda_alice = spam.prep_dephasing;
    d.lambda_bob = spam.prep_dephasing;
    chan.push_dephasing(d);
  }
  return chan;
}

namespace {

Circuit compiled_eswap_with_schedule(double theta, const ScheduleConfig& s, int cutoff) {
  Circuit circ = compile_eswap(theta, cutoff, cutoff);
  for (auto& g : circ.gates) {
    switch (g.kind) {
      case GateSpec::Kind::BeamSplitter: g.duration = s.t_bs_us * 1e-6; break;
      case GateSpec::Kind::CPS: g.duration = s.t_cps_us * 1e-6; break;
      default: g.duration = s.t_rot_us * 1e-6; break;
    }
  }
  return circ;
}

int kerr_frame_nmax_for(const std::string& encoding) {
  if (encoding == "fock") return 2;
  return 5;  // nbar = 2 encodings
}

}  // namespace

Channel build_noisy_eswap(double theta_c, const ExperimentConfig& config, int cutoff) {
  Circuit circ = compiled_eswap_with_schedule(theta_c, config.schedule, cutoff);
  NoiseModel noise = config.noise_enabled ? config.noise : NoiseModel::noiseless();
  PulseSchedule sched = PulseSchedule::from_circuit(circ, noise, config.schedule.dt_divisor);
  ChannelBuildOptions opts;
  opts.dt_divisor = config.schedule.dt_divisor;
  opts.kerr_frame_nmax = kerr_frame_nmax_for(config.encoding);
  if (noise.loss_exposure_us > 0) {
    double total_us = 2 * config.schedule.t_bs_us + 2 * config.schedule.t_cps_us +
                      3 * config.schedule.t_rot_us;
    opts.cavity_loss_scale = noise.loss_exposure_us / total_us;
    opts.kerr_scale = opts.cavity_loss_scale;
  }
  Channel op = noisy_channel_of_circuit(circ, noise, sched, opts);
  if (config.spam.enabled) {
    Spaces cav{alice_space(cutoff), bob_space(cutoff)};
    return spam_prep_channel(config.spam, cav).then(op);
  }
  return op;
}

double measurement_contrast(const ExperimentConfig& config) {
  if (!config.spam.enabled) return 1.0;
  return (1.0 - 2.0 * config.noise.readout_error_a) *
         (1.0 - 2.0 * config.noise.readout_error_b);
}

// --- output helpers --------------------------------------------------------------

namespace {

struct Sink {
  fs::path dir;
  std::vector<std::string> outputs;

  void write(const std::string& name, const std::string& content) {
    fs::path p = dir / name;
    std::ofstream f(p);
    if (!f) throw ConfigError("cannot write " + p.string());
    f << content;
    outputs.push_back(name);
  }
};

std::string single_wigner_csv(const DensityMatrix& rho_1mode, const GridSpec& grid) {
  std::ostringstream os;
  os << "re,im,value\n";
  double h = 2.0 * grid.extent / (grid.n - 1);
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j) {
      double x = -grid.extent + i * h, y = -grid.extent + j * h;
      os << fmt(x) << ',' << fmt(y) << ','
         << fmt(wigner_single(rho_1mode, cxd(x, y), true)) << '\n';
    }
  return os.str();
}

std::string joint_wigner_plane_csv(const DensityMatrix& rho_ab, const std::string& plane,
                                   const GridSpec& grid, double scale) {
  std::ostringstream os;
  os << "axis1,axis2,value\n";
  double h = 2.0 * grid.extent / (grid.n - 1);
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j) {
      double u = -grid.extent + i * h, v = -grid.extent + j * h;
      cxd b1 = (plane == "re_re") ? cxd(u, 0.0) : cxd(0.0, u);
      cxd b2 = (plane == "re_re") ? cxd(v, 0.0) : cxd(0.0, v);
      os << fmt(u) << ',' << fmt(v) << ',' << fmt(scale * joint_wigner(rho_ab, b1, b2))
         << '\n';
    }
  return os.str();
}

double plane_min(const DensityMatrix& rho_ab, const std::string& plane,
                 const GridSpec& grid, double scale) {
  double best = 1e300;
  double h = 2.0 * grid.extent / (grid.n - 1);
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j) {
      double u = -grid.extent + i * h, v = -grid.extent + j * h;
      cxd b1 = (plane == "re_re") ? cxd(u, 0.0) : cxd(0.0, u);
      cxd b2 = (plane == "re_re") ? cxd(v, 0.0) : cxd(0.0, v);
      best = std::min(best, scale * joint_wigner(rho_ab, b1, b2));
    }
  return best;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "theta_c,II,ZZ,IZ,ZI,XY,YX\n";
  for (const auto& r : rows)
    os << fmt(r.theta_c) << ',' << fmt(r.ii) << ',' << fmt(r.zz) << ',' << fmt(r.iz)
       << ',' << fmt(r.zi) << ',' << fmt(r.xy) << ',' << fmt(r.yx) << '\n';
  return os.str();
}

std::string theta_tag(double theta) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.4f", theta);
  std::string s = buf;
  for (auto& ch : s)
    if (ch == '+') ch = 'p';
    else if (ch == '-') ch = 'm';
    else if (ch == '.') ch = '_';
  return s;
}

// --- command implementations ---------------------------------------------------

json run_fock_demo(const ExperimentConfig& config, Sink& sink) {
  int c = config.cutoff_alice > 0 ? config.cutoff_alice : 8;
  ModeSpace sa = alice_space(c), sb = bob_space(c);
  Spaces cav{sa, sb};
  double theta = config.thetas.empty() ? kPi / 4.0 : config.thetas.front();

  StateVector in = tensor({fock_state(0, sa), fock_state(3, sb)});
  DensityMatrix rho_in = to_density(in);
  Operator ideal_u = eswap_ideal(theta, sa, sb);
  DensityMatrix ideal_out = apply(ideal_u, rho_in);

  Channel prep = spam_prep_channel(config.spam, cav);
  DensityMatrix noisy_in = prep.apply(rho_in);
  ExperimentConfig op_cfg = config;
  op_cfg.spam.enabled = false;  // preparation handled explicitly above
  Channel op = build_noisy_eswap(theta, op_cfg, c);
  DensityMatrix noisy_out = op.apply(noisy_in);

  double contrast_a = config.spam.enabled ? 1.0 - 2.0 * config.noise.readout_error_a : 1.0;
  double contrast_b = config.spam.enabled ? 1.0 - 2.0 * config.noise.readout_error_b : 1.0;

  auto parities = [&](const DensityMatrix& rho, double ca_scale, double cb_scale) {
    DensityMatrix ra = partial_trace(rho, {Mode::Alice});
    DensityMatrix rb = partial_trace(rho, {Mode::Bob});
    double pa = ca_scale * wigner_single(ra, 0.0, true);
    double pb = cb_scale * wigner_single(rb, 0.0, true);
    double pab = ca_scale * cb_scale * joint_wigner(rho, 0.0, 0.0);
    return std::array<double, 3>{pa, pb, pab};
  };

  auto id_before = parities(rho_in, 1.0, 1.0);
  auto id_after = parities(ideal_out, 1.0, 1.0);
  auto ns_before = parities(noisy_in, contrast_a, contrast_b);
  auto ns_after = parities(noisy_out, contrast_a, contrast_b);

  struct Item {
    const char* tag;
    const DensityMatrix* rho;
    double ca, cb;
  };
  std::vector<Item> items = {{"ideal_before", &rho_in, 1.0, 1.0},
                             {"ideal_after", &ideal_out, 1.0, 1.0},
                             {"noisy_before", &noisy_in, contrast_a, contrast_b},
                             {"noisy_after", &noisy_out, contrast_a, contrast_b}};
  for (const auto& item : items) {
    DensityMatrix ra = partial_trace(*item.rho, {Mode::Alice});
    DensityMatrix rb = partial_trace(*item.rho, {Mode::Bob});
    sink.write(std::string("wigner_alice_") + item.tag + ".csv",
               single_wigner_csv(ra, config.grid));
    sink.write(std::string("wigner_bob_") + item.tag + ".csv",
               single_wigner_csv(rb, config.grid));
    for (const auto& plane : config.grid.planes)
      sink.write(std::string("joint_wigner_") + plane + "_" + item.tag + ".csv",
                 joint_wigner_plane_csv(*item.rho, plane, config.grid,
                                        item.ca * item.cb));
  }

  json summary;
  summary["theta_c"] = theta;
  summary["ideal"] = {{"before", {{"P_A", id_before[0]}, {"P_B", id_before[1]}, {"P_AB", id_before[2]}}},
                      {"after", {{"P_A", id_after[0]}, {"P_B", id_after[1]}, {"P_AB", id_after[2]}}}};
  summary["noisy"] = {{"before", {{"P_A", ns_before[0]}, {"P_B", ns_before[1]}, {"P_AB", ns_before[2]}}},
                      {"after", {{"P_A", ns_after[0]}, {"P_B", ns_after[1]}, {"P_AB", ns_after[2]}}}};
  return summary;
}

json run_coherent_sweep(const ExperimentConfig& config, Sink& sink) {
  int c = config.cutoff_alice > 0 ? config.cutoff_alice : 12;
  LogicalEncoding enc = make_encoding("coherent", c, config.alpha);
  double contrast = measurement_contrast(config);

  // dense noiseless sweep
  std::vector<double> dense;
  for (int k = 0; k <= 32; ++k) dense.push_back(-kPi / 2.0 + k * kPi / 32.0);
  auto ideal_rows = theta_sweep(enc, dense, ideal_eswap_channel(c));
  sink.write("sweep_ideal.csv", sweep_csv(ideal_rows));

  auto plan = pauli_points_plan(enc);
  DensityMatrix rho_in = to_density(encode_two_qubit(enc, "01"));

  // noisy runs at the configured angles
  std::vector<SweepRow> noisy_rows;
  json bars = json::array();
  json fringes = json::array();
  double dfe_measured = 0.0, dfe_ideal_value = 0.0;
  json populations;
  for (double theta : config.thetas) {
    Channel op = build_noisy_eswap(theta, config, c);
    DensityMatrix out = op.apply(rho_in);
    DensityMatrix ideal_out = ideal_eswap_channel(c)(theta, rho_in);

    CorrelatorSet intrinsic = correlators(out, enc);
    auto parities = joint_parity_values(out, plan.points);
    for (auto& p : parities) p *= contrast;
    CorrelatorSet measured = plan.correlators_from_parities(parities);
    CorrelatorSet ideal_c = correlators(ideal_out, enc);

    noisy_rows.push_back({theta, measured["II"], measured["ZZ"], measured["IZ"],
                          measured["ZI"], measured["XY"], measured["YX"]});

    std::ostringstream bar;
    bar << "label,measured,ideal\n";
    for (int i = 0; i < 16; ++i)
      bar << kPauliLabels[i] << ',' << fmt(measured.values[i]) << ','
          << fmt(ideal_c.values[i]) << '\n';
    std::string tag = theta_tag(theta);
    sink.write("correlators_theta_" + tag + ".csv", bar.str());

    for (const auto& plane : config.grid.planes)
      sink.write("joint_wigner_" + plane + "_theta_" + tag + ".csv",
                 joint_wigner_plane_csv(out, plane, config.grid, contrast));

    double fringe = plane_min(out, "im_im", config.grid, contrast);
    fringes.push_back({{"theta_c", theta}, {"im_im_min", fringe}});

    if (std::abs(theta - kPi / 4.0) < 1e-9) {
      dfe_measured = direct_fidelity_estimate(measured);
      dfe_ideal_value = direct_fidelity_estimate(ideal_c);
    }
    if (std::abs(theta - kPi / 2.0) < 1e-9) {
      double at_swapped = contrast * joint_wigner(out, cxd(config.alpha, 0.0),
                                                  cxd(-config.alpha, 0.0));
      double at_initial = contrast * joint_wigner(out, cxd(-config.alpha, 0.0),
                                                  cxd(config.alpha, 0.0));
      populations = {{"W_at_swapped_pole", at_swapped}, {"W_at_initial_pole", at_initial}};
    }
  }
  sink.write("sweep_noisy.csv", sweep_csv(noisy_rows));

  json summary;
  summary["alpha"] = config.alpha;
  summary["direct_fidelity_measured"] = dfe_measured;
  summary["direct_fidelity_ideal"] = dfe_ideal_value;
  summary["fringe_metrics"] = fringes;
  if (!populations.is_null()) summary["swap_populations"] = populations;
  return summary;
}

json run_qpt_cmd(const ExperimentConfig& config, Sink& sink) {
  int c = config.cutoff_alice;
  if (c <= 0) c = (config.encoding == "binomial") ? 9 : 4;
  LogicalEncoding enc = make_encoding(config.encoding, c, config.alpha);

  QptOptions opt;
  opt.sampled = config.mode == "sampled";
  opt.shots_per_point = config.shots_per_point;
  if (config.seed_set) opt.seed = config.seed;
  if (config.spam.enabled) {
    opt.readout_error_a = config.noise.readout_error_a;
    opt.readout_error_b = config.noise.readout_error_b;
  }

  json per_theta = json::array();
  double sum_chi = 0.0, sum_overlap = 0.0;
  for (double theta : config.thetas) {
    Channel op = build_noisy_eswap(theta, config, c);
    Operator ideal = eswap_ideal(theta, alice_space(c), bob_space(c));
    QptReport report = run_qpt(op, ideal, enc, opt);
    std::string tag = theta_tag(theta);
    sink.write("qpt_report_theta_" + tag + ".json", to_json(report));
    sink.write("ptm_theta_" + tag + ".csv", to_csv(report.ptm));
    per_theta.push_back({{"theta_c", theta},
                         {"fidelity_chi", report.fidelity_chi},
                         {"overlap_ptm", report.overlap_ptm}});
    sum_chi += report.fidelity_chi;
    sum_overlap += report.overlap_ptm;
  }

  // encode-only reference: preparation and measurement with no operation
  Spaces cav{alice_space(c), bob_space(c)};
  Channel encode_only = spam_prep_channel(config.spam, cav);
  Operator identity_op = identity(cav);
  QptReport encode_report = run_qpt(encode_only, identity_op, enc, opt);
  sink.write("qpt_report_encode_only.json", to_json(encode_report));

  json summary;
  summary["encoding"] = config.encoding;
  summary["per_theta"] = per_theta;
  summary["average_fidelity_chi"] = sum_chi / double(config.thetas.size());
  summary["average_overlap_ptm"] = sum_overlap / double(config.thetas.size());
  summary["encode_only_fidelity_chi"] = encode_report.fidelity_chi;
  summary["encode_only_overlap_ptm"] = encode_report.overlap_ptm;
  return summary;
}

json run_fredkin(const ExperimentConfig& config, Sink& sink) {
  int c = config.cutoff_alice > 0 ? config.cutoff_alice : 4;
  NoiseModel noise = config.noise_enabled ? config.noise : NoiseModel::noiseless();

  // conditional-resonance spectroscopy
  std::vector<double> detunings, durations;
  double span = config.fredkin.detuning_span_mhz * 1e6;
  double center = noise.chi_qb_bob / (2 * kPi) / 2.0;  // midpoint of the two peaks
  for (int k = 0; k < config.fredkin.detuning_points; ++k)
    detunings.push_back(center - span / 2.0 +
                        span * k / double(config.fredkin.detuning_points - 1));
  for (int k = 0; k < config.fredkin.duration_points; ++k)
    durations.push_back(config.fredkin.duration_max_us * 1e-6 * k /
                        double(config.fredkin.duration_points - 1));
  double g_drive = kPi / (2.0 * config.fredkin.duration_us * 1e-6);
  ChevronMap map = simulate_cswap_spectroscopy(detunings, durations, noise, g_drive);
  {
    std::ostringstream os;
    os << "duration_s,detuning_hz,transfer_g,transfer_e,transfer_avg\n";
    for (long r = 0; r < long(durations.size()); ++r)
      for (long col = 0; col < long(detunings.size()); ++col)
        os << fmt(durations[r]) << ',' << fmt(detunings[col]) << ','
           << fmt(map.transfer_g(r, col)) << ',' << fmt(map.transfer_e(r, col)) << ','
           << fmt(map.transfer_avg(r, col)) << '\n';
    sink.write("spectroscopy_chevron.csv", os.str());
  }

  // conditional tomography of the driven cSWAP on the four ancilla inputs
  CswapOptions copt;
  copt.duration = config.fredkin.duration_us * 1e-6;
  copt.resonant_branch_e = config.fredkin.resonant_branch_e;
  copt.dt_divisor = config.schedule.dt_divisor;
  Channel cswap = noisy_cswap_channel(noise, c, c, copt);

  Operator ideal = cswap_ideal(ancilla_space(), alice_space(c), bob_space(c));
  Spaces cav{alice_space(c), bob_space(c)};
  Channel prep = spam_prep_channel(config.spam, cav);
  StateVector cav01 = tensor({fock_state(0, cav[0]), fock_state(1, cav[1])});
  DensityMatrix cav_prep = prep.apply(to_density(cav01));

  double e_cond = config.spam.enabled ? config.fredkin.conditional_readout_error : 0.0;
  double contrast = measurement_contrast(config);

  const char* names[4] = {"g", "e", "plus", "minus"};
  Vector ancs[4];
  ancs[0] = Vector(2);
  ancs[0] << 1, 0;
  ancs[1] = Vector(2);
  ancs[1] << 0, 1;
  ancs[2] = Vector(2);
  ancs[2] << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  ancs[3] = Vector(2);
  ancs[3] << 1 / std::sqrt(2.0), -1 / std::sqrt(2.0);

  json overlaps = json::array();
  double avg = 0.0;
  for (int k = 0; k < 4; ++k) {
    long dc = c * c;
    Matrix full = Matrix::Zero(2 * dc, 2 * dc);
    Matrix anc_rho = ancs[k] * ancs[k].adjoint();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        full.block(i * dc, j * dc, dc, dc) = anc_rho(i, j) * cav_prep.m;
    Spaces three{ancilla_space(), cav[0], cav[1]};
    DensityMatrix out = cswap.apply_keep_ancilla({full, three});

    // basis-resolved ancilla readout with assignment error, then the
    // measurement-contrast scale of the joint Wigner reconstruction
    long d2 = dc;
    Matrix gg = out.m.block(0, 0, d2, d2), ge = out.m.block(0, d2, d2, d2);
    Matrix eg = out.m.block(d2, 0, d2, d2), ee = out.m.block(d2, d2, d2, d2);
    auto mix = [&](Matrix plus_block, Matrix minus_block) {
      return ((1.0 - e_cond) * plus_block + e_cond * minus_block).eval();
    };
    Matrix exp_g = mix(gg, ee), exp_e = mix(ee, gg);
    Matrix xp = 0.5 * (gg + ge + eg + ee), xm = 0.5 * (gg - ge - eg + ee);
    Matrix yp = 0.5 * (gg + kI * ge - kI * eg + ee);
    Matrix ym = 0.5 * (gg - kI * ge + kI * eg + ee);
    Matrix exp_xp = mix(xp, xm), exp_yp = mix(yp, ym);

    auto assembled = assemble_three_mode({Matrix(contrast * exp_g), cav},
                                         {Matrix(contrast * exp_e), cav},
                                         {Matrix(contrast * exp_xp), cav},
                                         {Matrix(contrast * exp_yp), cav});

    StateVector in_pure = tensor({StateVector{ancs[k], {ancilla_space()}}, cav01});
    StateVector want = apply(ideal, in_pure);
    double overlap = state_fidelity(assembled.rho, want);
    avg += overlap / 4.0;
    overlaps.push_back({{"input", names[k]}, {"overlap", overlap}});
    sink.write(std::string("three_mode_rho_") + names[k] + ".json",
               eswap::to_json(assembled.rho));
  }

  json summary;
  summary["spectroscopy"] = {{"separation_hz", map.separation_hz},
                             {"expected_hz", noise.chi_qb_bob / (2 * kPi)},
                             {"max_transfer", map.max_transfer}};
  summary["overlaps"] = overlaps;
  summary["average_overlap"] = avg;
  return summary;
}

json run_kerr(const ExperimentConfig& config, Sink& sink) {
  int c = config.cutoff_alice > 0 ? config.cutoff_alice : 18;
  LogicalEncoding enc = make_encoding("coherent", c, config.alpha);
  StateVector in = encode_two_qubit(enc, "01");
  Operator u = eswap_ideal(kPi / 4.0, alice_space(c), bob_space(c));
  StateVector cat = apply(u, in);

  double t = 2.0 * config.schedule.t_bs_us * 1e-6;
  Operator kerr = kerr_unitary(config.noise.kerr_alice, config.noise.kerr_bob, t,
                               alice_space(c), bob_space(c));
  StateVector distorted = apply(kerr, cat);

  for (const auto& plane : config.grid.planes) {
    sink.write("joint_wigner_" + plane + "_ideal.csv",
               joint_wigner_plane_csv(to_density(cat), plane, config.grid, 1.0));
    sink.write("joint_wigner_" + plane + "_kerr.csv",
               joint_wigner_plane_csv(to_density(distorted), plane, config.grid, 1.0));
  }

  json summary;
  summary["kerr_a_khz"] = config.noise.kerr_alice / (2 * kPi * 1e3);
  summary["kerr_b_khz"] = config.noise.kerr_bob / (2 * kPi * 1e3);
  summary["exposure_us"] = t * 1e6;
  summary["fidelity_to_undistorted"] = state_fidelity(distorted, cat);
  return summary;
}

}  // namespace

std::vector<BudgetRow> error_budget(const ExperimentConfig& config) {
  int c = config.cutoff_alice > 0 ? config.cutoff_alice : 10;
  LogicalEncoding enc = make_encoding(config.encoding, c, config.alpha);
  double theta = config.budget.theta;

  auto noise_for = [&](const std::string& mechanism) {
    NoiseModel base = NoiseModel::noiseless();
    if (mechanism == "qc_heating") {
      base.qc_heating_prob_per_bs = config.budget.qc_heating_prob_per_bs;
    } else if (mechanism == "photon_loss") {
      base.t1_alice = config.noise.t1_alice;
      base.t1_bob = config.noise.t1_bob;
      base.loss_exposure_us = config.budget.exposure_us;
    } else if (mechanism == "self_kerr") {
      base.kerr_alice = config.noise.kerr_alice;
      base.kerr_bob = config.noise.kerr_bob;
    } else if (mechanism == "cps_miscalibration") {
      base.cps_phase_error = config.budget.cps_phase_error;
    } else if (mechanism == "ancilla_rotation") {
      base.rotation_angle_error = config.budget.rotation_angle_error;
    } else if (mechanism == "all") {
      base = config.noise;
      base.loss_exposure_us = config.budget.exposure_us;
      base.qc_heating_prob_per_bs = config.budget.qc_heating_prob_per_bs;
      base.cps_phase_error = config.budget.cps_phase_error;
      base.rotation_angle_error = config.budget.rotation_angle_error;
    } else {
      throw ConfigError("unknown budget mechanism: " + mechanism);
    }
    return base;
  };

  std::vector<std::string> mechanisms = config.budget.mechanisms;
  mechanisms.push_back("all");

  std::vector<BudgetRow> rows;
  for (const auto& mech : mechanisms) {
    ExperimentConfig run_cfg = config;
    run_cfg.noise = noise_for(mech);
    run_cfg.noise_enabled = true;
    run_cfg.spam.enabled = false;

    Channel op = build_noisy_eswap(theta, run_cfg, c);
    Operator ideal = eswap_ideal(theta, alice_space(c), bob_space(c));
    QptOptions opt;
    QptReport report = run_qpt(op, ideal, enc, opt);
    rows.push_back({mech, config.encoding, 1.0 - report.fidelity_chi});
  }
  return rows;
}

namespace {

json run_error_budget(const ExperimentConfig& config, Sink& sink) {
  auto rows = error_budget(config);
  std::ostringstream os;
  os << "mechanism,encoding,infidelity\n";
  json jrows = json::array();
  double total = 0.0;
  for (const auto& r : rows) {
    os << r.mechanism << ',' << r.encoding << ',' << fmt(r.infidelity) << '\n';
    jrows.push_back(
        {{"mechanism", r.mechanism}, {"encoding", r.encoding}, {"infidelity", r.infidelity}});
    if (r.mechanism == "all") total = r.infidelity;
  }
  sink.write("error_budget.csv", os.str());
  json summary;
  summary["rows"] = jrows;
  summary["total_infidelity"] = total;
  summary["exposure_us"] = config.budget.exposure_us;
  return summary;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  auto start = std::chrono::steady_clock::now();

  Sink sink;
  sink.dir = config.out_dir;
  fs::create_directories(sink.dir);

  json summary;
  if (config.experiment == "fock_demo") {
    summary = run_fock_demo(config, sink);
  } else if (config.experiment == "coherent_sweep") {
    summary = run_coherent_sweep(config, sink);
  } else if (config.experiment == "qpt") {
    summary = run_qpt_cmd(config, sink);
  } else if (config.experiment == "fredkin") {
    summary = run_fredkin(config, sink);
  } else if (config.experiment == "kerr") {
    summary = run_kerr(config, sink);
  } else if (config.experiment == "error_budget") {
    summary = run_error_budget(config, sink);
  } else {
    throw ConfigError("unknown experiment: " + config.experiment);
  }

  ExperimentResult result;
  result.manifest.config_hash = config_hash(config);
  result.manifest.seed = config.seed;
  result.manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  sink.write("summary.json", summary.dump(2));

  json manifest;
  manifest["config_hash"] = result.manifest.config_hash;
  manifest["code_version"] = result.manifest.code_version;
  manifest["seed"] = config.seed_set ? json(config.seed) : json(nullptr);
  manifest["wall_seconds"] = result.manifest.wall_seconds;
  manifest["config"] = json::parse(to_json(config));
  json outs = json::array();
  for (const auto& o : sink.outputs) outs.push_back(o);
  outs.push_back("manifest.json");
  manifest["outputs"] = outs;
  sink.write("manifest.json", manifest.dump(2));

  result.manifest.outputs = sink.outputs;
  result.summary_json = summary.dump(2);
  result.ok = true;
  return result;
}

}  // namespace eswap
