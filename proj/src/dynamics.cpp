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

#include "eswap/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

namespace eswap {

namespace {
constexpr double kPi = std::numbers::pi;
const cxd kI{0.0, 1.0};

SpMat sparse_of(const Matrix& m) {
  SpMat s = m.sparseView(1.0, 1e-14);
  s.makeCompressed();
  return s;
}
}  // namespace

double NoiseModel::gamma_phi_q() const {
  double g = 1.0 / t2_q - 0.5 / t1_q;
  return std::max(0.0, g);
}

void NoiseModel::validate() const {
  if (t1_alice <= 0 || t1_bob <= 0 || t1_q <= 0 || t2_q <= 0)
    throw ConfigError("coherence times must be positive");
  if (t2_q > 2.0 * t1_q + 1e-12) throw ConfigError("T2 must satisfy T2 <= 2 T1");
  if (n_th_alice < 0 || n_th_bob < 0 || n_th_q < 0)
    throw ConfigError("thermal populations must be nonnegative");
  if (readout_error_a < 0 || readout_error_a > 0.5 || readout_error_b < 0 ||
      readout_error_b > 0.5)
    throw ConfigError("readout errors must lie in [0, 0.5]");
  if (qc_heating_prob_per_bs < 0 || qc_heating_prob_per_bs > 1)
    throw ConfigError("heating probability must lie in [0, 1]");
}

NoiseModel NoiseModel::noiseless() {
  NoiseModel n;
  n.t1_alice = n.t1_bob = n.t1_q = 1e6;  // effectively infinite
  n.t2_q = 2e6;
  n.kerr_alice = n.kerr_bob = 0.0;
  n.qc_heating_prob_per_bs = 0.0;
  n.readout_error_a = n.readout_error_b = 0.0;
  return n;
}

double PulseSchedule::total_duration() const {
  double t = 0.0;
  for (const auto& e : entries) t += e.duration;
  return t;
}

void PulseSchedule::validate() const {
  for (const auto& e : entries) {
    if (e.duration <= 0) throw ConfigError("schedule entries need positive durations");
    if (e.dt > e.duration / 50.0 + 1e-18)
      throw ConfigError("dt must not exceed duration/50");
  }
}

namespace {

int max_cavity_cutoff(const Spaces& spaces) {
  int c = 2;
  for (const auto& s : spaces)
    if (s.label != Mode::Ancilla) c = std::max(c, s.cutoff);
  return c;
}

// crude spectral-span estimate in Hz for the step-size rule
double gate_frequency_hz(const GateSpec& g, const NoiseModel& noise, const Spaces& spaces) {
  int c = max_cavity_cutoff(spaces);
  double w = 0.0;
  switch (g.kind) {
    case GateSpec::Kind::BeamSplitter:
      w = (g.theta / g.duration) * c;
      break;
    case GateSpec::Kind::CPS:
      w = (kPi / g.duration) * (c - 1);
      break;
    case GateSpec::Kind::AncillaRotation:
      w = (g.axis == Axis::Hadamard ? kPi : std::abs(g.angle)) / (2.0 * g.duration);
      break;
    default:
      w = kPi / g.duration;
      break;
  }
  double kerr = std::max(noise.kerr_alice, noise.kerr_bob) * 0.5 * (c - 1) * (c - 2);
  return (w + kerr) / (2.0 * kPi);
}

}  // namespace

PulseSchedule PulseSchedule::from_circuit(const Circuit& circuit, const NoiseModel& noise,
                                          int divisor) {
  if (divisor < 50) throw ConfigError("schedule divisor must be >= 50");
  PulseSchedule s;
  for (const auto& g : circuit.gates) {
    if (g.duration <= 0) throw ConfigError("gate without a duration cannot be scheduled");
    double fmax = gate_frequency_hz(g, noise, circuit.spaces);
    double dt = g.duration / double(divisor);
    if (fmax > 0) dt = std::min(dt, 1.0 / (50.0 * fmax));
    long n = std::max<long>(divisor, std::lround(g.duration / dt));
    s.entries.push_back({g, g.duration, g.duration / double(n)});
  }
  s.validate();
  return s;
}

// --- RK4 Lindblad core --------------------------------------------------------

namespace {

struct Rk4Work {
  Matrix k1, k2, k3, k4, stage, tmp;
  void resize(long d) {
    k1.resize(d, d);
    k2.resize(d, d);
    k3.resize(d, d);
    k4.resize(d, d);
    stage.resize(d, d);
    tmp.resize(d, d);
  }
};

void segment_rhs(const Channel::LindbladSegment& seg, double t, const Matrix& rho,
                 Matrix& out, Matrix& tmp) {
  out.noalias() = seg.drift * rho;
  out.noalias() += rho * seg.drift_dag;
  for (size_t k = 0; k < seg.ls.size(); ++k) {
    tmp.noalias() = seg.ls[k] * rho;
    out.noalias() += tmp * seg.ldags[k];
  }
  if (seg.has_drive) {
    cxd c = seg.drive_amp * std::exp(kI * seg.drive_delta * t);
    tmp.noalias() = seg.hop * rho;
    out.noalias() += (-kI * c) * tmp;
    tmp.noalias() = seg.hop_dag * rho;
    out.noalias() += (-kI * std::conj(c)) * tmp;
    tmp.noalias() = rho * seg.hop;
    out.noalias() += (kI * c) * tmp;
    tmp.noalias() = rho * seg.hop_dag;
    out.noalias() += (kI * std::conj(c)) * tmp;
  }
}

void rk4_step(const Channel::LindbladSegment& seg, double t, double dt, Matrix& rho,
              Rk4Work& w) {
  segment_rhs(seg, t, rho, w.k1, w.tmp);
  w.stage = rho + (0.5 * dt) * w.k1;
  segment_rhs(seg, t + 0.5 * dt, w.stage, w.k2, w.tmp);
  w.stage = rho + (0.5 * dt) * w.k2;
  segment_rhs(seg, t + 0.5 * dt, w.stage, w.k3, w.tmp);
  w.stage = rho + dt * w.k3;
  segment_rhs(seg, t + dt, w.stage, w.k4, w.tmp);
  rho += (dt / 6.0) * (w.k1 + 2.0 * w.k2 + 2.0 * w.k3 + w.k4);
}

Matrix evolve_segment(const Channel::LindbladSegment& seg, Matrix rho) {
  long n = std::max<long>(1, std::lround(seg.duration / seg.dt));
  double dt = seg.duration / double(n);
  Rk4Work w;
  w.resize(rho.rows());

  // local error estimate by step doubling on the first step
  {
    Matrix full = rho;
    rk4_step(seg, 0.0, dt, full, w);
    Matrix halves = rho;
    rk4_step(seg, 0.0, 0.5 * dt, halves, w);
    rk4_step(seg, 0.5 * dt, 0.5 * dt, halves, w);
    double err = (full - halves).cwiseAbs().maxCoeff() / 15.0;
    if (err > 1e-6)
      throw StepTooLarge("local RK4 error estimate " + std::to_string(err) +
                         " exceeds 1e-6; reduce dt");
  }

  double t = 0.0;
  for (long i = 0; i < n; ++i) {
    rk4_step(seg, t, dt, rho, w);
    t += dt;
  }
  return rho;
}

Channel::LindbladSegment make_segment(const Matrix& h, const std::vector<Matrix>& ls,
                                      double duration, double dt) {
  Channel::LindbladSegment seg;
  Matrix drift = -kI * h;
  for (const auto& l : ls) {
    drift -= 0.5 * (l.adjoint() * l);
    seg.ls.push_back(sparse_of(l));
    seg.ldags.push_back(sparse_of(l.adjoint()));
  }
  seg.drift = sparse_of(drift);
  seg.drift_dag = sparse_of(drift.adjoint());
  seg.duration = duration;
  seg.dt = dt;
  return seg;
}

}  // namespace

DensityMatrix lindblad_evolve(const DensityMatrix& rho, const Operator& h,
                              const std::vector<Operator>& collapse_ops, double t,
                              double dt) {
  if (!same_spaces(rho.spaces, h.spaces)) throw SpaceMismatch("H space differs from rho");
  if (!h.is_hermitian(1e-9)) throw ConfigError("lindblad_evolve needs a Hermitian H");
  if (t < 0) throw ConfigError("negative evolution time");
  if (t == 0.0) return rho;
  if (dt <= 0 || dt > t / 50.0 + 1e-18) throw ConfigError("dt must satisfy dt <= t/50");
  std::vector<Matrix> ls;
  for (const auto& l : collapse_ops) {
    if (!same_spaces(l.spaces, rho.spaces))
      throw SpaceMismatch("collapse operator space differs from rho");
    ls.push_back(l.m);
  }
  auto seg = make_segment(h.m, ls, t, dt);
  return {evolve_segment(seg, rho.m), rho.spaces};
}

DrivenBsHamiltonian driven_bs_hamiltonian(double g, double delta, const Spaces& spaces) {
  if (g <= 0.0) throw ConfigError("drive amplitude must be positive");
  ModeSpace sa{2, Mode::Alice}, sb{2, Mode::Bob};
  bool have_a = false, have_b = false;
  for (const auto& s : spaces) {
    if (s.label == Mode::Alice) {
      sa = s;
      have_a = true;
    }
    if (s.label == Mode::Bob) {
      sb = s;
      have_b = true;
    }
  }
  if (!have_a || !have_b) throw SpaceMismatch("driven BS needs Alice and Bob");
  Operator hop = embed(tensor({annihilation(sa), creation(sb)}), spaces);
  return {hop, g, delta};
}

DensityMatrix lindblad_evolve_driven(const DensityMatrix& rho,
                                     const DrivenBsHamiltonian& h,
                                     const std::vector<Operator>& collapse_ops, double t,
                                     double dt) {
  if (!same_spaces(rho.spaces, h.hop.spaces))
    throw SpaceMismatch("drive space differs from rho");
  if (t == 0.0) return rho;
  std::vector<Matrix> ls;
  for (const auto& l : collapse_ops) ls.push_back(l.m);
  auto seg = make_segment(Matrix::Zero(rho.dim(), rho.dim()), ls, t, dt);
  seg.has_drive = true;
  seg.hop = sparse_of(h.hop.m);
  seg.hop_dag = sparse_of(h.hop.m.adjoint());
  seg.drive_amp = h.g;
  seg.drive_delta = h.delta;
  return {evolve_segment(seg, rho.m), rho.spaces};
}

Operator kerr_unitary(double kerr_a, double kerr_b, double t, const ModeSpace& space_a,
                      const ModeSpace& space_b) {
  if (t < 0) throw ConfigError("negative Kerr time");
  auto phases = [t](double k, const ModeSpace& s) {
    Matrix m = Matrix::Zero(s.cutoff, s.cutoff);
    for (int n = 0; n < s.cutoff; ++n)
      m(n, n) = std::exp(cxd(0.0, -t * 0.5 * k * n * (n - 1.0)));
    return Operator{m, {s}};
  };
  return tensor({phases(kerr_a, space_a), phases(kerr_b, space_b)});
}

// --- Channel ------------------------------------------------------------------

void Channel::set_spaces(Spaces cavity, Spaces full, bool wraps_ancilla) {
  cavity_spaces_ = std::move(cavity);
  full_spaces_ = std::move(full);
  wraps_ancilla_ = wraps_ancilla;
}

Channel Channel::identity(const Spaces& cavity_spaces) {
  Channel c;
  c.set_spaces(cavity_spaces, cavity_spaces, false);
  return c;
}

Channel Channel::from_kraus(std::vector<Matrix> ops, const Spaces& cavity_spaces) {
  Channel c;
  c.set_spaces(cavity_spaces, cavity_spaces, false);
  KrausStep k;
  k.ops = std::move(ops);
  k.cavity_only = true;
  c.push_kraus(std::move(k));
  return c;
}

Channel Channel::from_superoperator(Matrix super, const Spaces& cavity_spaces,
                                    bool trace_preserving) {
  Channel c;
  c.set_spaces(cavity_spaces, cavity_spaces, false);
  c.super_ = std::move(super);
  c.trace_preserving_flag = trace_preserving;
  return c;
}

Channel Channel::from_unitary(const Operator& u) {
  Channel c;
  c.set_spaces(u.spaces, u.spaces, false);
  UnitaryStep s;
  s.u = u.m;
  s.cavity_only = true;
  c.push_unitary(std::move(s));
  return c;
}

namespace {

void apply_dephasing(const Spaces& spaces, const Channel::DephasingStep& d, Matrix& rho) {
  // locate cavity positions and strides
  std::vector<long> stride(spaces.size());
  long acc = 1;
  for (int i = int(spaces.size()) - 1; i >= 0; --i) {
    stride[i] = acc;
    acc *= spaces[i].cutoff;
  }
  long dim = acc;
  auto mode_index = [&](Mode m) {
    for (size_t i = 0; i < spaces.size(); ++i)
      if (spaces[i].label == m) return long(i);
    return long(-1);
  };
  long ia = mode_index(Mode::Alice), ib = mode_index(Mode::Bob);

  auto digits = [&](long idx, long mode) {
    return (idx / stride[mode]) % spaces[mode].cutoff;
  };

  if (d.lambda_alice > 0 || d.lambda_bob > 0) {
    for (long r = 0; r < dim; ++r)
      for (long c = 0; c < dim; ++c) {
        double w = 0.0;
        if (ia >= 0 && d.lambda_alice > 0) {
          double dn = double(digits(r, ia) - digits(c, ia));
          w += d.lambda_alice * dn * dn;
        }
        if (ib >= 0 && d.lambda_bob > 0) {
          double dn = double(digits(r, ib) - digits(c, ib));
          w += d.lambda_bob * dn * dn;
        }
        if (w > 0) rho(r, c) *= std::exp(-0.5 * w);
      }
  }
  if (d.p_joint > 0) {
    for (long r = 0; r < dim; ++r)
      for (long c = 0; c < dim; ++c) {
        bool same = true;
        if (ia >= 0 && digits(r, ia) != digits(c, ia)) same = false;
        if (ib >= 0 && digits(r, ib) != digits(c, ib)) same = false;
        if (!same) rho(r, c) *= (1.0 - d.p_joint);
      }
  }
}

}  // namespace

Matrix Channel::run_steps(Matrix rho, bool ancilla_pure_g) const {
  long dfull = rho.rows();
  for (const auto& step : steps_) {
    if (std::holds_alternative<LindbladSegment>(step.payload)) {
      const auto& seg = std::get<LindbladSegment>(step.payload);
      if (ancilla_pure_g && seg.cavity_only && seg.gblock) {
        long dc = seg.gblock->drift.rows();
        Matrix block = rho.block(0, 0, dc, dc);
        rho.block(0, 0, dc, dc) = evolve_segment(*seg.gblock, std::move(block));
      } else {
        rho = evolve_segment(seg, std::move(rho));
        if (!seg.cavity_only) ancilla_pure_g = false;
      }
    } else if (std::holds_alternative<KrausStep>(step.payload)) {
      const auto& k = std::get<KrausStep>(step.payload);
      Matrix out = Matrix::Zero(dfull, dfull);
      for (const auto& op : k.ops) out.noalias() += op * rho * op.adjoint();
      rho = std::move(out);
      if (!k.cavity_only) ancilla_pure_g = false;
    } else if (std::holds_alternative<UnitaryStep>(step.payload)) {
      const auto& u = std::get<UnitaryStep>(step.payload);
      rho = (u.u * rho * u.u.adjoint()).eval();
      if (!u.cavity_only) ancilla_pure_g = false;
    } else {
      const auto& d = std::get<DephasingStep>(step.payload);
      apply_dephasing(full_spaces_, d, rho);
    }
  }
  return rho;
}

DensityMatrix Channel::apply(const DensityMatrix& rho) const {
  if (!same_spaces(rho.spaces, cavity_spaces_))
    throw SpaceMismatch("channel input space mismatch");
  if (composed_) return composed_->second.apply(composed_->first.apply(rho));
  if (super_) {
    long d = rho.dim();
    Eigen::Map<const Vector> vin(rho.m.data(), d * d);
    Vector vout = (*super_) * vin;
    Matrix out = Eigen::Map<const Matrix>(vout.data(), d, d);
    return {out, cavity_spaces_};
  }
  if (!wraps_ancilla_) {
    return {run_steps(rho.m, false), cavity_spaces_};
  }
  long dc = dim_of(cavity_spaces_);
  Matrix full = Matrix::Zero(2 * dc, 2 * dc);
  full.block(0, 0, dc, dc) = rho.m;
  full = run_steps(std::move(full), true);
  // trace the ancilla back out
  Matrix out = full.block(0, 0, dc, dc) + full.block(dc, dc, dc, dc);
  return {out, cavity_spaces_};
}

DensityMatrix Channel::apply_keep_ancilla(const DensityMatrix& rho_full) const {
  if (!same_spaces(rho_full.spaces, full_spaces_))
    throw SpaceMismatch("channel full-space input mismatch");
  if (super_) throw ConfigError("superoperator channels have no ancilla to keep");
  return {run_steps(rho_full.m, false), full_spaces_};
}

Channel Channel::then(const Channel& next) const {
  if (!same_spaces(next.cavity_spaces_, cavity_spaces_))
    throw SpaceMismatch("composed channels must share the cavity space");
  if (super_ || next.super_) {
    Matrix s = next.to_superoperator() * to_superoperator();
    return from_superoperator(std::move(s), cavity_spaces_,
                              trace_preserving_flag && next.trace_preserving_flag);
  }
  if (wraps_ancilla_ || next.wraps_ancilla_) {
    // keep lazy: wrap both into a sequential pair via superoperator-free
    // application; the composed object re-dispatches
    Channel c;
    c.set_spaces(cavity_spaces_, cavity_spaces_, false);
    // composition of wrapped channels traces the ancilla between the parts,
    // which is exactly the measured-and-forgotten semantics we want
    c.composed_ = std::make_shared<std::pair<Channel, Channel>>(*this, next);
    return c;
  }
  Channel c = *this;
  c.steps_.insert(c.steps_.end(), next.steps_.begin(), next.steps_.end());
  c.trace_preserving_flag = trace_preserving_flag && next.trace_preserving_flag;
  return c;
}

Matrix Channel::to_superoperator() const {
  if (super_) return *super_;
  long d = dim_of(cavity_spaces_);
  Matrix s(d * d, d * d);
  Matrix unit = Matrix::Zero(d, d);
  for (long c = 0; c < d; ++c)
    for (long r = 0; r < d; ++r) {
      unit(r, c) = 1.0;
      DensityMatrix out = apply({unit, cavity_spaces_});
      unit(r, c) = 0.0;
      s.col(c * d + r) = Eigen::Map<const Vector>(out.m.data(), d * d);
    }
  return s;
}

Matrix Channel::choi_matrix() const {
  long d = dim_of(cavity_spaces_);
  Matrix s = to_superoperator();
  Matrix choi(d * d, d * d);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j)
      for (long r = 0; r < d; ++r)
        for (long c = 0; c < d; ++c) choi(i * d + r, j * d + c) = s(c * d + r, j * d + i);
  return choi;
}

void Channel::check_cp_tp(double cp_tol, double tp_tol) const {
  long d = dim_of(cavity_spaces_);
  Matrix choi = choi_matrix();
  Eigen::SelfAdjointEigenSolver<Matrix> es((choi + choi.adjoint()) / 2.0);
  double min_ev = es.eigenvalues().minCoeff();
  if (min_ev < -cp_tol)
    throw CPViolation("Choi negativity " + std::to_string(-min_ev) + " exceeds tolerance");
  if (trace_preserving_flag) {
    Matrix tr = Matrix::Zero(d, d);
    for (long i = 0; i < d; ++i)
      for (long j = 0; j < d; ++j)
        for (long r = 0; r < d; ++r) tr(i, j) += choi(i * d + r, j * d + r);
    tr -= Matrix::Identity(d, d);
    double defect = tr.cwiseAbs().maxCoeff();
    if (defect > tp_tol)
      throw ConfigError("trace-preservation defect " + std::to_string(defect));
  }
}

double Channel::ancilla_exposure() const {
  double t = 0.0;
  for (const auto& step : steps_)
    if (std::holds_alternative<LindbladSegment>(step.payload)) {
      const auto& seg = std::get<LindbladSegment>(step.payload);
      if (seg.ancilla_active) t += seg.duration;
    }
  if (composed_) t += composed_->first.ancilla_exposure() + composed_->second.ancilla_exposure();
  return t;
}

// --- noisy channel builders ----------------------------------------------------

namespace {

struct ModeOps {
  Spaces full;        // (ancilla, Alice, Bob)
  Spaces cavities;    // (Alice, Bob)
  double kerr_slope_alice = 0.0, kerr_slope_bob = 0.0;
  Matrix a_alice, a_bob, n_alice, n_bob;
  Matrix sm, sz, ee;  // ancilla lowering, sigma_z, |e><e| embedded in full
  Matrix kerr_full;   // (K_A/2) nA(nA-1) + (K_B/2) nB(nB-1), full space
  Matrix kerr_cav;
  Matrix a_alice_cav, a_bob_cav;
};

// least-squares slope of the Kerr phase rate (k/2) n(n-1) over n = 0..nmax
double kerr_rate_slope(double k, int nmax) {
  if (nmax < 1) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = nmax + 1;
  for (int n = 0; n <= nmax; ++n) {
    double rate = 0.5 * k * n * (n - 1.0);
    sx += n;
    sy += rate;
    sxx += double(n) * n;
    sxy += n * rate;
  }
  double denom = m * sxx - sx * sx;
  return denom == 0 ? 0.0 : (m * sxy - sx * sy) / denom;
}

ModeOps build_mode_ops(const Spaces& full, const NoiseModel& noise, int kerr_fit_nmax = 0,
                       double kerr_scale = 1.0) {
  ModeOps ops;
  ops.kerr_slope_alice = kerr_rate_slope(kerr_scale * noise.kerr_alice, kerr_fit_nmax);
  ops.kerr_slope_bob = kerr_rate_slope(kerr_scale * noise.kerr_bob, kerr_fit_nmax);
  ops.full = full;
  if (full.size() != 3 || full[0].label != Mode::Ancilla)
    throw SpaceMismatch("noisy channels need the canonical (ancilla, Alice, Bob) space");
  ops.cavities = {full[1], full[2]};

  ops.a_alice = embed(annihilation(full[1]), full).m;
  ops.a_bob = embed(annihilation(full[2]), full).m;
  ops.n_alice = embed(number_operator(full[1]), full).m;
  ops.n_bob = embed(number_operator(full[2]), full).m;
  ops.a_alice_cav = embed(annihilation(full[1]), ops.cavities).m;
  ops.a_bob_cav = embed(annihilation(full[2]), ops.cavities).m;

  Matrix sm2 = Matrix::Zero(2, 2);
  sm2(0, 1) = 1.0;  // |g><e|
  Matrix sz2 = Matrix::Zero(2, 2);
  sz2(0, 0) = 1.0;
  sz2(1, 1) = -1.0;
  Matrix ee2 = Matrix::Zero(2, 2);
  ee2(1, 1) = 1.0;
  ops.sm = embed({sm2, {full[0]}}, full).m;
  ops.sz = embed({sz2, {full[0]}}, full).m;
  ops.ee = embed({ee2, {full[0]}}, full).m;

  auto kerr_h = [&](const Spaces& sp, double slope_a, double slope_b) {
    Matrix na = embed(number_operator(full[1]), sp).m;
    Matrix nb = embed(number_operator(full[2]), sp).m;
    long d = na.rows();
    Matrix h = Matrix::Zero(d, d);
    h += 0.5 * kerr_scale * noise.kerr_alice * (na * na - na) - slope_a * na;
    h += 0.5 * kerr_scale * noise.kerr_bob * (nb * nb - nb) - slope_b * nb;
    return h;
  };
  ops.kerr_full = kerr_h(full, ops.kerr_slope_alice, ops.kerr_slope_bob);
  ops.kerr_cav = kerr_h(ops.cavities, ops.kerr_slope_alice, ops.kerr_slope_bob);
  return ops;
}

std::vector<Matrix> collapse_ops_full(const ModeOps& ops, const NoiseModel& noise,
                                      bool during_bs, double exposure_scale = 1.0) {
  std::vector<Matrix> ls;
  double loss_scale = (during_bs ? noise.bs_loss_enhancement : 1.0) * exposure_scale;
  if (noise.gamma_alice() > 0)
    ls.push_back(std::sqrt(noise.gamma_alice() * loss_scale * (1.0 + noise.n_th_alice)) *
                 ops.a_alice);
  if (noise.gamma_bob() > 0)
    ls.push_back(std::sqrt(noise.gamma_bob() * loss_scale * (1.0 + noise.n_th_bob)) *
                 ops.a_bob);
  if (noise.n_th_alice > 0)
    ls.push_back(std::sqrt(noise.gamma_alice() * loss_scale * noise.n_th_alice) *
                 ops.a_alice.adjoint());
  if (noise.n_th_bob > 0)
    ls.push_back(std::sqrt(noise.gamma_bob() * loss_scale * noise.n_th_bob) *
                 ops.a_bob.adjoint());
  if (noise.gamma_q() > 0)
    ls.push_back(std::sqrt(noise.gamma_q() * (1.0 + noise.n_th_q)) * ops.sm);
  if (noise.n_th_q > 0)
    ls.push_back(std::sqrt(noise.gamma_q() * noise.n_th_q) * ops.sm.adjoint());
  double gphi = noise.gamma_phi_q() * (during_bs ? noise.bs_dephasing_enhancement : 1.0);
  if (gphi > 0) ls.push_back(std::sqrt(gphi / 2.0) * ops.sz);
  return ls;
}

std::vector<Matrix> collapse_ops_cavity(const ModeOps& ops, const NoiseModel& noise,
                                        bool during_bs, double exposure_scale = 1.0) {
  std::vector<Matrix> ls;
  double loss_scale = (during_bs ? noise.bs_loss_enhancement : 1.0) * exposure_scale;
  if (noise.gamma_alice() > 0)
    ls.push_back(std::sqrt(noise.gamma_alice() * loss_scale * (1.0 + noise.n_th_alice)) *
                 ops.a_alice_cav);
  if (noise.gamma_bob() > 0)
    ls.push_back(std::sqrt(noise.gamma_bob() * loss_scale * (1.0 + noise.n_th_bob)) *
                 ops.a_bob_cav);
  if (noise.n_th_alice > 0)
    ls.push_back(std::sqrt(noise.gamma_alice() * loss_scale * noise.n_th_alice) *
                 ops.a_alice_cav.adjoint());
  if (noise.n_th_bob > 0)
    ls.push_back(std::sqrt(noise.gamma_bob() * loss_scale * noise.n_th_bob) *
                 ops.a_bob_cav.adjoint());
  return ls;
}

}  // namespace

Channel noisy_channel_of_circuit(const Circuit& circuit, const NoiseModel& noise,
                                 const PulseSchedule& schedule,
                                 const ChannelBuildOptions& options) {
  noise.validate();
  schedule.validate();
  if (schedule.entries.size() != circuit.gates.size())
    throw ConfigError("schedule does not cover the circuit");

  ModeOps ops = build_mode_ops(circuit.spaces, noise, options.kerr_frame_nmax,
                               options.kerr_scale);

  Channel chan;
  chan.set_spaces(ops.cavities, ops.full, true);

  // the ancilla leaves |g> at the first ancilla gate and is parked back by
  // the last one; everything in between counts as exposure
  long first_anc = -1, last_anc = -1;
  for (size_t i = 0; i < circuit.gates.size(); ++i) {
    auto k = circuit.gates[i].kind;
    if (k == GateSpec::Kind::AncillaRotation || k == GateSpec::Kind::CPS) {
      if (first_anc < 0) first_anc = long(i);
      last_anc = long(i);
    }
  }

  bool thermal_ancilla = noise.n_th_q > 0;

  for (size_t i = 0; i < schedule.entries.size(); ++i) {
    const auto& entry = schedule.entries[i];
    const GateSpec& gate = entry.gate;
    bool during_bs = gate.kind == GateSpec::Kind::BeamSplitter;

    Matrix h_full = ops.kerr_full;
    Matrix h_cav = ops.kerr_cav;
    bool cavity_only = false;

    switch (gate.kind) {
      case GateSpec::Kind::BeamSplitter: {
        Operator gen = tensor({creation(ops.full[1]), annihilation(ops.full[2])});
        Matrix hop = std::exp(kI * gate.phi) * gen.m;
        Matrix bilinear = hop + hop.adjoint();
        double rate = gate.theta / entry.duration;
        h_full += rate * embed({bilinear, ops.cavities}, ops.full).m;
        h_cav += rate * bilinear;
        cavity_only = true;
        break;
      }
      case GateSpec::Kind::CPS: {
        double phase = kPi * (1.0 + noise.cps_phase_error);
        h_full += -(phase / entry.duration) * (ops.n_bob * ops.ee);
        break;
      }
      case GateSpec::Kind::AncillaRotation: {
        Matrix axis(2, 2);
        if (gate.axis == Axis::Hadamard) {
          double r = 1.0 / std::sqrt(2.0);
          axis << r, r, r, -r;
        } else if (gate.axis == Axis::X) {
          axis << 0, 1, 1, 0;
        } else if (gate.axis == Axis::Y) {
          axis << 0, -kI, kI, 0;
        } else {
          axis << 1, 0, 0, -1;
        }
        double angle = (gate.axis == Axis::Hadamard ? kPi : gate.angle) *
                       (1.0 + noise.rotation_angle_error);
        h_full += (angle / (2.0 * entry.duration)) * embed({axis, {ops.full[0]}}, ops.full).m;
        break;
      }
      default:
        throw CompileError("no noise model for gate kind " + gate.kind_name());
    }

    auto seg = make_segment(h_full,
                            collapse_ops_full(ops, noise, during_bs,
                                              options.cavity_loss_scale),
                            entry.duration, entry.dt);
    seg.cavity_only = cavity_only;
    seg.ancilla_active = first_anc >= 0 && long(i) >= first_anc && long(i) <= last_anc;
    if (cavity_only && !thermal_ancilla) {
      auto block = make_segment(h_cav,
                                collapse_ops_cavity(ops, noise, during_bs,
                                                    options.cavity_loss_scale),
                                entry.duration, entry.dt);
      seg.gblock = std::make_shared<Channel::LindbladSegment>(std::move(block));
    }
    chan.push_segment(std::move(seg));

    if (during_bs && noise.qc_heating_prob_per_bs > 0) {
      Channel::DephasingStep kick;
      kick.p_joint = noise.qc_heating_prob_per_bs;
      chan.push_dephasing(kick);
    }
  }

  return chan;
}

Channel noisy_cswap_channel(const NoiseModel& noise, int cutoff_a, int cutoff_b,
                            const CswapOptions& options) {
  noise.validate();
  Spaces full{ancilla_space(), alice_space(cutoff_a), bob_space(cutoff_b)};
  ModeOps ops = build_mode_ops(full, noise);

  Channel chan;
  chan.set_spaces(ops.cavities, full, true);

  double T = options.duration;
  double g = kPi / (2.0 * T);  // full swap on resonance
  double chi = noise.chi_qb_bob;

  // dispersive frame H = -chi n_B |e><e| + g (e^{i delta t} a b^dag + h.c.):
  // the hopping is resonant for |e> at delta = chi and for |g> at delta = 0
  double delta = options.resonant_branch_e ? chi : 0.0;
  Matrix h_static = ops.kerr_full - chi * (ops.n_bob * ops.ee);

  double dt = T / double(std::max<long>(options.dt_divisor,
                                        std::lround(50.0 * T * chi / (2.0 * kPi))));
  auto seg = make_segment(h_static, collapse_ops_full(ops, noise, true), T, dt);
  Matrix hop = embed(tensor({annihilation(full[1]), creation(full[2])}), full).m;
  seg.has_drive = true;
  seg.hop = sparse_of(hop);
  seg.hop_dag = sparse_of(Matrix(hop.adjoint()));
  seg.drive_amp = g;
  seg.drive_delta = delta;
  seg.ancilla_active = true;

  // Passive phase calibration. On resonance the drive realizes
  // S exp(i q_a n_A + i q_b n_B); a pre/post rotation pair on Alice cancels
  // the n_B residue and dumps the rest onto n_A, which the |0,1> input
  // family enters with Alice empty and therefore never sees.
  double q_b = -kPi / 2.0;
  Channel::UnitaryStep upre;
  upre.u = (kI * q_b * ops.n_alice).exp();
  upre.cavity_only = true;
  Channel::UnitaryStep upost;
  upost.u = (-kI * q_b * ops.n_alice).exp();
  upost.cavity_only = true;

  chan.push_unitary(std::move(upre));
  chan.push_segment(std::move(seg));
  chan.push_unitary(std::move(upost));
  return chan;
}

ChevronMap simulate_cswap_spectroscopy(const std::vector<double>& detunings_hz,
                                       const std::vector<double>& durations_s,
                                       const NoiseModel& noise, double g_rad) {
  if (detunings_hz.empty() || durations_s.empty())
    throw ConfigError("spectroscopy grids must be nonempty");
  for (size_t i = 1; i < durations_s.size(); ++i)
    if (durations_s[i] < durations_s[i - 1])
      throw ConfigError("durations must be sorted ascending");

  Spaces two{alice_space(2), bob_space(2)};
  if (g_rad <= 0) g_rad = kPi / (2.0 * 5e-6);
  double chi = noise.chi_qb_bob;

  ChevronMap map;
  map.detunings_hz = detunings_hz;
  map.durations_s = durations_s;
  long nd = long(detunings_hz.size()), nt = long(durations_s.size());
  map.transfer_g.resize(nt, nd);
  map.transfer_e.resize(nt, nd);

  StateVector in01 = tensor({fock_state(0, two[0]), fock_state(1, two[1])});
  StateVector out10 = tensor({fock_state(1, two[0]), fock_state(0, two[1])});
  DensityMatrix rho0 = to_density(in01);
  Operator proj{out10.v * out10.v.adjoint(), two};

  std::vector<Matrix> ls;
  if (noise.gamma_alice() > 0)
    ls.push_back(std::sqrt(noise.gamma_alice()) * embed(annihilation(two[0]), two).m);
  if (noise.gamma_bob() > 0)
    ls.push_back(std::sqrt(noise.gamma_bob()) * embed(annihilation(two[1]), two).m);

  Matrix abdag = tensor({annihilation(two[0]), creation(two[1])}).m;

  double tmax = durations_s.back();
  for (long j = 0; j < nd; ++j) {
    double delta_drive = 2.0 * kPi * detunings_hz[j];
    for (int branch = 0; branch < 2; ++branch) {
      // effective drive detuning per ancilla branch
      double branch_shift = 0.0;
      if (branch == 1) branch_shift = chi;  // |e>: Bob shifted by chi
      double delta_eff = delta_drive - branch_shift;

      auto seg = make_segment(Matrix::Zero(4, 4), ls, tmax,
                              tmax / std::max<double>(400.0, 50.0 * tmax *
                                                                 (std::abs(delta_eff) +
                                                                  g_rad) /
                                                                 (2.0 * kPi)));
      seg.has_drive = true;
      seg.hop = sparse_of(abdag);
      seg.hop_dag = sparse_of(Matrix(abdag.adjoint()));
      seg.drive_amp = g_rad;
      seg.drive_delta = delta_eff;

      // manual stepping so every duration gridpoint is sampled
      long nsteps = std::max<long>(1, std::lround(tmax / seg.dt));
      double dt = tmax / double(nsteps);
      Rk4Work w;
      w.resize(4);
      Matrix rho = rho0.m;
      size_t next_sample = 0;
      double t = 0.0;
      auto record = [&](double tt, const Matrix& r) {
        while (next_sample < durations_s.size() && durations_s[next_sample] <= tt + 1e-15) {
          double p = (proj.m * r).trace().real();
          if (branch == 0)
            map.transfer_g(long(next_sample), j) = p;
          else
            map.transfer_e(long(next_sample), j) = p;
          ++next_sample;
        }
      };
      record(0.0, rho);
      for (long s = 0; s < nsteps; ++s) {
        rk4_step(seg, t, dt, rho, w);
        t += dt;
        record(t, rho);
      }
    }
  }
  map.transfer_avg = 0.5 * (map.transfer_g + map.transfer_e);

  // resonance centers from the duration nearest a full swap
  double t_swap = kPi / (2.0 * g_rad);
  long best_row = 0;
  double best = 1e300;
  for (long r = 0; r < nt; ++r)
    if (std::abs(durations_s[r] - t_swap) < best) {
      best = std::abs(durations_s[r] - t_swap);
      best_row = r;
    }
  auto peak = [&](const Eigen::MatrixXd& m) {
    long jmax = 0;
    m.row(best_row).maxCoeff(&jmax);
    // parabolic refinement
    double x = detunings_hz[jmax];
    if (jmax > 0 && jmax + 1 < nd) {
      double y0 = m(best_row, jmax - 1), y1 = m(best_row, jmax), y2 = m(best_row, jmax + 1);
      double denom = y0 - 2 * y1 + y2;
      if (std::abs(denom) > 1e-12) {
        double frac = 0.5 * (y0 - y2) / denom;
        double h = detunings_hz[1] - detunings_hz[0];
        x += frac * h;
      }
    }
    return x;
  };
  double cg = peak(map.transfer_g);
  double ce = peak(map.transfer_e);
  map.separation_hz = std::abs(ce - cg);
  map.max_transfer = std::max(map.transfer_g.maxCoeff(), map.transfer_e.maxCoeff());
  return map;
}

}  // namespace eswap
