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

#include <cmath>
#include <numbers>

#include <doctest.h>

#include "eswap/dynamics.hpp"
#include "eswap/encodings.hpp"

using namespace eswap;

namespace {
constexpr double kPi = std::numbers::pi;
const cxd kI{0.0, 1.0};
}  // namespace

TEST_CASE("lindblad with H=0 and no collapse is the identity map") {
  ModeSpace sp = alice_space(4);
  StateVector psi = coherent_state(0.8, sp);
  DensityMatrix rho = to_density(psi);
  DensityMatrix out = lindblad_evolve(rho, zero_operator({sp}), {}, 1e-6, 1e-8);
  CHECK((out.m - rho.m).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single-cavity decay follows the exponential law") {
  ModeSpace sp = alice_space(8);
  double gamma = 1.0 / 250e-6;
  StateVector psi = coherent_state(1.2, sp);
  DensityMatrix rho = to_density(psi);
  Operator l{std::sqrt(gamma) * annihilation(sp).m, {sp}};
  double t = 40e-6;
  DensityMatrix out = lindblad_evolve(rho, zero_operator({sp}), {l}, t, t / 200.0);
  double n0 = expectation(number_operator(sp), rho).real();
  double nt = expectation(number_operator(sp), out).real();
  CHECK(nt == doctest::Approx(n0 * std::exp(-gamma * t)).epsilon(1e-4));
  // trace drift stays tiny
  CHECK(std::abs(out.trace_real() - 1.0) < 1e-7);
}

TEST_CASE("transmon coherence decays at 1/T2") {
  ModeSpace sp = ancilla_space();
  double t1 = 75e-6, t2 = 30e-6;
  double gq = 1.0 / t1, gphi = 1.0 / t2 - 0.5 / t1;
  Matrix sm = Matrix::Zero(2, 2);
  sm(0, 1) = 1.0;
  Matrix sz = Matrix::Zero(2, 2);
  sz(0, 0) = 1.0;
  sz(1, 1) = -1.0;
  Vector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  DensityMatrix rho = to_density({plus, {sp}});
  std::vector<Operator> ls = {{std::sqrt(gq) * sm, {sp}}, {std::sqrt(gphi / 2.0) * sz, {sp}}};
  double t = 10e-6;
  DensityMatrix out = lindblad_evolve(rho, zero_operator({sp}), ls, t, t / 200.0);
  double coh = std::abs(out.m(0, 1));
  CHECK(coh == doctest::Approx(0.5 * std::exp(-t / t2)).epsilon(1e-4));
}

TEST_CASE("step size guard throws") {
  ModeSpace sp = alice_space(6);
  Operator h{200.0 * 5e4 * number_operator(sp).m, {sp}};
  DensityMatrix rho = to_density(coherent_state(1.0, sp));
  CHECK_THROWS_AS(lindblad_evolve(rho, h, {}, 1e-3, 1e-3 / 60.0), StepTooLarge);
  CHECK_THROWS_AS(lindblad_evolve(rho, h, {}, 1e-3, 1e-3 / 10.0), ConfigError);
}

TEST_CASE("driven beamsplitter: resonant swap and detuned suppression") {
  Spaces two{alice_space(2), bob_space(2)};
  double g = 2.0 * kPi * 50e3;
  auto drive = driven_bs_hamiltonian(g, 0.0, two);
  DensityMatrix rho = to_density(tensor({fock_state(1, two[0]), fock_state(0, two[1])}));

  double t = kPi / (2.0 * g);
  DensityMatrix out = lindblad_evolve_driven(rho, drive, {}, t, t / 400.0);
  StateVector target = tensor({fock_state(0, two[0]), fock_state(1, two[1])});
  CHECK(state_fidelity(out, target) == doctest::Approx(1.0).epsilon(1e-3));

  // detuned: transfer capped by the Rabi formula
  double delta = 10.0 * g;
  auto detuned = driven_bs_hamiltonian(g, delta, two);
  double cap = g * g / (g * g + 0.25 * delta * delta);
  double omega = std::sqrt(g * g + 0.25 * delta * delta);
  double tpeak = kPi / (2.0 * omega);
  DensityMatrix out2 = lindblad_evolve_driven(rho, detuned, {}, tpeak, tpeak / 400.0);
  double p = state_fidelity(out2, target);
  CHECK(p < 0.05);
  CHECK(p == doctest::Approx(cap).epsilon(0.02));
}

TEST_CASE("kerr unitary basics") {
  ModeSpace a = alice_space(6), b = bob_space(6);
  Operator k0 = kerr_unitary(0.0, 0.0, 1e-5, a, b);
  CHECK((k0.m - Matrix::Identity(36, 36)).cwiseAbs().maxCoeff() == 0.0);

  double ka = 2 * kPi * 6e3, kb = 2 * kPi * 4e3, t = 7e-6;
  Operator k = kerr_unitary(ka, kb, t, a, b);
  for (int na = 0; na < 6; ++na)
    for (int nb = 0; nb < 6; ++nb) {
      cxd expect = std::exp(cxd(0, -t * 0.5 * (ka * na * (na - 1) + kb * nb * (nb - 1))));
      CHECK(std::abs(k.m(na * 6 + nb, na * 6 + nb) - expect) < 1e-12);
    }
}

TEST_CASE("kerr during both beamsplitters distorts the entangled cat") {
  int c = 18;
  double alpha = 1.41;
  LogicalEncoding enc = make_encoding("coherent", c, alpha);
  StateVector in = encode_two_qubit(enc, "01");
  Operator u = eswap_ideal(kPi / 4.0, alice_space(c), bob_space(c));
  StateVector cat = apply(u, in);
  Operator k = kerr_unitary(2 * kPi * 6e3, 2 * kPi * 4e3, 2.0 * durations::beamsplitter,
                            alice_space(c), bob_space(c));
  double f = state_fidelity(apply(k, cat), cat);
  CHECK(f < 0.95);
  CHECK(f > 0.3);
}

TEST_CASE("noiseless channel reproduces the compiled unitary on QPT inputs") {
  int c = 4;
  Circuit circ = compile_eswap(kPi / 4.0, c, c);
  NoiseModel none = NoiseModel::noiseless();
  PulseSchedule sched = PulseSchedule::from_circuit(circ, none);
  Channel chan = noisy_channel_of_circuit(circ, none, sched);

  LogicalEncoding enc = make_encoding("fock", c);
  Operator ideal = eswap_ideal(kPi / 4.0, alice_space(c), bob_space(c));
  double worst = 0.0;
  for (const std::string a : {"0", "1", "+", "i"})
    for (const std::string b : {"0", "1", "+", "i"}) {
      StateVector in = encode_two_qubit(enc, a + b);
      DensityMatrix out = chan.apply(to_density(in));
      DensityMatrix want = apply(ideal, to_density(in));
      worst = std::max(worst, trace_distance(out, want));
    }
  CHECK(worst < 1e-6);
}

TEST_CASE("ancilla exposure counter is schedule-derived") {
  Circuit circ = compile_eswap(0.3, 4, 4);
  NoiseModel noise;  // table defaults
  PulseSchedule sched = PulseSchedule::from_circuit(circ, noise);
  Channel chan = noisy_channel_of_circuit(circ, noise, sched);
  double expected = 2.0 * durations::cps + 3.0 * durations::rotation;
  CHECK(chan.ancilla_exposure() == doctest::Approx(expected).epsilon(1e-12));
  // the slow beamsplitters do not count
  CHECK(chan.ancilla_exposure() < durations::beamsplitter);
}

TEST_CASE("g-block fast path agrees with the full evolution") {
  int c = 3;
  Circuit circ = compile_eswap(0.6, c, c);
  NoiseModel noise;
  PulseSchedule sched = PulseSchedule::from_circuit(circ, noise, 60);
  Channel chan = noisy_channel_of_circuit(circ, noise, sched);

  StateVector in = tensor({fock_state(0, alice_space(c)), fock_state(1, bob_space(c))});
  DensityMatrix out_fast = chan.apply(to_density(in));

  Spaces full{ancilla_space(), alice_space(c), bob_space(c)};
  long dc = c * c;
  Matrix big = Matrix::Zero(2 * dc, 2 * dc);
  big.block(0, 0, dc, dc) = to_density(in).m;
  DensityMatrix out_full = chan.apply_keep_ancilla({big, full});
  Matrix traced = out_full.m.block(0, 0, dc, dc) + out_full.m.block(dc, dc, dc, dc);
  CHECK((out_fast.m - traced).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("noisy channel is CP and TP at small cutoff") {
  int c = 3;
  Circuit circ = compile_eswap(kPi / 4.0, c, c);
  NoiseModel noise;
  noise.qc_heating_prob_per_bs = 0.01;
  PulseSchedule sched = PulseSchedule::from_circuit(circ, noise, 60);
  Channel chan = noisy_channel_of_circuit(circ, noise, sched);
  chan.check_cp_tp(1e-6, 1e-6);
}

TEST_CASE("channel composition order matches gate order") {
  ModeSpace a = alice_space(3), b = bob_space(3);
  Spaces two{a, b};
  Operator bs = beamsplitter_unitary(kPi / 4.0, 0.0, a, b);
  Operator pa = embed(parity_operator(a), two);
  Channel c1 = Channel::from_unitary(bs);
  Channel c2 = Channel::from_unitary(pa);
  Matrix s12 = c1.then(c2).to_superoperator();
  Matrix s21 = c2.then(c1).to_superoperator();
  Matrix manual = c2.to_superoperator() * c1.to_superoperator();
  CHECK((s12 - manual).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((s12 - s21).cwiseAbs().maxCoeff() > 1e-3);  // the pair does not commute
}

TEST_CASE("loss-only noise never increases total photon number") {
  int c = 4;
  Circuit circ = compile_eswap(kPi / 4.0, c, c);
  NoiseModel noise = NoiseModel::noiseless();
  noise.t1_alice = 100e-6;
  noise.t1_bob = 150e-6;
  PulseSchedule sched = PulseSchedule::from_circuit(circ, noise, 60);
  Channel chan = noisy_channel_of_circuit(circ, noise, sched);
  Spaces two{alice_space(c), bob_space(c)};
  Operator ntot{embed(number_operator(alice_space(c)), two).m +
                    embed(number_operator(bob_space(c)), two).m,
                two};
  LogicalEncoding enc = make_encoding("fock", c);
  for (const std::string label : {"01", "1+", "ii"}) {
    DensityMatrix rho = to_density(encode_two_qubit(enc, label));
    double before = expectation(ntot, rho).real();
    double after = expectation(ntot, chan.apply(rho)).real();
    CHECK(after <= before + 1e-9);
  }
}

TEST_CASE("Table-S2 noise adds a few percent infidelity to the Fock eSWAP") {
  int c = 4;
  Circuit circ = compile_eswap(kPi / 4.0, c, c);
  NoiseModel noise;
  noise.qc_heating_prob_per_bs = 0.01;
  PulseSchedule sched = PulseSchedule::from_circuit(circ, noise);
  Channel chan = noisy_channel_of_circuit(circ, noise, sched);
  LogicalEncoding enc = make_encoding("fock", c);
  Operator ideal = eswap_ideal(kPi / 4.0, alice_space(c), bob_space(c));
  double total = 0.0;
  int count = 0;
  for (const std::string a : {"0", "1", "+", "i"})
    for (const std::string b : {"0", "1", "+", "i"}) {
      StateVector in = encode_two_qubit(enc, a + b);
      DensityMatrix out = chan.apply(to_density(in));
      StateVector want = apply(ideal, in);
      total += state_fidelity(out, want);
      ++count;
    }
  double infidelity = 1.0 - total / count;
  CHECK(infidelity > 0.02);
  CHECK(infidelity < 0.08);
}

TEST_CASE("driven conditional swap approximates the ideal Fredkin") {
  int c = 3;
  NoiseModel none = NoiseModel::noiseless();
  Channel cswap = noisy_cswap_channel(none, c, c, {});
  Operator ideal = cswap_ideal(ancilla_space(), alice_space(c), bob_space(c));
  Spaces full{ancilla_space(), alice_space(c), bob_space(c)};

  Vector anc_states[4];
  anc_states[0] = Vector(2);
  anc_states[0] << 1, 0;
  anc_states[1] = Vector(2);
  anc_states[1] << 0, 1;
  anc_states[2] = Vector(2);
  anc_states[2] << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  anc_states[3] = Vector(2);
  anc_states[3] << 1 / std::sqrt(2.0), -1 / std::sqrt(2.0);

  StateVector cav01 = tensor({fock_state(0, alice_space(c)), fock_state(1, bob_space(c))});
  for (const auto& anc : anc_states) {
    StateVector in = tensor({StateVector{anc, {ancilla_space()}}, cav01});
    DensityMatrix out = cswap.apply_keep_ancilla(to_density(in));
    StateVector want = apply(ideal, in);
    CHECK(state_fidelity(out, want) > 0.99);
  }
}

TEST_CASE("conditional-swap spectroscopy resolves the dispersive splitting") {
  NoiseModel noise;
  std::vector<double> detunings, durations;
  for (int k = -8; k <= 34; ++k) detunings.push_back(k * 60e3);
  for (int k = 0; k <= 10; ++k) durations.push_back(k * 1e-6);
  ChevronMap map = simulate_cswap_spectroscopy(detunings, durations,
                                               NoiseModel::noiseless());
  CHECK(map.separation_hz == doctest::Approx(1.26e6).epsilon(0.05));
  CHECK(map.max_transfer > 0.98);
  // zero-duration row has no transfer
  CHECK(map.transfer_g.row(0).maxCoeff() < 1e-12);
  CHECK(map.transfer_e.row(0).maxCoeff() < 1e-12);
  (void)noise;
}

TEST_CASE("noise model validation") {
  NoiseModel bad;
  bad.t2_q = 200e-6;  // > 2 T1
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  NoiseModel neg;
  neg.t1_alice = -1.0;
  CHECK_THROWS_AS(neg.validate(), ConfigError);
  NoiseModel ok;
  ok.validate();
  CHECK(ok.gamma_phi_q() > 0.0);
}

TEST_CASE("schedule invariants") {
  Circuit circ = compile_eswap(0.2, 3, 3);
  CHECK_THROWS_AS(PulseSchedule::from_circuit(circ, NoiseModel{}, 10), ConfigError);
  PulseSchedule s = PulseSchedule::from_circuit(circ, NoiseModel{});
  s.validate();
  for (const auto& e : s.entries) CHECK(e.dt <= e.duration / 50.0 + 1e-18);
  CHECK(s.total_duration() ==
        doctest::Approx(2 * durations::beamsplitter + 2 * durations::cps +
                        3 * durations::rotation));
}
