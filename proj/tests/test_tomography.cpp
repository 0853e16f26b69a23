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
#include <random>

#include <doctest.h>

#include "eswap/circuits.hpp"
#include "eswap/tomography.hpp"

using namespace eswap;

namespace {
constexpr double kPi = std::numbers::pi;
const cxd kI{0.0, 1.0};

DensityMatrix random_rank2(int cutoff, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Spaces two{alice_space(cutoff), bob_space(cutoff)};
  long d = cutoff * cutoff;
  Matrix rho = Matrix::Zero(d, d);
  for (int r = 0; r < 2; ++r) {
    Vector v(d);
    for (long i = 0; i < d; ++i) v(i) = cxd(g(rng), g(rng));
    v.normalize();
    rho += (r == 0 ? 0.7 : 0.3) * (v * v.adjoint());
  }
  return {rho, two};
}
}  // namespace

TEST_CASE("single-mode wigner values") {
  ModeSpace sp = alice_space(20);
  DensityMatrix vac = to_density(fock_state(0, sp));
  CHECK(wigner_single(vac, 0.0) == doctest::Approx(2.0 / kPi).epsilon(1e-10));
  CHECK(wigner_single(vac, 0.0, true) == doctest::Approx(1.0).epsilon(1e-10));

  DensityMatrix three = to_density(fock_state(3, sp));
  CHECK(wigner_single(three, 0.0) == doctest::Approx(-2.0 / kPi).epsilon(1e-10));

  // statistical mixture of |0> and |3>: the parity cancels at the origin
  DensityMatrix mix{0.5 * (vac.m + three.m), {sp}};
  CHECK(std::abs(wigner_single(mix, 0.0, true)) < 1e-10);
}

TEST_CASE("wigner integral approximates the trace") {
  ModeSpace sp = alice_space(44);
  DensityMatrix rho = to_density(coherent_state(0.8, sp));
  double sum = 0.0;
  int n = 41;
  double extent = 2.8, h = 2 * extent / (n - 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cxd beta(-extent + i * h, -extent + j * h);
      sum += wigner_single(rho, beta) * h * h;
    }
  CHECK(sum == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("joint wigner of |0,3> and the eswap output") {
  int c = 6;
  Spaces two{alice_space(c), bob_space(c)};
  StateVector s03 = tensor({fock_state(0, two[0]), fock_state(3, two[1])});
  CHECK(joint_wigner(to_density(s03), 0.0, 0.0) == doctest::Approx(-1.0).epsilon(1e-10));

  Operator u = eswap_ideal(kPi / 4.0, two[0], two[1]);
  DensityMatrix out = apply(u, to_density(s03));
  CHECK(joint_wigner(out, 0.0, 0.0) == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("joint wigner factorizes on product states") {
  int c = 8;
  Spaces two{alice_space(c), bob_space(c)};
  StateVector psi_a = coherent_state(0.6, two[0]);
  StateVector psi_b = fock_state(1, two[1]);
  DensityMatrix ra = to_density(psi_a);
  DensityMatrix rb = to_density(psi_b);
  DensityMatrix prod = to_density(tensor({psi_a, psi_b}));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int k = 0; k < 12; ++k) {
    cxd b1(u(rng), u(rng)), b2(u(rng), u(rng));
    double joint = joint_wigner(prod, b1, b2);
    double wa = wigner_single(ra, b1, true);
    double wb = wigner_single(rb, b2, true);
    CHECK(std::abs(joint - wa * wb) < 1e-9);
  }
}

TEST_CASE("parity shots: consistency, contrast and reproducibility") {
  int c = 6;
  Spaces two{alice_space(c), bob_space(c)};
  StateVector s03 = tensor({fock_state(0, two[0]), fock_state(3, two[1])});
  Operator u = eswap_ideal(kPi / 4.0, two[0], two[1]);
  DensityMatrix rho = apply(u, to_density(s03));

  std::vector<std::pair<cxd, cxd>> pts = {{0.0, 0.0}, {cxd(0.4, 0.1), cxd(-0.3, 0.2)}};
  long n = 20000;

  auto rec = sample_parity_shots(rho, pts, n, 0.0, 0.0, 123u);
  auto means = rec.point_means();
  for (size_t k = 0; k < pts.size(); ++k) {
    double exact = joint_wigner(rho, pts[k].first, pts[k].second);
    double sigma = std::sqrt((1.0 - exact * exact) / double(n)) + 1e-12;
    CHECK(std::abs(means[k] - exact) < 3.0 * sigma + 1e-3);
  }

  // readout error scales the contrast by (1-2e_a)(1-2e_b)
  double ea = 0.015, eb = 0.015;
  auto rec2 = sample_parity_shots(rho, {{0.0, 0.0}}, 200000, ea, eb, 99u);
  double scaled = rec2.point_means()[0];
  double expected = joint_wigner(rho, 0.0, 0.0) * (1 - 2 * ea) * (1 - 2 * eb);
  CHECK(scaled == doctest::Approx(expected).epsilon(0.02));

  // identical seeds reproduce identical shots
  auto rec3 = sample_parity_shots(rho, pts, 50, 0.01, 0.02, 777u);
  auto rec4 = sample_parity_shots(rho, pts, 50, 0.01, 0.02, 777u);
  REQUIRE(rec3.shots.size() == rec4.shots.size());
  for (size_t i = 0; i < rec3.shots.size(); ++i) {
    CHECK(rec3.shots[i].parity_a == rec4.shots[i].parity_a);
    CHECK(rec3.shots[i].parity_b == rec4.shots[i].parity_b);
  }

  CHECK_THROWS_AS(sample_parity_shots(rho, pts, 10, 0.0, 0.0, std::nullopt),
                  SeedRequired);
}

TEST_CASE("vacuum parity shots are deterministic at the origin") {
  int c = 4;
  Spaces two{alice_space(c), bob_space(c)};
  DensityMatrix vac =
      to_density(tensor({fock_state(0, two[0]), fock_state(0, two[1])}));
  auto rec = sample_parity_shots(vac, {{0.0, 0.0}}, 500, 0.0, 0.0, 5u);
  for (const auto& s : rec.shots) {
    CHECK(s.parity_a == 1);
    CHECK(s.parity_b == 1);
  }
}

TEST_CASE("exact-grid reconstruction round trip") {
  int c = 4;
  DensityMatrix rho = random_rank2(c, 42);
  auto pts = reconstruction_point_set(c);
  WignerReconstructor rec(pts, c);
  CHECK(rec.rank() == rec.parameter_count());
  auto values = rec.exact_values(rho);
  auto result = rec.solve(values);
  CHECK(state_fidelity(result.rho, rho) / rho.trace_real() > 0.999);
  CHECK(result.residual < 1e-9);
  CHECK(trace_distance(result.rho, rho) < 1e-7);
}

TEST_CASE("reconstruction recovers the contrast-scaled trace from shots") {
  int c = 3;
  Spaces two{alice_space(c), bob_space(c)};
  DensityMatrix vac =
      to_density(tensor({fock_state(0, two[0]), fock_state(0, two[1])}));
  auto pts = reconstruction_point_set(c, 2.45, 4, 12);
  WignerReconstructor rec(pts, c);

  double e = 0.025;
  auto record = sample_parity_shots(vac, pts, 500, e, e, 2024u);
  auto result = rec.solve(record.point_means());
  double expected_trace = (1 - 2 * e) * (1 - 2 * e);
  CHECK(result.rho.trace_real() > expected_trace - 0.05);
  CHECK(result.rho.trace_real() < expected_trace + 0.05);
  // the reconstructed state still looks like vacuum
  StateVector v00 = tensor({fock_state(0, two[0]), fock_state(0, two[1])});
  CHECK(state_fidelity(result.rho, v00) / result.rho.trace_real() > 0.95);
}

TEST_CASE("degenerate grids are rejected") {
  int c = 3;
  auto pts = reconstruction_point_set(c);
  WignerReconstructor rec(pts, c);
  std::vector<double> zeros(pts.size(), 0.0);
  CHECK_THROWS_AS(rec.solve(zeros), NonConvergence);

  std::vector<std::pair<cxd, cxd>> few = {{0.0, 0.0}, {0.3, 0.1}};
  CHECK_THROWS_AS(WignerReconstructor(few, c), UnderdeterminedGrid);

  // many points that all coincide carry no information
  std::vector<std::pair<cxd, cxd>> collapsed(100, {cxd(0.2, 0.1), cxd(-0.1, 0.3)});
  CHECK_THROWS_AS(WignerReconstructor(collapsed, 3), UnderdeterminedGrid);
}

TEST_CASE("three-mode assembly: identity channel leaves no coherence blocks") {
  int c = 3;
  Spaces cav{alice_space(c), bob_space(c)};
  DensityMatrix rho_ab =
      to_density(tensor({fock_state(0, cav[0]), fock_state(1, cav[1])}));
  long dc = c * c;
  Matrix full = Matrix::Zero(2 * dc, 2 * dc);
  full.block(0, 0, dc, dc) = rho_ab.m;
  Spaces three{ancilla_space(), cav[0], cav[1]};
  auto cond = ancilla_conditionals({full, three});
  auto asm1 = assemble_three_mode(cond[0], cond[1], cond[2], cond[3]);
  CHECK(asm1.rho.m.block(0, dc, dc, dc).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(asm1.rho.m.block(dc, 0, dc, dc).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((asm1.rho.m.block(0, 0, dc, dc) - rho_ab.m).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(asm1.hermiticity_residual < 1e-12);
}

TEST_CASE("three-mode assembly reproduces the cswap output exactly") {
  int c = 3;
  Operator cs = cswap_ideal(ancilla_space(), alice_space(c), bob_space(c));
  Vector anc(2);
  anc << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  StateVector in = tensor({StateVector{anc, {ancilla_space()}},
                           fock_state(0, alice_space(c)), fock_state(1, bob_space(c))});
  DensityMatrix out = apply(cs, to_density(in));

  // synthetic conditional tomography with the Y-eigenstate convention
  auto cond = ancilla_conditionals(out, false);
  auto assembled = assemble_three_mode(cond[0], cond[1], cond[2], cond[3]);
  CHECK(trace_distance(assembled.rho, out) < 1e-9);
  CHECK(state_fidelity(assembled.rho, out) > 0.999);

  // the literal |-> = (|g>-|e>)/sqrt(2) reading cannot reproduce the state
  auto cond_lit = ancilla_conditionals(out, true);
  auto assembled_lit =
      assemble_three_mode(cond_lit[0], cond_lit[1], cond_lit[2], cond_lit[3]);
  CHECK(trace_distance(assembled_lit.rho, out) > 0.2);
}

TEST_CASE("assembly is exact for every synthetic channel tried") {
  int c = 3;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  Spaces three{ancilla_space(), alice_space(c), bob_space(c)};
  long d = 2 * c * c;
  for (int trial = 0; trial < 3; ++trial) {
    Vector v(d);
    for (long i = 0; i < d; ++i) v(i) = cxd(g(rng), g(rng));
    v.normalize();
    DensityMatrix rho{v * v.adjoint(), three};
    auto cond = ancilla_conditionals(rho);
    auto assembled = assemble_three_mode(cond[0], cond[1], cond[2], cond[3]);
    CHECK(trace_distance(assembled.rho, rho) < 1e-9);
  }
}

TEST_CASE("pauli points plan matches the intrinsic correlators on code states") {
  LogicalEncoding enc = make_encoding("coherent", 18, 1.41);
  auto plan = pauli_points_plan(enc);
  REQUIRE(plan.points.size() == 16);

  DensityMatrix rho = to_density(encode_two_qubit(enc, "01"));
  auto parities = joint_parity_values(rho, plan.points);
  CorrelatorSet from_plan = plan.correlators_from_parities(parities);
  CorrelatorSet intrinsic = correlators(rho, enc);
  for (int i = 0; i < 16; ++i)
    CHECK(std::abs(from_plan.values[i] - intrinsic.values[i]) < 0.02);

  // entangled output too
  DensityMatrix out = ideal_eswap_channel(18)(kPi / 4.0, rho);
  auto p2 = joint_parity_values(out, plan.points);
  CorrelatorSet c2 = plan.correlators_from_parities(p2);
  CorrelatorSet i2 = correlators(out, enc);
  for (int i = 0; i < 16; ++i) CHECK(std::abs(c2.values[i] - i2.values[i]) < 0.02);

  // maximally mixed logical state: only <II> survives
  auto paulis = logical_pauli_operators(enc);
  DensityMatrix mixed{paulis[0].m / 4.0, paulis[0].spaces};
  auto pm = joint_parity_values(mixed, plan.points);
  CorrelatorSet cm = plan.correlators_from_parities(pm);
  CHECK(cm["II"] == doctest::Approx(1.0).epsilon(1e-6));
  for (int i = 1; i < 16; ++i) CHECK(std::abs(cm.values[i]) < 1e-6);

  LogicalEncoding fock = make_encoding("fock", 4);
  CHECK_THROWS_AS(pauli_points_plan(fock), EncodingUnsupported);
}

TEST_CASE("grid and record persist through CSV") {
  WignerGrid grid;
  grid.points = {{cxd(0.125, -0.5), cxd(1.0 / 3.0, 0.7)}, {cxd(-0.25, 0.0), cxd(0.0, 0.1)}};
  grid.values = {0.123456789012345678, -0.9876543210987654};
  WignerGrid back = wigner_grid_from_csv(to_csv(grid));
  REQUIRE(back.points.size() == 2);
  CHECK(back.points[0].beta1 == grid.points[0].beta1);
  CHECK(back.points[0].beta2.value() == grid.points[0].beta2.value());
  CHECK(back.values[0] == grid.values[0]);
  CHECK(back.values[1] == grid.values[1]);

  MeasurementRecord rec;
  rec.shots = {{0, 1, -1}, {1, -1, -1}};
  MeasurementRecord rb = record_from_csv(to_csv(rec));
  REQUIRE(rb.shots.size() == 2);
  CHECK(rb.shots[1].parity_a == -1);
  CHECK(rb.shots[0].point_index == 0);
}
