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

#include "eswap/circuits.hpp"
#include "eswap/encodings.hpp"

using namespace eswap;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("encoding photon numbers") {
  LogicalEncoding fock = make_encoding("fock", 4);
  Operator n = number_operator(alice_space(4));
  CHECK(expectation(n, fock.codeword(1, Mode::Alice)).real() == doctest::Approx(1.0));
  CHECK(fock.nbar == doctest::Approx(0.5));

  LogicalEncoding binom = make_encoding("binomial", 8);
  Operator n8 = number_operator(alice_space(8));
  CHECK(expectation(n8, binom.codeword(0, Mode::Alice)).real() == doctest::Approx(2.0));
  CHECK(expectation(n8, binom.codeword(1, Mode::Alice)).real() == doctest::Approx(2.0));
  CHECK(binom.nbar == doctest::Approx(2.0));
  CHECK(std::abs(inner(binom.codeword(0, Mode::Alice), binom.codeword(1, Mode::Alice))) ==
        0.0);
}

TEST_CASE("coherent codeword overlap is e^{-2 alpha^2}") {
  double alpha = 1.41;
  LogicalEncoding enc = make_encoding("coherent", 20, alpha);
  cxd s = inner(enc.codeword(0, Mode::Alice), enc.codeword(1, Mode::Alice));
  CHECK(s.real() == doctest::Approx(std::exp(-2.0 * alpha * alpha)).epsilon(1e-6));
  CHECK(s.real() == doctest::Approx(0.0187).epsilon(5e-3));
  CHECK(std::abs(s.imag()) < 1e-12);
  CHECK(enc.codeword(0, Mode::Alice).norm() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("encode_two_qubit product states") {
  LogicalEncoding fock = make_encoding("fock", 3);
  StateVector s01 = encode_two_qubit(fock, "01");
  StateVector expected =
      tensor({fock_state(0, alice_space(3)), fock_state(1, bob_space(3))});
  CHECK((s01.v - expected.v).cwiseAbs().maxCoeff() == 0.0);

  double alpha = 1.41;
  LogicalEncoding coh = make_encoding("coherent", 18, alpha);
  StateVector in = encode_two_qubit(coh, "01");
  StateVector paper = tensor({coherent_state(-alpha, alice_space(18)),
                              coherent_state(alpha, bob_space(18))});
  CHECK(std::abs(inner(in, paper)) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(in.norm() == doctest::Approx(1.0).epsilon(1e-10));

  LogicalEncoding binom = make_encoding("binomial", 8);
  StateVector pp = encode_two_qubit(binom, "++");
  Vector plus = (binom.cw0 + binom.cw1) / std::sqrt(2.0);
  StateVector expect2 = tensor({StateVector{plus, {alice_space(8)}},
                                StateVector{plus, {bob_space(8)}}});
  CHECK((pp.v - expect2.v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("logical Paulis: algebra and projector") {
  for (const char* name : {"fock", "binomial", "coherent"}) {
    LogicalEncoding enc = make_encoding(name, 12);
    auto p = logical_pauli_single(enc, Mode::Alice);
    // X Z = -iY on the logical subspace
    Matrix xz = p[1].m * p[3].m;
    Matrix miy = cxd(0.0, -1.0) * p[2].m;
    CHECK((xz - miy).cwiseAbs().maxCoeff() < 1e-12);
    // Paulis square to the projector
    for (int i = 1; i < 4; ++i)
      CHECK((p[i].m * p[i].m - p[0].m).cwiseAbs().maxCoeff() < 1e-12);
    // Hermitian
    for (int i = 0; i < 4; ++i) CHECK(p[i].is_hermitian(1e-12));
  }
}

TEST_CASE("all 16 two-qubit Paulis are trace-orthogonal on the code space") {
  LogicalEncoding enc = make_encoding("coherent", 14, 1.2);
  auto paulis = logical_pauli_operators(enc);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      double t = (paulis[i].m * paulis[j].m).trace().real();
      CHECK(std::abs(t - (i == j ? 4.0 : 0.0)) < 1e-9);
    }
}

TEST_CASE("fock logical Z is |0><0| - |1><1| embedded") {
  LogicalEncoding enc = make_encoding("fock", 4);
  auto p = logical_pauli_single(enc, Mode::Bob);
  Matrix z = Matrix::Zero(4, 4);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  CHECK((p[3].m - z).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coherent logical Z on a raw codeword deviates by the overlap correction") {
  double alpha = 1.41;
  LogicalEncoding enc = make_encoding("coherent", 20, alpha);
  auto p = logical_pauli_single(enc, Mode::Alice);
  double s = std::exp(-2.0 * alpha * alpha);
  // explicit projection arithmetic: <cw1|Z|cw1> = -sqrt(1 - s^2)
  double z1 = expectation(p[3], enc.codeword(1, Mode::Alice)).real();
  CHECK(z1 == doctest::Approx(-std::sqrt(1.0 - s * s)).epsilon(1e-9));
  double z0 = expectation(p[3], enc.codeword(0, Mode::Alice)).real();
  CHECK(z0 == doctest::Approx(std::sqrt(1.0 - s * s)).epsilon(1e-9));
  CHECK(std::abs(z0) < 1.0);
  CHECK(std::abs(z0) > 1.0 - s);
}

TEST_CASE("orthogonalization route does not matter") {
  double alpha = 1.3;
  LogicalEncoding enc = make_encoding("coherent", 16, alpha);
  // independent Loewdin construction via S^{-1/2}
  double s = enc.cw0.dot(enc.cw1).real();
  double pco = 0.5 * (1.0 / std::sqrt(1.0 + s) + 1.0 / std::sqrt(1.0 - s));
  double qco = 0.5 * (1.0 / std::sqrt(1.0 + s) - 1.0 / std::sqrt(1.0 - s));
  Vector b0 = pco * enc.cw0 + qco * enc.cw1;
  Vector b1 = qco * enc.cw0 + pco * enc.cw1;
  CHECK((enc.basis0 - b0).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((enc.basis1 - b1).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("correlators of simple states") {
  LogicalEncoding fock = make_encoding("fock", 4);
  DensityMatrix rho = to_density(encode_two_qubit(fock, "01"));
  CorrelatorSet c = correlators(rho, fock);
  CHECK(c["II"] == doctest::Approx(1.0));
  CHECK(c["ZZ"] == doctest::Approx(-1.0));
  CHECK(c["ZI"] == doctest::Approx(1.0));
  CHECK(c["IZ"] == doctest::Approx(-1.0));
  CHECK(std::abs(c["XY"]) < 1e-12);

  // maximally mixed logical state: everything vanishes except <II>
  auto paulis = logical_pauli_operators(fock);
  DensityMatrix mixed{paulis[0].m / 4.0, paulis[0].spaces};
  CorrelatorSet cm = correlators(mixed, fock);
  CHECK(cm["II"] == doctest::Approx(1.0));
  for (int i = 1; i < 16; ++i) CHECK(std::abs(cm.values[i]) < 1e-12);
}

TEST_CASE("ideal eSWAP(pi/4) output in coherent encoding has two-qubit pattern") {
  LogicalEncoding enc = make_encoding("coherent", 18, 1.41);
  DensityMatrix rho_in = to_density(encode_two_qubit(enc, "01"));
  DensityMatrix rho = ideal_eswap_channel(18)(kPi / 4.0, rho_in);
  CorrelatorSet c = correlators(rho, enc);
  CHECK(c["II"] > 0.99);
  CHECK(c["ZZ"] < -0.95);
  CHECK(c["XY"] < -0.9);
  CHECK(c["YX"] > 0.9);
  for (const std::string label : {"IX", "IY", "IZ", "XI", "YI", "ZI"})
    CHECK(std::abs(c[label]) < 0.05);
}

TEST_CASE("direct fidelity estimation") {
  // plug-in: the paper's headline number from representative bar values
  CorrelatorSet bars;
  bars.values[pauli_index("II")] = 0.96;
  bars.values[pauli_index("XY")] = -0.65;
  bars.values[pauli_index("YX")] = 0.70;
  bars.values[pauli_index("ZZ")] = -0.65;
  CHECK(direct_fidelity_estimate(bars) == doctest::Approx(0.74));

  // product state |0_L 1_L>: 1/4 (1 - 0 + 0 + 1) = 0.5
  LogicalEncoding fock = make_encoding("fock", 4);
  CorrelatorSet c = correlators(to_density(encode_two_qubit(fock, "01")), fock);
  CHECK(direct_fidelity_estimate(c) == doctest::Approx(0.5).epsilon(1e-10));

  // ideal entangled cat at alpha = 1.41: above 0.95 but below 1 from
  // the codeword non-orthogonality
  LogicalEncoding coh = make_encoding("coherent", 18, 1.41);
  DensityMatrix rho = ideal_eswap_channel(18)(kPi / 4.0,
                                              to_density(encode_two_qubit(coh, "01")));
  double dfe = direct_fidelity_estimate(correlators(rho, coh));
  CHECK(dfe > 0.95);
  CHECK(dfe < 1.0);
}

TEST_CASE("noiseless theta sweep has the Fig-3C shape") {
  LogicalEncoding enc = make_encoding("coherent", 16, 1.41);
  std::vector<double> thetas;
  for (int k = 0; k <= 16; ++k) thetas.push_back(-kPi / 2.0 + k * kPi / 16.0);
  auto rows = theta_sweep(enc, thetas, ideal_eswap_channel(16));

  double ii0 = rows.front().ii, zz0 = rows.front().zz;
  for (const auto& r : rows) {
    CHECK(std::abs(r.ii - ii0) < 1e-6);
    CHECK(std::abs(r.zz - zz0) < 1e-6);
    CHECK(std::abs(r.iz + r.zi) < 1e-9);  // anti-correlated oscillations
  }
  // <XY>, <YX> extremal at +-pi/4, zero at theta = 0
  auto at = [&](double theta) {
    for (const auto& r : rows)
      if (std::abs(r.theta_c - theta) < 1e-12) return r;
    return rows.front();
  };
  CHECK(std::abs(at(0.0).xy) < 1e-9);
  CHECK(at(-kPi / 4.0).xy > 0.95);
  CHECK(at(kPi / 4.0).xy < -0.95);
  CHECK(at(kPi / 4.0).yx > 0.95);
  // <IZ> crosses zero where <XY> is extremal
  CHECK(std::abs(at(kPi / 4.0).iz) < 1e-9);
}

TEST_CASE("encode-correlate-reconstruct round trip for orthogonal encodings") {
  for (const char* name : {"fock", "binomial"}) {
    LogicalEncoding enc = make_encoding(name, 8);
    for (const std::string label : {"01", "+1", "0i", "+-"}) {
      StateVector psi = encode_two_qubit(enc, label);
      CorrelatorSet c = correlators(to_density(psi), enc);
      // rebuild each logical qubit from its Bloch vector
      Eigen::Matrix2cd rho_a, rho_b, id2;
      id2.setIdentity();
      Eigen::Matrix2cd sx, sy, sz;
      sx << 0, 1, 1, 0;
      sy << 0, cxd(0, -1), cxd(0, 1), 0;
      sz << 1, 0, 0, -1;
      rho_a = 0.5 * (id2 + c["XI"] * sx + c["YI"] * sy + c["ZI"] * sz);
      rho_b = 0.5 * (id2 + c["IX"] * sx + c["IY"] * sy + c["IZ"] * sz);
      // logical amplitudes of the input product state
      Vector a_amp(2), b_amp(2);
      StateVector cavity_a{psi.v, psi.spaces};
      // project onto the logical bases
      StateVector b0a = enc.basis_state(0, Mode::Alice);
      StateVector b1a = enc.basis_state(1, Mode::Alice);
      StateVector b0b = enc.basis_state(0, Mode::Bob);
      StateVector b1b = enc.basis_state(1, Mode::Bob);
      DensityMatrix rho = to_density(psi);
      DensityMatrix ra = partial_trace(rho, {Mode::Alice});
      DensityMatrix rb = partial_trace(rho, {Mode::Bob});
      Eigen::Matrix2cd la, lb;
      la(0, 0) = b0a.v.dot(ra.m * b0a.v);
      la(0, 1) = b0a.v.dot(ra.m * b1a.v);
      la(1, 0) = b1a.v.dot(ra.m * b0a.v);
      la(1, 1) = b1a.v.dot(ra.m * b1a.v);
      lb(0, 0) = b0b.v.dot(rb.m * b0b.v);
      lb(0, 1) = b0b.v.dot(rb.m * b1b.v);
      lb(1, 0) = b1b.v.dot(rb.m * b0b.v);
      lb(1, 1) = b1b.v.dot(rb.m * b1b.v);
      CHECK((rho_a - la).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((rho_b - lb).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("encoding json export carries codewords") {
  LogicalEncoding enc = make_encoding("binomial", 8);
  std::string text = to_json(enc);
  CHECK(text.find("binomial") != std::string::npos);
  CHECK(text.find("codeword0") != std::string::npos);
}

TEST_CASE("unknown labels and encodings are rejected") {
  CHECK_THROWS_AS(make_encoding("gkp", 8), EncodingUnsupported);
  LogicalEncoding enc = make_encoding("fock", 4);
  CHECK_THROWS_AS(encode_two_qubit(enc, "0"), EncodingUnsupported);
  CHECK_THROWS_AS(encode_two_qubit(enc, "0q"), EncodingUnsupported);
  CHECK_THROWS_AS(pauli_index("QQ"), EncodingUnsupported);
}
