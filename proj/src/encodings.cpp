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

#include "eswap/encodings.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "eswap/circuits.hpp"

namespace eswap {

using json = nlohmann::json;

const std::array<std::string, 16> kPauliLabels = {
    "II", "IX", "IY", "IZ", "XI", "XX", "XY", "XZ",
    "YI", "YX", "YY", "YZ", "ZI", "ZX", "ZY", "ZZ"};

int pauli_index(const std::string& label) {
  for (int i = 0; i < 16; ++i)
    if (kPauliLabels[i] == label) return i;
  throw EncodingUnsupported("unknown Pauli label: " + label);
}

StateVector LogicalEncoding::codeword(int which, Mode label) const {
  return {which == 0 ? cw0 : cw1, {ModeSpace{cutoff, label}}};
}

StateVector LogicalEncoding::basis_state(int which, Mode label) const {
  return {which == 0 ? basis0 : basis1, {ModeSpace{cutoff, label}}};
}

Operator LogicalEncoding::code_projector(Mode label) const {
  Matrix p = basis0 * basis0.adjoint() + basis1 * basis1.adjoint();
  return {p, {ModeSpace{cutoff, label}}};
}

LogicalEncoding make_encoding(const std::string& name, int cutoff, double alpha) {
  LogicalEncoding enc;
  enc.name = name;
  enc.cutoff = cutoff;
  if (name == "fock") {
    if (cutoff < 2) throw EncodingUnsupported("fock encoding needs cutoff >= 2");
    enc.cw0 = fock_state(0, alice_space(cutoff)).v;
    enc.cw1 = fock_state(1, alice_space(cutoff)).v;
    enc.orthogonalized = true;
  } else if (name == "binomial") {
    if (cutoff < 5) throw EncodingUnsupported("binomial words need cutoff >= 5");
    if (cutoff < 8)
      warnings::emit(warnings::Kind::Truncation,
                     "binomial encoding prefers cutoff >= 8, got " + std::to_string(cutoff));
    Vector w0 = Vector::Zero(cutoff);
    w0(0) = 1.0 / std::sqrt(2.0);
    w0(4) = 1.0 / std::sqrt(2.0);
    Vector w1 = Vector::Zero(cutoff);
    w1(2) = 1.0;
    enc.cw0 = w0;
    enc.cw1 = w1;
    enc.orthogonalized = true;
  } else if (name == "coherent") {
    enc.alpha = alpha;
    enc.cw0 = coherent_state(-alpha, alice_space(cutoff)).v;
    enc.cw1 = coherent_state(alpha, alice_space(cutoff)).v;
    enc.orthogonalized = false;
  } else {
    throw EncodingUnsupported("unknown encoding: " + name);
  }

  if (enc.orthogonalized) {
    enc.basis0 = enc.cw0;
    enc.basis1 = enc.cw1;
  } else {
    // symmetric (Loewdin) orthogonalization: the closest orthonormal pair,
    // equal to normalized even/odd cat combinations
    Vector even = enc.cw0 + enc.cw1;
    Vector odd = enc.cw0 - enc.cw1;
    even /= even.norm();
    odd /= odd.norm();
    enc.basis0 = (even + odd) / std::sqrt(2.0);
    enc.basis1 = (even - odd) / std::sqrt(2.0);
  }

  ModeSpace sp = alice_space(cutoff);
  Operator n = number_operator(sp);
  double n0 = (enc.cw0.dot(n.m * enc.cw0)).real();
  double n1 = (enc.cw1.dot(n.m * enc.cw1)).real();
  enc.nbar = 0.5 * (n0 + n1);
  return enc;
}

namespace {

Vector logical_superposition(const LogicalEncoding& enc, cxd c0, cxd c1) {
  Vector v = c0 * enc.cw0 + c1 * enc.cw1;
  double n = v.norm();
  if (n < 1e-12) throw EncodingUnsupported("logical superposition collapsed to zero");
  return v / n;
}

Vector single_qubit_state(const LogicalEncoding& enc, char label) {
  switch (label) {
    case '0': return enc.cw0;
    case '1': return enc.cw1;
    case '+': return logical_superposition(enc, 1.0, 1.0);
    case '-': return logical_superposition(enc, 1.0, -1.0);
    case 'i': return logical_superposition(enc, 1.0, cxd(0.0, 1.0));
    case 'j': return logical_superposition(enc, 1.0, cxd(0.0, -1.0));
    default: throw EncodingUnsupported(std::string("unknown logical label: ") + label);
  }
}

}  // namespace

StateVector encode_two_qubit(const LogicalEncoding& enc, const std::string& label) {
  if (label.size() != 2) throw EncodingUnsupported("two-qubit label must have 2 characters");
  StateVector a{single_qubit_state(enc, label[0]), {alice_space(enc.cutoff)}};
  StateVector b{single_qubit_state(enc, label[1]), {bob_space(enc.cutoff)}};
  return tensor({a, b});
}

StateVector encode_two_qubit(const LogicalEncoding& enc,
                             const std::array<double, 2>& bloch_theta,
                             const std::array<double, 2>& bloch_phi) {
  auto one = [&](double t, double p) {
    return logical_superposition(enc, std::cos(t / 2.0),
                                 std::exp(cxd(0.0, p)) * std::sin(t / 2.0));
  };
  StateVector a{one(bloch_theta[0], bloch_phi[0]), {alice_space(enc.cutoff)}};
  StateVector b{one(bloch_theta[1], bloch_phi[1]), {bob_space(enc.cutoff)}};
  return tensor({a, b});
}

std::array<Operator, 4> logical_pauli_single(const LogicalEncoding& enc, Mode label) {
  const Vector& b0 = enc.basis0;
  const Vector& b1 = enc.basis1;
  Spaces sp{ModeSpace{enc.cutoff, label}};
  Matrix p00 = b0 * b0.adjoint();
  Matrix p11 = b1 * b1.adjoint();
  Matrix p01 = b0 * b1.adjoint();
  Matrix p10 = b1 * b0.adjoint();
  Operator id{p00 + p11, sp};
  Operator x{p01 + p10, sp};
  Operator y{cxd(0.0, -1.0) * p01 + cxd(0.0, 1.0) * p10, sp};
  Operator z{p00 - p11, sp};
  return {id, x, y, z};
}

std::array<Operator, 16> logical_pauli_operators(const LogicalEncoding& enc) {
  auto pa = logical_pauli_single(enc, Mode::Alice);
  auto pb = logical_pauli_single(enc, Mode::Bob);
  std::array<Operator, 16> out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[4 * i + j] = tensor({pa[i], pb[j]});
  return out;
}

CorrelatorSet correlators(const DensityMatrix& rho_ab, const LogicalEncoding& enc) {
  auto paulis = logical_pauli_operators(enc);
  if (!same_spaces(rho_ab.spaces, paulis[0].spaces))
    throw SpaceMismatch("correlators expect a state on Alice (x) Bob at the encoding cutoff");
  CorrelatorSet c;
  for (int i = 0; i < 16; ++i) c.values[i] = expectation(paulis[i], rho_ab).real();
  return c;
}

double direct_fidelity_estimate(const CorrelatorSet& c) {
  return 0.25 * (c["II"] - c["XY"] + c["YX"] - c["ZZ"]);
}

ThetaChannel ideal_eswap_channel(int cutoff) {
  return [cutoff](double theta_c, const DensityMatrix& rho) {
    Operator u = eswap_ideal(theta_c, alice_space(cutoff), bob_space(cutoff));
    return apply(u, rho);
  };
}

std::vector<SweepRow> theta_sweep(const LogicalEncoding& enc,
                                  const std::vector<double>& theta_list,
                                  const ThetaChannel& channel) {
  DensityMatrix rho_in = to_density(encode_two_qubit(enc, "01"));
  std::vector<SweepRow> rows;
  rows.reserve(theta_list.size());
  for (double theta : theta_list) {
    DensityMatrix rho = channel(theta, rho_in);
    CorrelatorSet c = correlators(rho, enc);
    rows.push_back({theta, c["II"], c["ZZ"], c["IZ"], c["ZI"], c["XY"], c["YX"]});
  }
  return rows;
}

std::string to_json(const LogicalEncoding& enc) {
  json j;
  j["name"] = enc.name;
  j["cutoff"] = enc.cutoff;
  j["alpha"] = enc.alpha;
  j["orthogonalized"] = enc.orthogonalized;
  j["nbar"] = enc.nbar;
  auto dump = [](const Vector& v) {
    json re = json::array(), im = json::array();
    for (long i = 0; i < v.size(); ++i) {
      re.push_back(v(i).real());
      im.push_back(v(i).imag());
    }
    return json{{"re", re}, {"im", im}};
  };
  j["codeword0"] = dump(enc.cw0);
  j["codeword1"] = dump(enc.cw1);
  j["basis0"] = dump(enc.basis0);
  j["basis1"] = dump(enc.basis1);
  return j.dump();
}

}  // namespace eswap
