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
#include <random>

#include <doctest.h>

#include "eswap/circuits.hpp"
#include "eswap/fock.hpp"

using namespace eswap;

namespace {

// Independent series-summation exponential, used as the expm oracle.
Matrix series_expm(const Matrix& h, cxd scale) {
  Matrix term = Matrix::Identity(h.rows(), h.cols());
  Matrix sum = term;
  for (int k = 1; k < 200; ++k) {
    term = (term * (scale * h) / double(k)).eval();
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  return sum;
}

Matrix random_hermitian(int d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) m(r, c) = cxd(g(rng), g(rng));
  return (m + m.adjoint()) / 2.0;
}

StateVector random_state(const Spaces& spaces, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(dim_of(spaces));
  for (long i = 0; i < v.size(); ++i) v(i) = cxd(g(rng), g(rng));
  return StateVector{v, spaces}.normalized();
}

}  // namespace

TEST_CASE("annihilation operator has sqrt(n) superdiagonal") {
  Operator a = annihilation(alice_space(3));
  CHECK(a.m(0, 1).real() == doctest::Approx(std::sqrt(1.0)));
  CHECK(a.m(1, 2).real() == doctest::Approx(std::sqrt(2.0)));
  CHECK(std::abs(a.m(0, 0)) == 0.0);
  CHECK(std::abs(a.m(2, 1)) == 0.0);

  StateVector vac = fock_state(0, alice_space(3));
  CHECK(apply(a, vac).norm() == doctest::Approx(0.0));

  Operator n = mul(a.dagger(), a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(n.m);
  for (int k = 0; k < 3; ++k) CHECK(es.eigenvalues()(k) == doctest::Approx(double(k)).epsilon(1e-12));
}

TEST_CASE("displacement: identity at zero, Poisson mean, group inverse") {
  ModeSpace space = alice_space(18);
  Operator d0 = displacement(0.0, space);
  CHECK((d0.m - Matrix::Identity(18, 18)).cwiseAbs().maxCoeff() < 1e-12);

  cxd beta{1.41, 0.0};
  Operator d = displacement(beta, space);
  CHECK(d.is_unitary());
  StateVector psi = apply(d, fock_state(0, space));

  // oracle: direct Poisson-weight sum on the truncated basis
  double nbar = std::norm(beta);
  double oracle = 0.0, weight = 1.0, total = 0.0;
  for (int n = 0; n < 18; ++n) {
    if (n > 0) weight *= nbar / double(n);
    oracle += n * weight;
    total += weight;
  }
  oracle /= total;
  double measured = expectation(number_operator(space), psi).real();
  CHECK(measured == doctest::Approx(oracle).epsilon(1e-6));
  CHECK(measured == doctest::Approx(nbar).epsilon(1e-6));
  CHECK(measured == doctest::Approx(1.988).epsilon(1e-3));

  Operator dd = mul(d, displacement(-beta, space));
  CHECK((dd.m - Matrix::Identity(18, 18)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("displacement truncation guard warns") {
  warnings::reset();
  long before = warnings::count(warnings::Kind::Truncation);
  warnings::set_handler([](warnings::Kind, const std::string&) {});
  displacement(2.0, alice_space(8));  // needs cutoff >= 26
  CHECK(warnings::count(warnings::Kind::Truncation) == before + 1);
  warnings::set_handler({});
}

TEST_CASE("parity operator") {
  Operator p = parity_operator(alice_space(4));
  CHECK(p.m(0, 0).real() == 1.0);
  CHECK(p.m(1, 1).real() == -1.0);
  CHECK(p.m(2, 2).real() == 1.0);
  CHECK(p.m(3, 3).real() == -1.0);

  ModeSpace space = alice_space(20);
  CHECK(expectation(parity_operator(space), fock_state(3, alice_space(20))).real() ==
        doctest::Approx(-1.0));

  // coherent state parity: sum (-1)^n e^{-b^2} b^{2n}/n! = e^{-2 b^2}
  double b = 1.2;
  StateVector coh = coherent_state(b, space);
  double analytic = std::exp(-2.0 * b * b);
  CHECK(expectation(parity_operator(space), coh).real() ==
        doctest::Approx(analytic).epsilon(1e-8));
}

TEST_CASE("tensor and embed semantics") {
  Operator i2 = identity({ancilla_space()});
  Operator i3 = identity({alice_space(3)});
  Operator t = tensor({i2, i3});
  CHECK(t.dim() == 6);
  CHECK((t.m - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() == 0.0);

  Spaces full{ancilla_space(), alice_space(3), bob_space(4)};
  Operator pb = embed(parity_operator(bob_space(4)), full);
  Operator na = embed(number_operator(alice_space(3)), full);
  CHECK((pb.m * na.m - na.m * pb.m).cwiseAbs().maxCoeff() < 1e-14);

  Operator a = annihilation(alice_space(3));
  Operator bdag = creation(bob_space(4));
  Spaces two{alice_space(3), bob_space(4)};
  Operator lhs = mul(embed(a, two), embed(bdag, two));
  Operator rhs = tensor({a, bdag});
  CHECK((lhs.m - rhs.m).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("tensor is associative") {
  Operator x = annihilation(ancilla_space());
  Operator y = number_operator(alice_space(3));
  Operator z = parity_operator(bob_space(4));
  Operator left = tensor({tensor({x, y}), z});
  Operator right = tensor({x, tensor({y, z})});
  CHECK((left.m - right.m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("embed acts trivially on non-member modes") {
  Spaces full{alice_space(4), bob_space(4)};
  StateVector psi = tensor({coherent_state(0.7, alice_space(4)),
                            fock_state(1, bob_space(4))});
  Operator na_full = embed(number_operator(alice_space(4)), full);
  double joint = expectation(na_full, psi).real();
  double local = expectation(number_operator(alice_space(4)),
                             coherent_state(0.7, alice_space(4)))
                     .real();
  CHECK(joint == doctest::Approx(local).epsilon(1e-12));
}

TEST_CASE("expm basics and oracles") {
  Spaces one{alice_space(6)};
  Operator zero = zero_operator(one);
  CHECK((expm(zero).m - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() == 0.0);

  // exp(i pi n) = parity
  Operator n = number_operator(alice_space(6));
  Operator u = expm(n, cxd(0.0, std::acos(-1.0)));
  CHECK((u.m - parity_operator(alice_space(6)).m).cwiseAbs().maxCoeff() < 1e-12);

  // exp(i (pi/2) SWAP) = i SWAP, against the eigendecomposition oracle
  Operator s = swap_operator(alice_space(4), bob_space(4));
  Operator e = expm(s, cxd(0.0, std::acos(-1.0) / 2.0));
  CHECK((e.m - cxd(0.0, 1.0) * s.m).cwiseAbs().maxCoeff() < 1e-10);
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.m);
  Matrix oracle = es.eigenvectors() *
                  (cxd(0.0, std::acos(-1.0) / 2.0) * es.eigenvalues().cast<cxd>().array())
                      .exp()
                      .matrix()
                      .asDiagonal() *
                  es.eigenvectors().adjoint();
  CHECK((e.m - oracle).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("expm agrees with series oracle on random Hermitian input") {
  for (unsigned seed : {11u, 12u, 13u}) {
    Matrix h = random_hermitian(8, seed);
    Spaces sp{alice_space(8)};
    Operator out = expm({h, sp}, cxd(0.0, -0.7));
    Matrix oracle = series_expm(h, cxd(0.0, -0.7));
    CHECK((out.m - oracle).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("expm handles non-Hermitian generators") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 0.5);
  Matrix m(5, 5);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) m(r, c) = cxd(g(rng), g(rng));
  Spaces sp{alice_space(5)};
  Operator out = expm({m, sp}, cxd(1.0, 0.0));
  CHECK((out.m - series_expm(m, 1.0)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("state fidelity") {
  ModeSpace space = alice_space(20);
  StateVector zero = fock_state(0, space);
  StateVector one = fock_state(1, space);
  DensityMatrix rho = to_density(zero);
  CHECK(state_fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(state_fidelity(to_density(zero), to_density(one)) == doctest::Approx(0.0));

  double alpha = 1.41;
  StateVector plus = coherent_state(alpha, space);
  StateVector minus = coherent_state(-alpha, space);
  double analytic = std::exp(-4.0 * alpha * alpha);
  CHECK(state_fidelity(plus, minus) == doctest::Approx(analytic).epsilon(1e-5));
  CHECK(state_fidelity(to_density(plus), to_density(minus)) ==
        doctest::Approx(3.48e-4).epsilon(0.02));

  // mixed-state route agrees with the pure shortcut
  DensityMatrix mix{0.5 * (to_density(plus).m + to_density(minus).m), {space}};
  double f1 = state_fidelity(mix, plus);
  double f2 = state_fidelity(mix, to_density(plus));
  CHECK(f1 == doctest::Approx(f2).epsilon(1e-8));
}

TEST_CASE("partial trace of an entangled state gives mixed marginals") {
  ModeSpace a = alice_space(4), b = bob_space(4);
  StateVector bell = tensor({fock_state(0, a), fock_state(3, b)});
  Operator u = eswap_ideal(std::acos(-1.0) / 4.0, a, b);
  StateVector out = apply(u, bell);
  DensityMatrix reduced = partial_trace(to_density(out), {Mode::Alice});
  Eigen::SelfAdjointEigenSolver<Matrix> es(reduced.m);
  double entropy = 0.0;
  for (long i = 0; i < es.eigenvalues().size(); ++i) {
    double p = es.eigenvalues()(i);
    if (p > 1e-12) entropy -= p * std::log(p);
  }
  CHECK(entropy == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("constructed unitaries satisfy the unitarity ledger") {
  CHECK(displacement(cxd(0.9, 0.4), alice_space(16)).is_unitary());
  CHECK(beamsplitter_unitary(0.6, 0.3, alice_space(6), bob_space(6)).is_unitary());
  CHECK(eswap_ideal(0.77, alice_space(5), bob_space(5)).is_unitary());
}

TEST_CASE("json round trip") {
  ModeSpace space = alice_space(5);
  Operator d = displacement(cxd(0.3, -0.2), space);
  Operator back = operator_from_json(to_json(d));
  CHECK((back.m - d.m).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.spaces == d.spaces);

  StateVector psi = random_state({ancilla_space(), alice_space(3)}, 5);
  StateVector psi2 = state_from_json(to_json(psi));
  CHECK((psi2.v - psi.v).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("space checks reject bad layouts") {
  CHECK_THROWS_AS(check_spaces(Spaces{{1, Mode::Alice}}), SpaceMismatch);
  CHECK_THROWS_AS(check_spaces(Spaces{{3, Mode::Ancilla}}), SpaceMismatch);
  CHECK_THROWS_AS(check_spaces(Spaces{bob_space(4), alice_space(4)}), SpaceMismatch);
  CHECK_THROWS_AS(tensor({identity({alice_space(3)}), identity({alice_space(3)})}),
                  SpaceMismatch);
  CHECK_THROWS_AS(mul(identity({alice_space(3)}), identity({alice_space(4)})),
                  SpaceMismatch);
}
