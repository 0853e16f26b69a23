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

#include "eswap/fock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <nlohmann/json.hpp>

namespace eswap {

using json = nlohmann::json;

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::Ancilla: return "ancilla";
    case Mode::Alice: return "alice";
    case Mode::Bob: return "bob";
  }
  return "?";
}

Mode mode_from_name(const std::string& name) {
  if (name == "ancilla") return Mode::Ancilla;
  if (name == "alice") return Mode::Alice;
  if (name == "bob") return Mode::Bob;
  throw SpaceMismatch("unknown mode name: " + name);
}

ModeSpace ancilla_space() { return {2, Mode::Ancilla}; }
ModeSpace alice_space(int cutoff) { return {cutoff, Mode::Alice}; }
ModeSpace bob_space(int cutoff) { return {cutoff, Mode::Bob}; }

long dim_of(const Spaces& spaces) {
  long d = 1;
  for (const auto& s : spaces) d *= s.cutoff;
  return d;
}

bool same_spaces(const Spaces& a, const Spaces& b) {
  return a == b;
}

void check_spaces(const Spaces& spaces) {
  if (spaces.empty()) throw SpaceMismatch("empty mode list");
  for (size_t i = 0; i < spaces.size(); ++i) {
    const auto& s = spaces[i];
    if (s.cutoff < 2) throw SpaceMismatch("cutoff must be >= 2");
    if (s.label == Mode::Ancilla && s.cutoff != 2)
      throw SpaceMismatch("ancilla cutoff must be exactly 2");
    if (i > 0 && static_cast<int>(spaces[i - 1].label) >= static_cast<int>(s.label))
      throw SpaceMismatch("modes must follow the canonical (ancilla, Alice, Bob) order");
  }
}

bool Operator::is_hermitian(double tolerance) const {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() < tolerance;
}

bool Operator::is_unitary(double tolerance) const {
  Matrix r = m.adjoint() * m;
  r.diagonal().array() -= 1.0;
  return r.cwiseAbs().maxCoeff() < tolerance;
}

StateVector StateVector::normalized() const {
  double n = v.norm();
  if (n == 0.0) throw NonFinite("cannot normalize a zero state");
  return {v / n, spaces};
}

double DensityMatrix::hermiticity_residual() const {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0);
  return es.eigenvalues().minCoeff();
}

Operator identity(const Spaces& spaces) {
  check_spaces(spaces);
  long d = dim_of(spaces);
  return {Matrix::Identity(d, d), spaces};
}

Operator zero_operator(const Spaces& spaces) {
  check_spaces(spaces);
  long d = dim_of(spaces);
  return {Matrix::Zero(d, d), spaces};
}

Operator annihilation(const ModeSpace& space) {
  if (space.cutoff < 2) throw SpaceMismatch("cutoff must be >= 2");
  Matrix a = Matrix::Zero(space.cutoff, space.cutoff);
  for (int n = 1; n < space.cutoff; ++n) a(n - 1, n) = std::sqrt(double(n));
  return {a, {space}};
}

Operator creation(const ModeSpace& space) { return annihilation(space).dagger(); }

Operator number_operator(const ModeSpace& space) {
  Matrix n = Matrix::Zero(space.cutoff, space.cutoff);
  for (int k = 0; k < space.cutoff; ++k) n(k, k) = double(k);
  return {n, {space}};
}

Operator parity_operator(const ModeSpace& space) {
  Matrix p = Matrix::Zero(space.cutoff, space.cutoff);
  for (int k = 0; k < space.cutoff; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
  return {p, {space}};
}

namespace {
void truncation_guard(cxd beta, int cutoff) {
  double need = 4.0 * std::norm(beta) + 10.0;
  if (cutoff < need) {
    std::ostringstream os;
    os << "displacement |beta|^2=" << std::norm(beta) << " wants cutoff >= " << need
       << " but got " << cutoff;
    warnings::emit(warnings::Kind::Truncation, os.str());
  }
}
}  // namespace

Operator displacement(cxd beta, const ModeSpace& space) {
  truncation_guard(beta, space.cutoff);
  Operator a = annihilation(space);
  Operator gen{beta * a.dagger().m - std::conj(beta) * a.m, {space}};
  return expm(gen);
}

StateVector fock_state(int n, const ModeSpace& space) {
  if (n < 0 || n >= space.cutoff) throw SpaceMismatch("Fock index outside cutoff");
  Vector v = Vector::Zero(space.cutoff);
  v(n) = 1.0;
  return {v, {space}};
}

StateVector coherent_state(cxd alpha, const ModeSpace& space) {
  truncation_guard(alpha, space.cutoff);
  Vector v(space.cutoff);
  // amplitudes alpha^n / sqrt(n!), stabilized by the recurrence
  cxd amp = 1.0;
  v(0) = amp;
  for (int n = 1; n < space.cutoff; ++n) {
    amp *= alpha / std::sqrt(double(n));
    v(n) = amp;
  }
  v /= v.norm();
  return {v, {space}};
}

Operator tensor(const std::vector<Operator>& ops) {
  if (ops.empty()) throw SpaceMismatch("tensor of nothing");
  Matrix m = ops[0].m;
  Spaces spaces = ops[0].spaces;
  for (size_t i = 1; i < ops.size(); ++i) {
    m = Eigen::kroneckerProduct(m, ops[i].m).eval();
    spaces.insert(spaces.end(), ops[i].spaces.begin(), ops[i].spaces.end());
  }
  check_spaces(spaces);
  return {m, spaces};
}

StateVector tensor(const std::vector<StateVector>& states) {
  if (states.empty()) throw SpaceMismatch("tensor of nothing");
  Vector v = states[0].v;
  Spaces spaces = states[0].spaces;
  for (size_t i = 1; i < states.size(); ++i) {
    v = Eigen::kroneckerProduct(v, states[i].v).eval();
    spaces.insert(spaces.end(), states[i].spaces.begin(), states[i].spaces.end());
  }
  check_spaces(spaces);
  return {v, spaces};
}

Operator embed(const Operator& op, const Spaces& full) {
  check_spaces(full);
  check_spaces(op.spaces);
  // verify op.spaces is a sublist of full
  size_t j = 0;
  std::vector<bool> active(full.size(), false);
  for (size_t i = 0; i < full.size() && j < op.spaces.size(); ++i) {
    if (full[i].label == op.spaces[j].label) {
      if (full[i].cutoff != op.spaces[j].cutoff)
        throw SpaceMismatch("cutoff mismatch for mode " + mode_name(full[i].label));
      active[i] = true;
      ++j;
    }
  }
  if (j != op.spaces.size())
    throw SpaceMismatch("operator modes are not a subset of the target space");

  long dfull = dim_of(full);
  Matrix out = Matrix::Zero(dfull, dfull);

  // strides in the full space
  std::vector<long> stride(full.size());
  long acc = 1;
  for (int i = int(full.size()) - 1; i >= 0; --i) {
    stride[i] = acc;
    acc *= full[i].cutoff;
  }
  // positions of active modes (in canonical order) and their cutoffs
  std::vector<size_t> pos;
  for (size_t i = 0; i < full.size(); ++i)
    if (active[i]) pos.push_back(i);
  long dop = op.dim();

  // strides within the operator's own index space
  std::vector<long> opstride(pos.size());
  acc = 1;
  for (int i = int(pos.size()) - 1; i >= 0; --i) {
    opstride[i] = acc;
    acc *= full[pos[i]].cutoff;
  }

  // enumerate spectator configurations
  std::vector<size_t> spect;
  for (size_t i = 0; i < full.size(); ++i)
    if (!active[i]) spect.push_back(i);
  long nspect = 1;
  for (auto i : spect) nspect *= full[i].cutoff;

  for (long s = 0; s < nspect; ++s) {
    long base = 0;
    long rem = s;
    for (size_t q = 0; q < spect.size(); ++q) {
      long c = full[spect[q]].cutoff;
      long idx = rem % c;
      rem /= c;
      base += idx * stride[spect[q]];
    }
    for (long r = 0; r < dop; ++r) {
      long row = base;
      for (size_t q = 0; q < pos.size(); ++q)
        row += ((r / opstride[q]) % full[pos[q]].cutoff) * stride[pos[q]];
      for (long c = 0; c < dop; ++c) {
        cxd val = op.m(r, c);
        if (val == cxd(0.0, 0.0)) continue;
        long col = base;
        for (size_t q = 0; q < pos.size(); ++q)
          col += ((c / opstride[q]) % full[pos[q]].cutoff) * stride[pos[q]];
        out(row, col) += val;
      }
    }
  }
  return {out, full};
}

Operator mul(const Operator& a, const Operator& b) {
  if (!same_spaces(a.spaces, b.spaces)) throw SpaceMismatch("operator spaces differ");
  return {a.m * b.m, a.spaces};
}

StateVector apply(const Operator& op, const StateVector& psi) {
  if (!same_spaces(op.spaces, psi.spaces)) throw SpaceMismatch("operator/state spaces differ");
  return {op.m * psi.v, psi.spaces};
}

DensityMatrix apply(const Operator& op, const DensityMatrix& rho) {
  if (!same_spaces(op.spaces, rho.spaces)) throw SpaceMismatch("operator/state spaces differ");
  return {op.m * rho.m * op.m.adjoint(), rho.spaces};
}

DensityMatrix to_density(const StateVector& psi) {
  return {psi.v * psi.v.adjoint(), psi.spaces};
}

cxd inner(const StateVector& a, const StateVector& b) {
  if (!same_spaces(a.spaces, b.spaces)) throw SpaceMismatch("state spaces differ");
  return a.v.dot(b.v);
}

cxd expectation(const Operator& op, const StateVector& psi) {
  if (!same_spaces(op.spaces, psi.spaces)) throw SpaceMismatch("operator/state spaces differ");
  return psi.v.dot(op.m * psi.v);
}

cxd expectation(const Operator& op, const DensityMatrix& rho) {
  if (!same_spaces(op.spaces, rho.spaces)) throw SpaceMismatch("operator/state spaces differ");
  return (op.m * rho.m).trace();
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<Mode>& keep) {
  const Spaces& full = rho.spaces;
  std::vector<bool> keep_flag(full.size(), false);
  Spaces out_spaces;
  for (size_t i = 0; i < full.size(); ++i) {
    if (std::find(keep.begin(), keep.end(), full[i].label) != keep.end()) {
      keep_flag[i] = true;
      out_spaces.push_back(full[i]);
    }
  }
  if (out_spaces.size() != keep.size()) throw SpaceMismatch("kept mode not present");

  std::vector<long> stride(full.size());
  long acc = 1;
  for (int i = int(full.size()) - 1; i >= 0; --i) {
    stride[i] = acc;
    acc *= full[i].cutoff;
  }
  long dkeep = dim_of(out_spaces);
  std::vector<size_t> kept, traced;
  for (size_t i = 0; i < full.size(); ++i) (keep_flag[i] ? kept : traced).push_back(i);
  long dtrace = 1;
  for (auto i : traced) dtrace *= full[i].cutoff;

  std::vector<long> kstride(kept.size());
  acc = 1;
  for (int i = int(kept.size()) - 1; i >= 0; --i) {
    kstride[i] = acc;
    acc *= full[kept[i]].cutoff;
  }

  Matrix out = Matrix::Zero(dkeep, dkeep);
  for (long r = 0; r < dkeep; ++r) {
    long rbase = 0;
    for (size_t q = 0; q < kept.size(); ++q)
      rbase += ((r / kstride[q]) % full[kept[q]].cutoff) * stride[kept[q]];
    for (long c = 0; c < dkeep; ++c) {
      long cbase = 0;
      for (size_t q = 0; q < kept.size(); ++q)
        cbase += ((c / kstride[q]) % full[kept[q]].cutoff) * stride[kept[q]];
      cxd sum = 0.0;
      for (long t = 0; t < dtrace; ++t) {
        long off = 0;
        long rem = t;
        for (size_t q = 0; q < traced.size(); ++q) {
          long cc = full[traced[q]].cutoff;
          off += (rem % cc) * stride[traced[q]];
          rem /= cc;
        }
        sum += rho.m(rbase + off, cbase + off);
      }
      out(r, c) = sum;
    }
  }
  return {out, out_spaces};
}

Operator expm(const Operator& h, cxd scale) {
  const Matrix& m = h.m;
  if (m.rows() != m.cols()) throw SpaceMismatch("expm needs a square matrix");
  double scale_mag = std::abs(scale);
  if (scale_mag == 0.0 || m.cwiseAbs().maxCoeff() == 0.0)
    return {Matrix::Identity(m.rows(), m.cols()), h.spaces};

  Matrix result;
  double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  double anti = (m + m.adjoint()).cwiseAbs().maxCoeff();
  double size = m.cwiseAbs().maxCoeff();
  if (herm < 1e-13 * std::max(1.0, size)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    Vector phases(m.rows());
    for (long i = 0; i < m.rows(); ++i) phases(i) = std::exp(scale * es.eigenvalues()(i));
    result = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  } else if (anti < 1e-13 * std::max(1.0, size)) {
    // h = -i * (i h), with i h Hermitian
    Matrix hh = cxd(0.0, 1.0) * m;
    Eigen::SelfAdjointEigenSolver<Matrix> es(hh);
    cxd eff = scale * cxd(0.0, -1.0);
    Vector phases(m.rows());
    for (long i = 0; i < m.rows(); ++i) phases(i) = std::exp(eff * es.eigenvalues()(i));
    result = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  } else {
    result = (scale * m).exp();
  }
  if (!result.allFinite()) throw NonFinite("matrix exponential overflowed");
  return {result, h.spaces};
}

namespace {
Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}
}  // namespace

double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (!same_spaces(rho.spaces, sigma.spaces)) throw SpaceMismatch("state spaces differ");
  // pure shortcut: rank-1 sigma
  Eigen::SelfAdjointEigenSolver<Matrix> es((sigma.m + sigma.m.adjoint()) / 2.0);
  long d = sigma.dim();
  double largest = es.eigenvalues()(d - 1);
  double rest = 0.0;
  for (long i = 0; i + 1 < d; ++i) rest += std::abs(es.eigenvalues()(i));
  if (rest < 1e-12 * std::max(1.0, largest)) {
    Vector psi = es.eigenvectors().col(d - 1);
    return (largest * psi.dot(rho.m * psi)).real();
  }
  Matrix root = psd_sqrt(rho.m);
  Matrix inner_m = psd_sqrt(root * sigma.m * root);
  double t = inner_m.trace().real();
  return t * t;
}

double state_fidelity(const DensityMatrix& rho, const StateVector& psi) {
  if (!same_spaces(rho.spaces, psi.spaces)) throw SpaceMismatch("state spaces differ");
  return psi.v.dot(rho.m * psi.v).real();
}

double state_fidelity(const StateVector& a, const StateVector& b) {
  return std::norm(inner(a, b));
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (!same_spaces(a.spaces, b.spaces)) throw SpaceMismatch("state spaces differ");
  Matrix diff = (a.m - b.m);
  diff = (diff + diff.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(diff);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double phase_distance(const Matrix& a, const Matrix& b) {
  cxd corr = (b.adjoint() * a).trace();
  cxd phase = (std::abs(corr) < 1e-300) ? cxd(1.0, 0.0) : corr / std::abs(corr);
  return (a * std::conj(phase) - b).cwiseAbs().maxCoeff();
}

// --- JSON -------------------------------------------------------------------

namespace {
json spaces_to_json(const Spaces& spaces) {
  json dims = json::array(), order = json::array();
  for (const auto& s : spaces) {
    dims.push_back(s.cutoff);
    order.push_back(mode_name(s.label));
  }
  return json{{"dims", dims}, {"mode_order", order}};
}

Spaces spaces_from_json(const json& j) {
  Spaces spaces;
  const auto& dims = j.at("dims");
  const auto& order = j.at("mode_order");
  if (dims.size() != order.size()) throw SpaceMismatch("dims/mode_order length mismatch");
  for (size_t i = 0; i < dims.size(); ++i)
    spaces.push_back({dims[i].get<int>(), mode_from_name(order[i].get<std::string>())});
  return spaces;
}

json complex_block(const cxd* data, long n) {
  json re = json::array(), im = json::array();
  for (long i = 0; i < n; ++i) {
    re.push_back(data[i].real());
    im.push_back(data[i].imag());
  }
  return json{{"re", re}, {"im", im}};
}
}  // namespace

std::string to_json(const Operator& op) {
  json j = spaces_to_json(op.spaces);
  Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = op.m;
  json blk = complex_block(rm.data(), rm.size());
  j["re"] = blk["re"];
  j["im"] = blk["im"];
  return j.dump();
}

std::string to_json(const StateVector& psi) {
  json j = spaces_to_json(psi.spaces);
  json blk = complex_block(psi.v.data(), psi.v.size());
  j["re"] = blk["re"];
  j["im"] = blk["im"];
  return j.dump();
}

std::string to_json(const DensityMatrix& rho) {
  json j = spaces_to_json(rho.spaces);
  Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = rho.m;
  json blk = complex_block(rm.data(), rm.size());
  j["re"] = blk["re"];
  j["im"] = blk["im"];
  return j.dump();
}

namespace {
Matrix matrix_from_json(const json& j, long d) {
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (long(re.size()) != d * d || long(im.size()) != d * d)
    throw SpaceMismatch("matrix payload size mismatch");
  Matrix m(d, d);
  for (long r = 0; r < d; ++r)
    for (long c = 0; c < d; ++c) {
      long k = r * d + c;
      m(r, c) = cxd(re[k].get<double>(), im[k].get<double>());
    }
  return m;
}
}  // namespace

Operator operator_from_json(const std::string& text) {
  json j = json::parse(text);
  Spaces spaces = spaces_from_json(j);
  return {matrix_from_json(j, dim_of(spaces)), spaces};
}

StateVector state_from_json(const std::string& text) {
  json j = json::parse(text);
  Spaces spaces = spaces_from_json(j);
  long d = dim_of(spaces);
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (long(re.size()) != d) throw SpaceMismatch("vector payload size mismatch");
  Vector v(d);
  for (long i = 0; i < d; ++i) v(i) = cxd(re[i].get<double>(), im[i].get<double>());
  return {v, spaces};
}

DensityMatrix density_from_json(const std::string& text) {
  json j = json::parse(text);
  Spaces spaces = spaces_from_json(j);
  return {matrix_from_json(j, dim_of(spaces)), spaces};
}

}  // namespace eswap
