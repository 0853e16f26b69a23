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

#include "eswap/processtomo.hpp"

#include <cmath>
#include <mutex>

#include <nlohmann/json.hpp>

#include "eswap/parallel.hpp"

namespace eswap {

using json = nlohmann::json;

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ull * (salt + 1));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// bare two-qubit Pauli matrices in the same II..ZZ order as the encoded set
std::array<Matrix, 16> bare_two_qubit_paulis() {
  const cxd i{0.0, 1.0};
  std::array<Matrix, 4> s;
  s[0] = Matrix::Identity(2, 2);
  s[1] = Matrix(2, 2);
  s[1] << 0, 1, 1, 0;
  s[2] = Matrix(2, 2);
  s[2] << 0, -i, i, 0;
  s[3] = Matrix(2, 2);
  s[3] << 1, 0, 0, -1;
  std::array<Matrix, 16> out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      Matrix m(4, 4);
      for (int r1 = 0; r1 < 2; ++r1)
        for (int c1 = 0; c1 < 2; ++c1)
          for (int r2 = 0; r2 < 2; ++r2)
            for (int c2 = 0; c2 < 2; ++c2)
              m(2 * r1 + r2, 2 * c1 + c2) = s[a](r1, c1) * s[b](r2, c2);
      out[4 * a + b] = m;
    }
  return out;
}

// transfer tensor T[(ij),(mn)] = (1/4) Tr(P_i P_m P_j P_n), mapping vec(chi)
// to vec(R); built once
const Eigen::MatrixXcd& chi_to_ptm_tensor() {
  static Eigen::MatrixXcd t = [] {
    auto p = bare_two_qubit_paulis();
    Eigen::MatrixXcd m(256, 256);
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j)
        for (int a = 0; a < 16; ++a)
          for (int b = 0; b < 16; ++b)
            m(16 * i + j, 16 * a + b) = 0.25 * (p[i] * p[a] * p[j] * p[b]).trace();
    return m;
  }();
  return t;
}

DensityMatrix project_to_cutoff(const DensityMatrix& rho, int cutoff) {
  if (rho.spaces.size() != 2) throw SpaceMismatch("two-mode state expected");
  int ca = rho.spaces[0].cutoff, cb = rho.spaces[1].cutoff;
  if (cutoff > ca || cutoff > cb) throw SpaceMismatch("cannot project upwards");
  if (cutoff == ca && cutoff == cb) return rho;
  Spaces out_spaces{alice_space(cutoff), bob_space(cutoff)};
  Matrix out(cutoff * cutoff, cutoff * cutoff);
  for (int na = 0; na < cutoff; ++na)
    for (int nb = 0; nb < cutoff; ++nb)
      for (int ma = 0; ma < cutoff; ++ma)
        for (int mb = 0; mb < cutoff; ++mb)
          out(na * cutoff + nb, ma * cutoff + mb) =
              rho.m(long(na) * cb + nb, long(ma) * cb + mb);
  return {out, out_spaces};
}

}  // namespace

double ChiMatrix::hermiticity_residual() const {
  return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
}

double ChiMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es((entries + entries.adjoint()) / 2.0);
  return es.eigenvalues().minCoeff();
}

PauliTransferMatrix ptm_from_channel(const Channel& channel, const LogicalEncoding& enc) {
  auto paulis = logical_pauli_operators(enc);
  if (!same_spaces(channel.cavity_spaces(), paulis[0].spaces))
    throw SpaceMismatch("channel and encoding live on different spaces");
  PauliTransferMatrix r;
  r.encoding_name = enc.name;
  std::array<DensityMatrix, 16> mapped;
  parallel_for(16, [&](long j) {
    mapped[j] = channel.apply({paulis[j].m, paulis[j].spaces});
  });
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      r.entries(i, j) = 0.25 * (paulis[i].m * mapped[j].m).trace().real();
  return r;
}

PauliTransferMatrix ptm_of_unitary(const Operator& u, const LogicalEncoding& enc) {
  auto paulis = logical_pauli_operators(enc);
  if (!same_spaces(u.spaces, paulis[0].spaces))
    throw SpaceMismatch("unitary and encoding live on different spaces");
  PauliTransferMatrix r;
  r.encoding_name = enc.name;
  for (int j = 0; j < 16; ++j) {
    Matrix mapped = u.m * paulis[j].m * u.m.adjoint();
    for (int i = 0; i < 16; ++i)
      r.entries(i, j) = 0.25 * (paulis[i].m * mapped).trace().real();
  }
  return r;
}

ChiMatrix chi_from_ptm(const PauliTransferMatrix& r) {
  Eigen::VectorXcd vec_r(256);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) vec_r(16 * i + j) = r.entries(i, j);
  Eigen::VectorXcd vec_chi = chi_to_ptm_tensor().colPivHouseholderQr().solve(vec_r);
  ChiMatrix chi;
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b) chi.entries(a, b) = vec_chi(16 * a + b);
  chi.entries = ((chi.entries + chi.entries.adjoint()) / 2.0).eval();
  return chi;
}

PauliTransferMatrix ptm_from_chi(const ChiMatrix& chi, const std::string& encoding_name) {
  Eigen::VectorXcd vec_chi(256);
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b) vec_chi(16 * a + b) = chi.entries(a, b);
  Eigen::VectorXcd vec_r = chi_to_ptm_tensor() * vec_chi;
  PauliTransferMatrix r;
  r.encoding_name = encoding_name;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) r.entries(i, j) = vec_r(16 * i + j).real();
  return r;
}

ChiMatrix chi_from_channel(const Channel& channel, const LogicalEncoding& enc) {
  return chi_from_ptm(ptm_from_channel(channel, enc));
}

ProcessFidelity process_fidelity_chi(const ChiMatrix& measured, const ChiMatrix& ideal) {
  cxd t = (ideal.entries * measured.entries).trace();
  return {t.real(), std::abs(t.imag())};
}

double ptm_overlap(const PauliTransferMatrix& measured, const PauliTransferMatrix& ideal) {
  double denom = (ideal.entries.transpose() * ideal.entries).trace();
  if (denom <= 0) throw ConfigError("degenerate ideal PTM");
  return (ideal.entries.transpose() * measured.entries).trace() / denom;
}

const std::array<std::string, 16> kQptInputLabels = {
    "00", "01", "0+", "0i", "10", "11", "1+", "1i",
    "+0", "+1", "++", "+i", "i0", "i1", "i+", "ii"};

QptReport run_qpt(const Channel& operation, const Operator& ideal_unitary,
                  const LogicalEncoding& enc, const QptOptions& options) {
  if (enc.name == "coherent" && !options.allow_coherent)
    throw EncodingUnsupported(
        "coherent-encoding QPT is disabled by default; set allow_coherent");
  if (options.sampled && !options.seed)
    throw SeedRequired("sampled QPT needs a seed");

  int evo_cutoff = enc.cutoff;
  int rc = options.reconstruction_cutoff;
  if (rc <= 0) rc = (enc.name == "binomial") ? std::min(6, evo_cutoff) : std::min(4, evo_cutoff);

  LogicalEncoding enc_rc = (rc == enc.cutoff)
                               ? enc
                               : make_encoding(enc.name, rc, enc.alpha == 0.0 ? 1.41 : enc.alpha);

  // measurement grid shared by all inputs
  auto points = reconstruction_point_set(rc);
  WignerReconstructor reconstructor(points, rc);

  double contrast =
      (1.0 - 2.0 * options.readout_error_a) * (1.0 - 2.0 * options.readout_error_b);

  QptReport report;
  report.encoding_name = enc.name;
  report.reconstruction_cutoff = rc;
  report.seed = options.seed.value_or(0);
  report.reconstruction_residuals.resize(16, 0.0);

  // input Pauli vectors from the ideal encoded states
  Eigen::MatrixXd p_in(16, 16), p_out(16, 16);
  std::array<DensityMatrix, 16> inputs;
  for (int k = 0; k < 16; ++k) {
    StateVector psi = encode_two_qubit(enc, kQptInputLabels[k]);
    inputs[k] = to_density(psi);
    CorrelatorSet c = correlators(inputs[k], enc);
    for (int i = 0; i < 16; ++i) p_in(i, k) = c.values[i];
  }

  std::mutex mu;
  parallel_for(16, [&](long k) {
    DensityMatrix out = operation.apply(inputs[k]);
    DensityMatrix projected = project_to_cutoff(out, rc);
    std::vector<double> values;
    if (options.sampled) {
      auto record =
          sample_parity_shots(projected, reconstructor.points(), options.shots_per_point,
                              options.readout_error_a, options.readout_error_b,
                              mix_seed(*options.seed, std::uint64_t(k)));
      values = record.point_means();
    } else {
      values = reconstructor.exact_values(projected);
      for (auto& v : values) v *= contrast;
    }
    auto rec = reconstructor.solve(values);
    CorrelatorSet c = correlators(rec.rho, enc_rc);
    std::lock_guard<std::mutex> lock(mu);
    report.reconstruction_residuals[k] = rec.residual;
    for (int i = 0; i < 16; ++i) p_out(i, long(k)) = c.values[i];
  });

  // least-squares fit p_out = R p_in
  Eigen::MatrixXd rt =
      p_in.transpose().colPivHouseholderQr().solve(p_out.transpose());
  report.ptm.entries = rt.transpose();
  report.ptm.encoding_name = enc.name;

  report.ptm_ideal = ptm_of_unitary(ideal_unitary, enc);
  report.chi = chi_from_ptm(report.ptm);
  report.chi_ideal = chi_from_ptm(report.ptm_ideal);
  // normalize the ideal chi for the fidelity convention
  double tr = report.chi_ideal.trace_real();
  if (std::abs(tr) > 1e-12) report.chi_ideal.entries /= tr;

  auto fid = process_fidelity_chi(report.chi, report.chi_ideal);
  report.fidelity_chi = fid.value;
  report.fidelity_chi_imag_residual = fid.imag_residual;
  report.overlap_ptm = ptm_overlap(report.ptm, report.ptm_ideal);
  report.chi_min_eigenvalue = report.chi.min_eigenvalue();
  return report;
}

std::string to_json(const QptReport& report) {
  json j;
  j["encoding"] = report.encoding_name;
  j["reconstruction_cutoff"] = report.reconstruction_cutoff;
  j["seed"] = report.seed;
  j["fidelity_chi"] = report.fidelity_chi;
  j["fidelity_chi_imag_residual"] = report.fidelity_chi_imag_residual;
  j["overlap_ptm"] = report.overlap_ptm;
  j["chi_min_eigenvalue"] = report.chi_min_eigenvalue;
  j["reconstruction_residuals"] = report.reconstruction_residuals;
  auto dump_real = [](const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(row);
    }
    return rows;
  };
  j["ptm"] = dump_real(report.ptm.entries);
  j["ptm_ideal"] = dump_real(report.ptm_ideal.entries);
  json chire = json::array(), chiim = json::array();
  for (int r = 0; r < 16; ++r) {
    json rowr = json::array(), rowi = json::array();
    for (int c = 0; c < 16; ++c) {
      rowr.push_back(report.chi.entries(r, c).real());
      rowi.push_back(report.chi.entries(r, c).imag());
    }
    chire.push_back(rowr);
    chiim.push_back(rowi);
  }
  j["chi_re"] = chire;
  j["chi_im"] = chiim;
  j["pauli_order"] = kPauliLabels;
  return j.dump(2);
}

std::string to_csv(const PauliTransferMatrix& r) {
  std::string out = "out_pauli";
  for (const auto& l : kPauliLabels) out += "," + l;
  out += "\n";
  for (int i = 0; i < 16; ++i) {
    out += kPauliLabels[i];
    for (int j = 0; j < 16; ++j) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), ",%.17g", r.entries(i, j));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace eswap
