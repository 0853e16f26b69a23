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

#include "eswap/tomography.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/QR>
#include <nlohmann/json.hpp>

namespace eswap {

using json = nlohmann::json;

namespace {
constexpr double kPi = std::numbers::pi;
const cxd kI{0.0, 1.0};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}
}  // namespace

std::vector<double> MeasurementRecord::point_means() const {
  std::vector<double> sums(points.size(), 0.0);
  std::vector<long> counts(points.size(), 0);
  for (const auto& s : shots) {
    sums[s.point_index] += double(s.parity_a) * double(s.parity_b);
    counts[s.point_index] += 1;
  }
  for (size_t i = 0; i < sums.size(); ++i)
    if (counts[i] > 0) sums[i] /= double(counts[i]);
  return sums;
}

namespace {

// Exact matrix elements <n|D(gamma)|m> of the infinite-dimensional
// displacement, projected onto the truncated block:
//   <n|D|m> = sqrt(m!/n!) gamma^{n-m} e^{-|g|^2/2} L_m^{(n-m)}(|g|^2), n >= m.
Matrix analytic_displacement(cxd gamma, int cutoff) {
  double x = std::norm(gamma);
  double envelope = std::exp(-0.5 * x);
  Matrix d(cutoff, cutoff);
  for (int n = 0; n < cutoff; ++n)
    for (int m = 0; m <= n; ++m) {
      int a = n - m;
      // associated Laguerre L_m^{(a)}(x) by forward recurrence
      double l0 = 1.0, l1 = 1.0 + a - x;
      double lm = (m == 0) ? l0 : l1;
      for (int k = 2; k <= m; ++k) {
        double lk = ((2.0 * k - 1.0 + a - x) * l1 - (k - 1.0 + a) * l0) / double(k);
        l0 = l1;
        l1 = lk;
        lm = lk;
      }
      double ratio = 1.0;  // sqrt(m!/n!)
      for (int k = m + 1; k <= n; ++k) ratio /= std::sqrt(double(k));
      cxd val = ratio * std::pow(gamma, a) * envelope * lm;
      d(n, m) = val;
      // <m|D|n> = conj(<n|D(-gamma)|m>): reuse symmetry D(g)^dag = D(-g)
      d(m, n) = std::conj(ratio * std::pow(-gamma, a) * envelope * lm);
    }
  return d;
}

}  // namespace

Operator displaced_parity(cxd beta, const ModeSpace& space) {
  // D(b) P D(b)^dag = D(2b) P exactly; using the exact projected matrix
  // elements keeps the measurement model faithful and the reconstruction
  // design full-rank, which the truncated-generator exponential is not.
  Matrix d2 = analytic_displacement(2.0 * beta, space.cutoff);
  for (int m = 0; m < space.cutoff; ++m)
    if (m % 2 == 1) d2.col(m) *= -1.0;
  return {d2, {space}};
}

double wigner_single(const DensityMatrix& rho_1mode, cxd beta, bool parity_normalized) {
  if (rho_1mode.spaces.size() != 1)
    throw SpaceMismatch("wigner_single expects a single-mode state");
  Operator op = displaced_parity(beta, rho_1mode.spaces[0]);
  double val = expectation(op, rho_1mode).real();
  return parity_normalized ? val : (2.0 / kPi) * val;
}

double joint_wigner(const DensityMatrix& rho_ab, cxd beta1, cxd beta2) {
  if (rho_ab.spaces.size() != 2)
    throw SpaceMismatch("joint_wigner expects a two-mode state");
  Operator oa = displaced_parity(beta1, rho_ab.spaces[0]);
  Operator ob = displaced_parity(beta2, rho_ab.spaces[1]);
  return expectation(tensor({oa, ob}), rho_ab).real();
}

std::vector<double> joint_parity_values(const DensityMatrix& rho_ab,
                                        const std::vector<std::pair<cxd, cxd>>& points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& [b1, b2] : points) out.push_back(joint_wigner(rho_ab, b1, b2));
  return out;
}

MeasurementRecord sample_parity_shots(const DensityMatrix& rho_ab,
                                      const std::vector<std::pair<cxd, cxd>>& points,
                                      long n_shots, double readout_err_a,
                                      double readout_err_b,
                                      std::optional<std::uint64_t> seed) {
  if (n_shots < 1) throw ConfigError("n_shots must be >= 1");
  if (!seed) throw SeedRequired("sampled tomography needs an explicit seed");
  if (rho_ab.spaces.size() != 2) throw SpaceMismatch("two-mode state expected");

  MeasurementRecord rec;
  rec.seed = *seed;
  rec.shots_per_point = n_shots;
  rec.readout_error_a = readout_err_a;
  rec.readout_error_b = readout_err_b;
  rec.shots.reserve(points.size() * size_t(n_shots));

  const ModeSpace& sa = rho_ab.spaces[0];
  const ModeSpace& sb = rho_ab.spaces[1];
  for (size_t k = 0; k < points.size(); ++k) {
    rec.points.push_back({points[k].first, points[k].second});
    Operator oa = embed(displaced_parity(points[k].first, sa), rho_ab.spaces);
    Operator ob = embed(displaced_parity(points[k].second, sb), rho_ab.spaces);
    double ea = expectation(oa, rho_ab).real();
    double eb = expectation(ob, rho_ab).real();
    double eab = (oa.m * ob.m * rho_ab.m).trace().real();

    // joint distribution of the two commuting +-1 observables
    double p[2][2];
    double trace = std::max(rho_ab.trace_real(), 1e-300);
    for (int sa2 = 0; sa2 < 2; ++sa2)
      for (int sb2 = 0; sb2 < 2; ++sb2) {
        double va = sa2 == 0 ? 1.0 : -1.0;
        double vb = sb2 == 0 ? 1.0 : -1.0;
        p[sa2][sb2] =
            std::max(0.0, 0.25 * (trace + va * ea + vb * eb + va * vb * eab));
      }
    double norm = p[0][0] + p[0][1] + p[1][0] + p[1][1];
    if (norm <= 0) throw NonConvergence("degenerate outcome distribution");

    std::mt19937_64 rng(splitmix64(*seed ^ (0x9e3779b97f4a7c15ull * (k + 1))));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (long s = 0; s < n_shots; ++s) {
      double x = u(rng) * norm;
      int pa, pb;
      if (x < p[0][0]) {
        pa = 1;
        pb = 1;
      } else if (x < p[0][0] + p[0][1]) {
        pa = 1;
        pb = -1;
      } else if (x < p[0][0] + p[0][1] + p[1][0]) {
        pa = -1;
        pb = 1;
      } else {
        pa = -1;
        pb = -1;
      }
      if (u(rng) < readout_err_a) pa = -pa;
      if (u(rng) < readout_err_b) pb = -pb;
      rec.shots.push_back({long(k), pa, pb});
    }
  }
  return rec;
}

std::vector<std::pair<cxd, cxd>> reconstruction_point_set(int cutoff, double radius_max,
                                                          int nrings, int nangles) {
  if (cutoff < 2) throw ConfigError("cutoff must be >= 2");
  // Displaced parity at beta probes photon numbers around |2 beta|^2 / 2, so
  // rings beyond sqrt(cutoff/2) carry next to no information at this
  // truncation; cap the extent accordingly.
  radius_max = std::min(radius_max, 1.05 * std::sqrt(double(cutoff) / 2.0));
  // per-mode set: origin plus rings; sized so that (#points)^2 exceeds the
  // (cutoff^2)^2 real parameters of a two-mode reconstruction
  if (nrings <= 0) nrings = std::max(3, cutoff - 1);
  // enough angular samples to keep the +-(cutoff-1) coherence harmonics from
  // aliasing onto each other
  if (nangles <= 0) nangles = std::max(8, 2 * cutoff);
  std::vector<cxd> one_mode;
  one_mode.push_back(0.0);
  for (int r = 1; r <= nrings; ++r) {
    double radius = radius_max * double(r) / double(nrings);
    for (int a = 0; a < nangles; ++a) {
      double phi = 2.0 * kPi * a / nangles + kPi / 16.0;
      one_mode.push_back(radius * std::exp(kI * phi));
    }
  }
  std::vector<std::pair<cxd, cxd>> points;
  points.reserve(one_mode.size() * one_mode.size());
  for (const auto& b1 : one_mode)
    for (const auto& b2 : one_mode) points.push_back({b1, b2});
  return points;
}

WignerReconstructor::WignerReconstructor(std::vector<std::pair<cxd, cxd>> points,
                                         int cutoff, double regularization)
    : points_(std::move(points)), cutoff_(cutoff), dim_(long(cutoff) * cutoff) {
  spaces_ = {alice_space(cutoff_), bob_space(cutoff_)};
  long nparams = dim_ * dim_;
  if (long(points_.size()) < nparams)
    throw UnderdeterminedGrid("grid has " + std::to_string(points_.size()) +
                              " points for " + std::to_string(nparams) + " parameters");

  point_ops_.reserve(points_.size());
  ModeSpace sa = spaces_[0], sb = spaces_[1];
  for (const auto& [b1, b2] : points_) {
    Operator oa = displaced_parity(b1, sa);
    Operator ob = displaced_parity(b2, sb);
    point_ops_.push_back(tensor({oa, ob}).m);
  }

  // real parameterization: x = [rho_ii, sqrt2 Re rho_{i<j}, sqrt2 Im rho_{i<j}]
  design_.resize(long(points_.size()), nparams);
  for (size_t k = 0; k < points_.size(); ++k) {
    const Matrix& mop = point_ops_[k];
    long col = 0;
    for (long i = 0; i < dim_; ++i) design_(long(k), col++) = mop(i, i).real();
    for (long i = 0; i < dim_; ++i)
      for (long j = i + 1; j < dim_; ++j) {
        design_(long(k), col++) = std::sqrt(2.0) * mop(j, i).real();
        design_(long(k), col++) = -std::sqrt(2.0) * mop(j, i).imag();
      }
  }

  if (regularization > 0) {
    // Tikhonov rows appended to the design
    long rows = design_.rows();
    design_.conservativeResize(rows + nparams, Eigen::NoChange);
    design_.bottomRows(nparams) =
        std::sqrt(regularization) * Eigen::MatrixXd::Identity(nparams, nparams);
  }
  qr_.setThreshold(1e-10);
  qr_.compute(design_);
  rank_ = qr_.rank();
  if (rank_ < nparams)
    throw UnderdeterminedGrid("grid is rank-deficient: rank " + std::to_string(rank_) +
                              " of " + std::to_string(nparams));
}

ReconstructionResult WignerReconstructor::solve(const std::vector<double>& values) const {
  if (long(values.size()) != long(points_.size()))
    throw SpaceMismatch("value count does not match the grid");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(design_.rows());
  w.head(long(values.size())) = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                                  long(values.size()));
  if (w.cwiseAbs().maxCoeff() == 0.0)
    throw NonConvergence("all-zero grid has no reconstructable state");

  Eigen::VectorXd x = qr_.solve(w);
  double rms = std::sqrt((design_.topRows(long(values.size())) * x -
                          w.head(long(values.size())))
                             .squaredNorm() /
                         double(values.size()));

  Matrix rho = Matrix::Zero(dim_, dim_);
  long col = 0;
  for (long i = 0; i < dim_; ++i) rho(i, i) = x(col++);
  for (long i = 0; i < dim_; ++i)
    for (long j = i + 1; j < dim_; ++j) {
      double re = x(col++) / std::sqrt(2.0);
      double im = x(col++) / std::sqrt(2.0);
      rho(i, j) = cxd(re, im);
      rho(j, i) = cxd(re, -im);
    }

  // positivity by eigenvalue clipping; the trace stays free
  Eigen::SelfAdjointEigenSolver<Matrix> es((rho + rho.adjoint()) / 2.0);
  Eigen::VectorXd ev = es.eigenvalues();
  double clipped = 0.0;
  long rank_eff = 0;
  for (long i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-8) {
      clipped += -ev(i);
      ev(i) = 0.0;
    }
    if (ev(i) > 1e-10) ++rank_eff;
  }
  Matrix clean = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  clean = (clean + clean.adjoint()) / 2.0;

  ReconstructionResult result;
  result.rho = {clean, spaces_};
  result.residual = rms;
  result.effective_rank = rank_eff;
  result.clipped_magnitude = clipped;
  return result;
}

std::vector<double> WignerReconstructor::exact_values(const DensityMatrix& rho) const {
  if (!same_spaces(rho.spaces, spaces_))
    throw SpaceMismatch("state space does not match the reconstructor");
  std::vector<double> out(points_.size());
  for (size_t k = 0; k < points_.size(); ++k)
    out[k] = (point_ops_[k] * rho.m).trace().real();
  return out;
}

ReconstructionResult reconstruct_density_matrix(const WignerGrid& grid, int cutoff,
                                                double regularization) {
  std::vector<std::pair<cxd, cxd>> pts;
  for (const auto& p : grid.points) {
    if (!p.beta2) throw SpaceMismatch("two-mode reconstruction needs two-mode points");
    pts.push_back({p.beta1, *p.beta2});
  }
  WignerReconstructor rec(std::move(pts), cutoff, regularization);
  std::vector<double> values = grid.values;
  if (!grid.parity_normalized)
    for (auto& v : values) v *= kPi * kPi / 4.0;
  return rec.solve(values);
}

std::array<DensityMatrix, 4> ancilla_conditionals(const DensityMatrix& rho_full,
                                                  bool literal_minus_convention) {
  if (rho_full.spaces.empty() || rho_full.spaces.front().label != Mode::Ancilla)
    throw SpaceMismatch("three-mode state with a leading ancilla expected");
  Spaces cav(rho_full.spaces.begin() + 1, rho_full.spaces.end());
  long dc = dim_of(cav);
  Matrix gg = rho_full.m.block(0, 0, dc, dc);
  Matrix ge = rho_full.m.block(0, dc, dc, dc);
  Matrix eg = rho_full.m.block(dc, 0, dc, dc);
  Matrix ee = rho_full.m.block(dc, dc, dc, dc);
  Matrix pp = 0.5 * (gg + ge + eg + ee);
  Matrix mm;
  if (literal_minus_convention)
    mm = 0.5 * (gg - ge - eg + ee);  // <-|rho|-> with |-> = (|g>-|e>)/sqrt(2)
  else
    mm = 0.5 * (gg + kI * ge - kI * eg + ee);  // (|g>+i|e>)/sqrt(2) conditional
  return {DensityMatrix{gg, cav}, DensityMatrix{ee, cav}, DensityMatrix{pp, cav},
          DensityMatrix{mm, cav}};
}

ThreeModeAssembly assemble_three_mode(const DensityMatrix& e_gg, const DensityMatrix& e_ee,
                                      const DensityMatrix& e_pp, const DensityMatrix& e_mm) {
  const Spaces& cav = e_gg.spaces;
  if (!same_spaces(cav, e_ee.spaces) || !same_spaces(cav, e_pp.spaces) ||
      !same_spaces(cav, e_mm.spaces))
    throw SpaceMismatch("conditionals must share one cavity space");
  long dc = dim_of(cav);

  // Block formulas are fixed; the measurement convention (which conditional
  // sits in the e_mm slot) is chosen by the caller via ancilla_conditionals.
  Matrix rho1 = e_gg.m;
  Matrix rho4 = e_ee.m;
  Matrix sum14 = rho1 + rho4;
  Matrix rho2 = e_pp.m - kI * e_mm.m - (cxd(1, -1) / 2.0) * sum14;
  Matrix rho3 = e_pp.m + kI * e_mm.m - (cxd(1, 1) / 2.0) * sum14;

  Matrix full = Matrix::Zero(2 * dc, 2 * dc);
  full.block(0, 0, dc, dc) = rho1;
  full.block(0, dc, dc, dc) = rho2;
  full.block(dc, 0, dc, dc) = rho3;
  full.block(dc, dc, dc, dc) = rho4;

  double herm = (full - full.adjoint()).cwiseAbs().maxCoeff();
  full = (full + full.adjoint()) / 2.0;

  Spaces spaces{ancilla_space()};
  spaces.insert(spaces.end(), cav.begin(), cav.end());
  return {DensityMatrix{full, spaces}, herm};
}

PauliPointsPlan pauli_points_plan(const LogicalEncoding& encoding) {
  if (encoding.name != "coherent")
    throw EncodingUnsupported("the 16-point parity plan targets the coherent encoding");
  double alpha = encoding.alpha;
  int cutoff = encoding.cutoff;

  // per-mode points: population poles, the origin and one fringe point
  std::vector<cxd> pts = {cxd(-alpha, 0.0), cxd(alpha, 0.0), cxd(0.0, 0.0),
                          kI * (kPi / (8.0 * alpha))};

  // exact 4x4 map from the code-space blocks of the four point operators to
  // the logical Paulis
  ModeSpace sp = alice_space(cutoff);
  Vector b0 = encoding.basis0, b1 = encoding.basis1;
  Eigen::MatrixXd system(4, 4);  // rows: operator components, cols: points
  auto components = [&](const Matrix& op) {
    // Hermitian 2x2 block -> (00, 11, Re01, Im01)
    Eigen::Vector4d v;
    v(0) = (b0.dot(op * b0)).real();
    v(1) = (b1.dot(op * b1)).real();
    cxd off = b0.dot(op * b1);
    v(2) = off.real();
    v(3) = off.imag();
    return v;
  };
  for (int k = 0; k < 4; ++k)
    system.col(k) = components(displaced_parity(pts[k], sp).m);

  Eigen::Matrix<double, 4, 4> paulis;  // columns: I, X, Y, Z targets
  paulis.col(0) << 1, 1, 0, 0;
  paulis.col(1) << 0, 0, 1, 0;
  paulis.col(2) << 0, 0, 0, -1;  // Y = -i|0><1| + i|1><0|: Im<0|Y|1> = -1
  paulis.col(3) << 1, -1, 0, 0;

  Eigen::FullPivLU<Eigen::Matrix4d> lu(system);
  if (!lu.isInvertible())
    throw NonConvergence("parity point set is degenerate on the code space");
  Eigen::Matrix4d m = lu.solve(paulis).transpose();  // m(p, k): weight of point k

  PauliPointsPlan plan;
  plan.points.reserve(16);
  plan.map.resize(16, 16);
  for (int ka = 0; ka < 4; ++ka)
    for (int kb = 0; kb < 4; ++kb) plan.points.push_back({pts[ka], pts[kb]});
  for (int pa = 0; pa < 4; ++pa)
    for (int pb = 0; pb < 4; ++pb)
      for (int ka = 0; ka < 4; ++ka)
        for (int kb = 0; kb < 4; ++kb)
          plan.map(4 * pa + pb, 4 * ka + kb) = m(pa, ka) * m(pb, kb);
  return plan;
}

CorrelatorSet PauliPointsPlan::correlators_from_parities(
    const std::vector<double>& parities) const {
  if (long(parities.size()) != 16) throw SpaceMismatch("plan expects 16 parity values");
  Eigen::Map<const Eigen::VectorXd> p(parities.data(), 16);
  Eigen::VectorXd c = map * p;
  CorrelatorSet out;
  for (int i = 0; i < 16; ++i) out.values[i] = c(i);
  return out;
}

// --- persistence ---------------------------------------------------------------

namespace {
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string to_csv(const WignerGrid& grid) {
  std::ostringstream os;
  os << "point_index,beta1_re,beta1_im,beta2_re,beta2_im,value\n";
  for (size_t k = 0; k < grid.points.size(); ++k) {
    const auto& p = grid.points[k];
    os << k << ',' << fmt_double(p.beta1.real()) << ',' << fmt_double(p.beta1.imag())
       << ',';
    if (p.beta2)
      os << fmt_double(p.beta2->real()) << ',' << fmt_double(p.beta2->imag());
    else
      os << ',';
    os << ',' << (k < grid.values.size() ? fmt_double(grid.values[k]) : "") << '\n';
  }
  return os.str();
}

WignerGrid wigner_grid_from_csv(const std::string& text) {
  WignerGrid grid;
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    while (cells.size() < 6) cells.push_back("");
    WignerPoint p;
    p.beta1 = cxd(std::stod(cells[1]), std::stod(cells[2]));
    if (!cells[3].empty()) p.beta2 = cxd(std::stod(cells[3]), std::stod(cells[4]));
    grid.points.push_back(p);
    if (!cells[5].empty()) grid.values.push_back(std::stod(cells[5]));
  }
  return grid;
}

std::string to_csv(const MeasurementRecord& record) {
  std::ostringstream os;
  os << "point_index,parity_a,parity_b\n";
  for (const auto& s : record.shots)
    os << s.point_index << ',' << s.parity_a << ',' << s.parity_b << '\n';
  return os.str();
}

MeasurementRecord record_from_csv(const std::string& text) {
  MeasurementRecord rec;
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    long idx;
    int pa, pb;
    if (std::sscanf(line.c_str(), "%ld,%d,%d", &idx, &pa, &pb) == 3)
      rec.shots.push_back({idx, pa, pb});
  }
  return rec;
}

std::string manifest_json(const MeasurementRecord& record) {
  json j;
  j["seed"] = record.seed;
  j["shots_per_point"] = record.shots_per_point;
  j["readout_error_a"] = record.readout_error_a;
  j["readout_error_b"] = record.readout_error_b;
  j["n_points"] = record.points.size();
  j["n_shots_total"] = record.shots.size();
  return j.dump(2);
}

}  // namespace eswap
