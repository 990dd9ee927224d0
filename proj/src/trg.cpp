#include "tnet/trg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "detail/linalg.hpp"
#include "tnet/errors.hpp"

namespace tnet {

namespace {

const std::vector<Label> kLegs = {"u", "l", "d", "r"};

void check_chi(std::size_t chi) {
  if (chi < 1) throw ConfigError("trg.chi", "bond dimension must be at least 1");
}

void check_finite(const DenseTensor& t) {
  if (!t.all_finite()) throw NumericalError("coarse graining: non-finite tensor");
}

// Multiplies every slice of leg `label` by the matching weight.
DenseTensor scale_leg(const DenseTensor& t, const Label& label, const std::vector<double>& w) {
  MatrixXc m = t.to_matrix({label});
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) *= w[static_cast<std::size_t>(i)];
  std::vector<Label> cols;
  std::vector<std::size_t> col_dims;
  for (const auto& l : t.labels()) {
    if (l == label) continue;
    cols.push_back(l);
    col_dims.push_back(t.dim(l));
  }
  return DenseTensor::from_matrix(m, {t.dim(label)}, {label}, col_dims, cols).permuted(t.labels());
}

std::vector<double> sqrt_of(const std::vector<double>& s) {
  std::vector<double> out(s.size());
  std::transform(s.begin(), s.end(), out.begin(), [](double x) { return std::sqrt(x); });
  return out;
}

CoarseGrainState rescaled(DenseTensor t, const CoarseGrainState& prev, double error) {
  check_finite(t);
  const double c = t.max_abs();
  if (!(c > 0.0)) throw NumericalError("coarse graining: tensor vanished");
  CoarseGrainState out;
  out.sites = prev.sites * 2;
  out.log_norm_per_site = prev.log_norm_per_site + std::log(c) / static_cast<double>(out.sites);
  out.tensor = t.scaled(1.0 / c);
  out.truncation_error = error;
  return out;
}

// Reflection across the main diagonal: up <-> left, down <-> right.
DenseTensor reflect(const DenseTensor& t) {
  return t.relabeled({{"u", "l"}, {"l", "u"}, {"d", "r"}, {"r", "d"}}).permuted(kLegs);
}

struct Isometry {
  MatrixXc u;  // doubled index x kept
  double error = 0.0;
};

Isometry isometry_of(const MatrixXc& rho, std::size_t chi) {
  const auto eig = detail::eigh(rho);
  const Eigen::Index n = eig.values.size();
  std::vector<double> s(static_cast<std::size_t>(n));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lam = std::max(0.0, eig.values(n - 1 - i));
    s[static_cast<std::size_t>(i)] = std::sqrt(lam);
    total += lam;
  }
  TruncationSpec spec;
  spec.max_bond = chi;
  const auto rep = choose_truncation(s, spec);
  Isometry out;
  out.u = eig.vectors.rightCols(static_cast<Eigen::Index>(rep.kept)).rowwise().reverse();
  out.error = total > 0.0 ? rep.discarded_weight : 0.0;
  return out;
}

// Density matrix of the doubled upper (or lower) bond of two horizontally
// merged copies of t, with rows (a1 a2).
MatrixXc doubled_density(const DenseTensor& t, bool upper) {
  const Label keep = upper ? "u" : "d";
  const Label other = upper ? "d" : "u";
  const auto tc = t.conj();
  // Left copy: its right leg is the shared bond m; sum over l and `other`.
  auto a = contract(t.relabeled({{keep, "a"}, {"r", "m"}}), tc.relabeled({{keep, "a'"}, {"r", "m'"}}),
                    {{"l", "l"}, {other, other}});  // a m a' m'
  // Right copy: its left leg is m; sum over r and `other`.
  auto b = contract(t.relabeled({{keep, "b"}, {"l", "m"}}), tc.relabeled({{keep, "b'"}, {"l", "m'"}}),
                    {{"r", "r"}, {other, other}});  // b m b' m'
  const auto rho = contract(a, b, {{"m", "m"}, {"m'", "m'"}});  // a a' b b'
  return rho.to_matrix({"a", "b"});
}

CoarseGrainState hotrg_horizontal(const CoarseGrainState& state, std::size_t chi) {
  const auto& t = state.tensor;
  const std::size_t du = t.dim("u"), dd = t.dim("d");
  if (du != dd) throw std::invalid_argument("hotrg_step: up and down bonds differ");

  const auto up = isometry_of(doubled_density(t, true), chi);
  const auto down = isometry_of(doubled_density(t, false), chi);
  // Ties keep the upper side. The projector U U^dagger sits on every vertical
  // bond; it must act on the index its isometry was built from, which puts the
  // conjugate on the other side for the lower choice.
  Isometry iso = up;
  if (down.error < up.error) {
    iso = down;
    iso.u = down.u.conjugate();
  }

  const auto t1 = t.relabeled({{"u", "u1"}, {"d", "d1"}, {"r", "m"}});
  const auto t2 = t.relabeled({{"u", "u2"}, {"d", "d2"}, {"l", "m"}});
  const auto k = static_cast<std::size_t>(iso.u.cols());
  const auto ud = DenseTensor::from_matrix(iso.u, {dd, dd}, {"d1", "d2"}, {k}, {"d"});
  const MatrixXc uc = iso.u.conjugate();

  // Chunk the new upper leg so the rank-5 intermediates stay bounded.
  const double per_col = std::pow(static_cast<double>(std::max({du, t.dim("l"), t.dim("r")})), 4);
  const auto block = static_cast<std::size_t>(std::max(1.0, std::floor(double(1 << 24) / per_col)));
  std::vector<MatrixXc> rows;
  for (std::size_t k0 = 0; k0 < k; k0 += block) {
    const std::size_t kb = std::min(block, k - k0);
    const auto ub = DenseTensor::from_matrix(uc.middleCols(static_cast<Eigen::Index>(k0), static_cast<Eigen::Index>(kb)),
                                             {du, du}, {"u1", "u2"}, {kb}, {"u"});
    auto x = contract(ub, t1, {{"u1", "u1"}});                 // u2 u l d1 m
    auto y = contract(x, t2, {{"u2", "u2"}, {"m", "m"}});      // u l d1 d2 r
    auto z = contract(y, ud, {{"d1", "d1"}, {"d2", "d2"}});    // u l r d
    rows.push_back(z.permuted(kLegs).to_matrix({"u"}));
  }
  MatrixXc all(static_cast<Eigen::Index>(k), rows.front().cols());
  Eigen::Index r0 = 0;
  for (const auto& m : rows) {
    all.middleRows(r0, m.rows()) = m;
    r0 += m.rows();
  }
  auto merged = DenseTensor::from_matrix(all, {k}, {"u"}, {t.dim("l"), k, t.dim("r")}, {"l", "d", "r"});
  return rescaled(std::move(merged), state, iso.error);
}

}  // namespace

CoarseGrainState build_plaquette_tensor(const ClassicalModelSpec& spec) {
  spec.validate();
  const double bj = spec.beta * spec.j;
  // Eigenvectors (1, 1)/sqrt2 and (1, -1)/sqrt2 with eigenvalues 2cosh, 2sinh.
  const double a = std::sqrt(2.0 * std::cosh(bj)), b = std::sqrt(2.0 * std::sinh(bj));
  double w[2][2];
  w[0][0] = w[1][1] = 0.5 * (a + b);
  w[0][1] = w[1][0] = 0.5 * (a - b);
  std::vector<cplx> data(16, cplx{0.0, 0.0});
  for (int s = 0; s < 2; ++s)
    for (int u = 0; u < 2; ++u)
      for (int l = 0; l < 2; ++l)
        for (int d = 0; d < 2; ++d)
          for (int r = 0; r < 2; ++r) data[((u * 2 + l) * 2 + d) * 2 + r] += w[s][u] * w[s][l] * w[s][d] * w[s][r];
  CoarseGrainState out;
  out.tensor = DenseTensor({2, 2, 2, 2}, kLegs, std::move(data));
  return out;
}

CoarseGrainState trg_step(const CoarseGrainState& state, std::size_t chi) {
  check_chi(chi);
  check_finite(state.tensor);
  const auto& t = state.tensor;
  TruncationSpec spec;
  spec.max_bond = chi;

  // Split along the two diagonals; sqrt(S) goes to both halves.
  auto a = svd_split(t, {"u", "r"}, spec, "x", "x");  // NE (u r x), SW (x l d)
  auto b = svd_split(t, {"l", "u"}, spec, "x", "x");  // NW (l u x), SE (x d r)
  const auto sa = sqrt_of(a.s), sb = sqrt_of(b.s);
  const auto ne = scale_leg(a.u, "x", sa), sw = scale_leg(a.v, "x", sa);
  const auto nw = scale_leg(b.u, "x", sb), se = scale_leg(b.v, "x", sb);

  // Plaquette bonds: i between the upper pair, k between the right pair,
  // j between the left pair, m between the lower pair.
  const auto p_se = se.relabeled({{"x", "U"}, {"d", "j"}, {"r", "i"}});
  const auto p_sw = sw.relabeled({{"x", "R"}, {"l", "i"}, {"d", "k"}});
  const auto p_ne = ne.relabeled({{"x", "L"}, {"u", "j"}, {"r", "m"}});
  const auto p_nw = nw.relabeled({{"x", "D"}, {"l", "m"}, {"u", "k"}});
  const auto x = contract(p_se, p_sw, {{"i", "i"}});             // U j R k
  const auto y = contract(p_ne, p_nw, {{"m", "m"}});             // j L k D
  auto next = contract(x, y, {{"j", "j"}, {"k", "k"}})           // U R L D
                  .relabeled({{"U", "u"}, {"R", "r"}, {"L", "l"}, {"D", "d"}})
                  .permuted(kLegs);
  const double error = std::max(a.report.discarded_weight, b.report.discarded_weight);
  return rescaled(std::move(next), state, error);
}

CoarseGrainState hotrg_step(const CoarseGrainState& state, std::size_t chi, HotrgDirection direction) {
  check_chi(chi);
  check_finite(state.tensor);
  if (direction == HotrgDirection::horizontal) return hotrg_horizontal(state, chi);
  CoarseGrainState mirrored = state;
  mirrored.tensor = reflect(state.tensor);
  auto out = hotrg_horizontal(mirrored, chi);
  out.tensor = reflect(out.tensor);
  return out;
}

cplx torus_trace(const DenseTensor& t) {
  const auto m = t.permuted(kLegs);
  const std::size_t du = m.dim("u"), dl = m.dim("l");
  if (m.dim("d") != du || m.dim("r") != dl) throw std::invalid_argument("torus_trace: legs do not close");
  cplx sum{0.0, 0.0};
  for (std::size_t a = 0; a < du; ++a)
    for (std::size_t b = 0; b < dl; ++b) sum += m.data()[((a * dl + b) * du + a) * dl + b];
  return sum;
}

double log_z_per_site(const CoarseGrainState& state) {
  const cplx tr = torus_trace(state.tensor);
  if (!(tr.real() > 0.0) || std::abs(tr.imag()) > 1e-12 * std::abs(tr.real())) {
    throw NumericalError("coarse graining: torus trace is not positive");
  }
  return state.log_norm_per_site + std::log(tr.real()) / static_cast<double>(state.sites);
}

FreeEnergyResult free_energy(const ClassicalModelSpec& spec, CoarseGrainMethod method, std::size_t chi,
                             std::size_t iterations) {
  check_chi(chi);
  if (iterations < 1 || iterations > 60) throw ConfigError("trg.iterations", "iterations must be in [1, 60]");
  auto state = build_plaquette_tensor(spec);
  FreeEnergyResult out;
  for (std::size_t it = 0; it < iterations; ++it) {
    if (method == CoarseGrainMethod::trg) {
      state = trg_step(state, chi);
    } else {
      state = hotrg_step(state, chi, it % 2 == 0 ? HotrgDirection::horizontal : HotrgDirection::vertical);
    }
    out.truncation_errors.push_back(state.truncation_error);
    out.trace.push_back(-log_z_per_site(state) / spec.beta);
  }
  out.iterations = iterations;
  out.log_z_per_site = log_z_per_site(state);
  out.free_energy = -out.log_z_per_site / spec.beta;
  return out;
}

}  // namespace tnet
