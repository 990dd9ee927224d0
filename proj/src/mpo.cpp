#include "tnet/mpo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "detail/environment.hpp"
#include "detail/linalg.hpp"
#include "tnet/errors.hpp"

namespace tnet {

namespace {

const std::vector<Label> kMpoLabels = {"l", "po", "pi", "r"};

struct TermDecomposition {
  std::vector<MatrixXc> a, b;  // h2 = sum_k a[k] (x) b[k]
};

MatrixXc spin(const MatrixXc& pauli) { return 0.5 * pauli; }

TermDecomposition decompose(const HamiltonianSpec& spec) {
  TermDecomposition t;
  switch (spec.model) {
    case ModelKind::transverse_field_ising:
      t.a = {-spec.j * ops::sigma_z()};
      t.b = {ops::sigma_z()};
      break;
    case ModelKind::heisenberg_xxz:
      // S+ S- + S- S+ = 2 (Sx Sx + Sy Sy)
      t.a = {0.5 * spec.j * ops::sigma_plus(), 0.5 * spec.j * ops::sigma_minus(),
             spec.j * spec.delta * spin(ops::sigma_z())};
      t.b = {ops::sigma_minus(), ops::sigma_plus(), spin(ops::sigma_z())};
      break;
    case ModelKind::custom_nn: {
      const auto d = static_cast<Eigen::Index>(spec.phys_dim());
      // Regroup h[(a b), (a' b')] -> R[(a a'), (b b')].
      MatrixXc r(d * d, d * d);
      for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b)
          for (Eigen::Index ap = 0; ap < d; ++ap)
            for (Eigen::Index bp = 0; bp < d; ++bp) r(a * d + ap, b * d + bp) = spec.two_site(a * d + b, ap * d + bp);
      const auto dec = detail::svd(r);
      for (Eigen::Index k = 0; k < dec.s.size(); ++k) {
        if (!(dec.s(k) > 1e-14 * dec.s(0))) break;
        MatrixXc a(d, d), b(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
          for (Eigen::Index j = 0; j < d; ++j) {
            a(i, j) = dec.u(i * d + j, k) * dec.s(k);
            b(i, j) = dec.vh(k, i * d + j);
          }
        t.a.push_back(a);
        t.b.push_back(b);
      }
      break;
    }
  }
  return t;
}

DenseTensor site_tensor(const std::vector<std::vector<MatrixXc>>& blocks, std::size_t row_lo,
                        std::size_t row_hi, std::size_t col_lo, std::size_t col_hi, std::size_t d) {
  const std::size_t dl = row_hi - row_lo, dr = col_hi - col_lo;
  std::vector<cplx> data(dl * d * d * dr, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < dl; ++i)
    for (std::size_t j = 0; j < dr; ++j) {
      const auto& blk = blocks[row_lo + i][col_lo + j];
      if (blk.size() == 0) continue;
      for (std::size_t po = 0; po < d; ++po)
        for (std::size_t pi = 0; pi < d; ++pi)
          data[((i * d + po) * d + pi) * dr + j] =
              blk(static_cast<Eigen::Index>(po), static_cast<Eigen::Index>(pi));
    }
  return DenseTensor({dl, d, d, dr}, kMpoLabels, std::move(data));
}

// Fuses (a, b) label pairs of a tensor whose axes are already ordered as
// (a0, b0, p, a1, b1) into the MPS site layout (l, p, r).
DenseTensor fuse_site(const DenseTensor& t) {
  const auto& d = t.dims();
  return DenseTensor({d[0] * d[1], d[2], d[3] * d[4]}, {"l", "p", "r"},
                     std::vector<cplx>(t.data().begin(), t.data().end()));
}

}  // namespace

MatrixProductOperator::MatrixProductOperator(std::vector<DenseTensor> sites) {
  if (sites.empty()) throw std::invalid_argument("MatrixProductOperator: empty chain");
  for (auto& s : sites) {
    if (s.rank() != 4) throw std::invalid_argument("MatrixProductOperator: site tensors must be rank 4");
    sites_.push_back(s.permuted(kMpoLabels));
    if (sites_.back().dims()[1] != sites_.back().dims()[2]) {
      throw std::invalid_argument("MatrixProductOperator: physical legs must have equal extent");
    }
  }
  if (sites_.front().dims()[0] != 1 || sites_.back().dims()[3] != 1) {
    throw std::invalid_argument("MatrixProductOperator: boundary bonds must have extent 1");
  }
  for (std::size_t b = 0; b + 1 < sites_.size(); ++b) {
    if (sites_[b].dims()[3] != sites_[b + 1].dims()[0]) {
      throw std::invalid_argument("MatrixProductOperator: bond extent mismatch");
    }
  }
}

std::vector<std::size_t> MatrixProductOperator::phys_dims() const {
  std::vector<std::size_t> d;
  for (const auto& s : sites_) d.push_back(s.dims()[1]);
  return d;
}

std::size_t MatrixProductOperator::max_bond() const {
  std::size_t m = 1;
  for (const auto& s : sites_) m = std::max(m, s.dims()[3]);
  return m;
}

MatrixXc two_site_term(const HamiltonianSpec& spec) {
  spec.validate();
  const auto t = decompose(spec);
  if (spec.model == ModelKind::custom_nn) return spec.two_site;
  MatrixXc h = MatrixXc::Zero(4, 4);
  for (std::size_t k = 0; k < t.a.size(); ++k) h += ops::kron(t.a[k], t.b[k]);
  return h;
}

MatrixXc one_site_term(const HamiltonianSpec& spec) {
  spec.validate();
  switch (spec.model) {
    case ModelKind::transverse_field_ising: return -spec.h * ops::sigma_x();
    case ModelKind::heisenberg_xxz: return -spec.field * spin(ops::sigma_z());
    case ModelKind::custom_nn:
      if (spec.one_site.size() != 0) return spec.one_site;
      return MatrixXc::Zero(static_cast<Eigen::Index>(spec.phys_dim()),
                            static_cast<Eigen::Index>(spec.phys_dim()));
  }
  return {};
}

std::vector<MatrixXc> bond_terms(const HamiltonianSpec& spec) {
  const MatrixXc h2 = two_site_term(spec);
  const MatrixXc h1 = one_site_term(spec);
  const MatrixXc id = ops::identity(spec.phys_dim());
  std::vector<MatrixXc> out;
  for (std::size_t b = 0; b + 1 < spec.n; ++b) {
    const double wl = b == 0 ? 1.0 : 0.5;
    const double wr = b + 2 == spec.n ? 1.0 : 0.5;
    out.push_back(h2 + wl * ops::kron(h1, id) + wr * ops::kron(id, h1));
  }
  return out;
}

MatrixProductOperator build_mpo(const HamiltonianSpec& spec) {
  spec.validate();
  const auto t = decompose(spec);
  const std::size_t d = spec.phys_dim();
  const std::size_t r = t.a.size();
  const std::size_t dim = r + 2;
  std::vector<std::vector<MatrixXc>> blocks(dim, std::vector<MatrixXc>(dim));
  const MatrixXc id = ops::identity(d);
  blocks[0][0] = id;
  blocks[dim - 1][dim - 1] = id;
  blocks[dim - 1][0] = one_site_term(spec);
  for (std::size_t k = 0; k < r; ++k) {
    blocks[dim - 1][1 + k] = t.a[k];
    blocks[1 + k][0] = t.b[k];
  }
  std::vector<DenseTensor> sites;
  for (std::size_t k = 0; k < spec.n; ++k) {
    const std::size_t row_lo = k == 0 ? dim - 1 : 0;
    const std::size_t col_hi = k + 1 == spec.n ? 1 : dim;
    sites.push_back(site_tensor(blocks, row_lo, dim, 0, col_hi, d));
  }
  return MatrixProductOperator(std::move(sites));
}

MatrixProductOperator identity_mpo(const std::vector<std::size_t>& phys_dims) {
  std::vector<DenseTensor> sites;
  for (auto d : phys_dims) {
    sites.push_back(site_tensor({{ops::identity(d)}}, 0, 1, 0, 1, d));
  }
  return MatrixProductOperator(std::move(sites));
}

MatrixProductOperator lift_to_purification(const MatrixProductOperator& w, std::size_t d_anc) {
  std::vector<DenseTensor> sites;
  for (const auto& s : w.sites()) {
    const auto& dm = s.dims();
    const std::size_t d = dm[1], dd = d * d_anc;
    std::vector<cplx> data(dm[0] * dd * dd * dm[3], cplx{0.0, 0.0});
    for (std::size_t l = 0; l < dm[0]; ++l)
      for (std::size_t po = 0; po < d; ++po)
        for (std::size_t pi = 0; pi < d; ++pi)
          for (std::size_t r = 0; r < dm[3]; ++r) {
            const cplx v = s.at({l, po, pi, r});
            if (v == cplx{0.0, 0.0}) continue;
            for (std::size_t a = 0; a < d_anc; ++a) {
              data[((l * dd + po * d_anc + a) * dd + pi * d_anc + a) * dm[3] + r] = v;
            }
          }
    sites.emplace_back(std::vector<std::size_t>{dm[0], dd, dd, dm[3]}, kMpoLabels, std::move(data));
  }
  return MatrixProductOperator(std::move(sites));
}

MatrixXc to_dense(const MatrixProductOperator& w) {
  std::vector<Label> rows;
  auto name = [](const char* p, std::size_t k) { return std::string(p) + std::to_string(k); };
  DenseTensor t = w.site(0).relabeled({{"po", name("o", 0)}, {"pi", name("i", 0)}});
  rows.push_back(name("o", 0));
  for (std::size_t k = 1; k < w.size(); ++k) {
    t = contract(t, w.site(k).relabeled({{"po", name("o", k)}, {"pi", name("i", k)}, {"l", "x"}}),
                 {{"r", "x"}});
    rows.push_back(name("o", k));
  }
  // Boundary bonds have extent 1; fold them into the row/column groups.
  rows.insert(rows.begin(), "l");
  return t.to_matrix(rows);
}

cplx expect_mpo(const MatrixProductState& psi, const MatrixProductOperator& w) {
  if (psi.phys_dims() != w.phys_dims()) throw std::invalid_argument("expect_mpo: lattice mismatch");
  auto env = detail::unit_env3();
  for (std::size_t k = 0; k < psi.size(); ++k) env = detail::grow_left(env, psi.site(k), w.site(k), psi.site(k));
  const double n = norm(psi);
  return env.data()[0] / (n * n);  // (1, 1, 1) after the last site
}

MatrixProductState apply_mpo(const MatrixProductOperator& w, const MatrixProductState& psi) {
  if (psi.phys_dims() != w.phys_dims()) throw std::invalid_argument("apply_mpo: lattice mismatch");
  std::vector<DenseTensor> sites;
  for (std::size_t k = 0; k < psi.size(); ++k) {
    auto t = contract(w.site(k).relabeled({{"l", "wl"}, {"r", "wr"}}),
                      psi.site(k).relabeled({{"l", "al"}, {"r", "ar"}}), {{"pi", "p"}});
    sites.push_back(fuse_site(t.permuted({"wl", "al", "po", "wr", "ar"})));
  }
  return MatrixProductState(std::move(sites));
}

ApplyResult apply_mpo_variational(const MatrixProductOperator& w, const MatrixProductState& psi,
                                  const MatrixProductState& guess, const TruncationSpec& spec,
                                  std::size_t max_sweeps, double tol) {
  spec.validate();
  if (psi.phys_dims() != w.phys_dims() || guess.phys_dims() != w.phys_dims()) {
    throw std::invalid_argument("apply_mpo_variational: lattice mismatch");
  }
  if (max_sweeps < 1) throw std::invalid_argument("apply_mpo_variational: need at least one sweep");
  const double target = std::pow(norm(apply_mpo(w, psi)), 2);
  if (!(target > 0.0) || !std::isfinite(target)) throw NumericalError("apply_mpo_variational: W|psi> vanishes");

  MatrixProductState phi = guess;
  if (phi.max_bond() > spec.max_bond) {
    TruncationSpec cap = spec;
    cap.rel_cutoff = 0.0;
    phi = compress(phi, cap).state;
  }
  phi = canonicalize(phi, 0);
  const std::size_t n = phi.size();

  std::vector<DenseTensor> left(n), right(n);
  left[0] = detail::unit_env3();
  right[n - 1] = detail::unit_env3();
  for (std::size_t k = n - 1; k > 0; --k) {
    right[k - 1] = detail::grow_right(right[k], phi.site(k), w.site(k), psi.site(k));
  }

  // Squared residuals below this fraction of ||W psi||^2 are roundoff.
  constexpr double kResolution = 64 * std::numeric_limits<double>::epsilon();
  ApplyResult out;
  double previous = -1.0;
  double m2 = 0.0;
  for (std::size_t sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (std::size_t c = 0; c + 1 < n; ++c) {
      auto m = detail::apply_effective(left[c], w.site(c), right[c], psi.site(c));
      m2 = m.norm() * m.norm();
      auto qr = qr_split(m, {"l", "p"}, "r", "x");
      auto next = contract(qr.r, phi.site(c + 1), {{"r", "l"}}).relabeled({{"x", "l"}});
      left[c + 1] = detail::grow_left(left[c], qr.q, w.site(c), psi.site(c));
      phi.set_pair(c, std::move(qr.q), std::move(next));
    }
    if (n == 1) {
      m2 = std::pow(detail::apply_effective(left[0], w.site(0), right[0], psi.site(0)).norm(), 2);
    }
    out.fidelity_trace.push_back(m2 / target);
    for (std::size_t c = n - 1; c > 0; --c) {
      auto m = detail::apply_effective(left[c], w.site(c), right[c], psi.site(c));
      m2 = m.norm() * m.norm();
      auto qr = qr_split(m, {"p", "r"}, "l", "x");
      auto prev = contract(phi.site(c - 1), qr.r, {{"r", "l"}}).relabeled({{"x", "r"}});
      right[c - 1] = detail::grow_right(right[c], qr.q, w.site(c), psi.site(c));
      phi.set_pair(c - 1, std::move(prev), std::move(qr.q));
    }
    // Final solve at site 0 so the returned center is optimal.
    auto m0 = detail::apply_effective(left[0], w.site(0), right[0], psi.site(0));
    m2 = m0.norm() * m0.norm();
    phi.set_site(0, std::move(m0));
    phi.set_center(0);
    out.fidelity_trace.push_back(m2 / target);
    out.sweeps = sweep;

    const double gap = std::max(0.0, target - m2) / target;
    out.residual = gap <= kResolution ? 0.0 : std::sqrt(gap);
    const double fidelity = m2 / target;
    if (out.residual == 0.0 || (previous >= 0.0 && std::abs(fidelity - previous) < tol)) {
      out.converged = true;
      break;
    }
    previous = fidelity;
  }
  out.state = spec.norm_policy == NormPolicy::renormalize ? normalized(phi) : phi;
  return out;
}

}  // namespace tnet
