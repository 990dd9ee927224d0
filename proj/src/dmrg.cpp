#include "tnet/dmrg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "detail/environment.hpp"
#include "detail/linalg.hpp"
#include "tnet/errors.hpp"

namespace tnet {

void DmrgConfig::validate() const {
  if (max_bond < 1) throw ConfigError("dmrg.max_bond", "bond dimension must be at least 1");
  if (sweeps < 1) throw ConfigError("dmrg.sweeps", "need at least one sweep");
  if (!(energy_tol > 0.0)) throw ConfigError("dmrg.energy_tol", "tolerance must be positive");
  if (eigensolver.max_iter < 1) throw ConfigError("dmrg.lanczos_max_iter", "need at least one iteration");
  if (!(eigensolver.tol > 0.0)) throw ConfigError("dmrg.lanczos_tol", "tolerance must be positive");
  if (!(noise >= 0.0)) throw ConfigError("dmrg.noise", "noise must be non-negative");
  if (!(ortho_penalty >= 0.0)) throw ConfigError("dmrg.ortho_penalty", "penalty must be non-negative");
}

MatrixProductState dmrg_initial_state(const std::vector<std::size_t>& phys_dims, const DmrgConfig& cfg) {
  return random_mps(phys_dims, cfg.max_bond, cfg.seed);
}

namespace {

VectorXc to_vec(const DenseTensor& t) {
  VectorXc v(static_cast<Eigen::Index>(t.size()));
  std::copy(t.data().begin(), t.data().end(), v.data());
  return v;
}

DenseTensor from_vec(const VectorXc& v, const DenseTensor& like) {
  return DenseTensor(like.dims(), like.labels(), std::vector<cplx>(v.data(), v.data() + v.size()));
}

std::vector<std::size_t> target_bonds(const std::vector<std::size_t>& phys, std::size_t cap) {
  const std::size_t n = phys.size();
  std::vector<std::size_t> out(n + 1, 1);
  for (std::size_t b = 1; b < n; ++b) {
    double left = 1, right = 1;
    for (std::size_t i = 0; i < b; ++i) left *= static_cast<double>(phys[i]);
    for (std::size_t i = b; i < n; ++i) right *= static_cast<double>(phys[i]);
    out[b] = static_cast<std::size_t>(std::min({static_cast<double>(cap), left, right}));
  }
  return out;
}

DenseTensor pad(const DenseTensor& t, std::size_t dl, std::size_t dr) {
  const auto& d = t.dims();
  if (d[0] == dl && d[2] == dr) return t;
  std::vector<cplx> data(dl * d[1] * dr, cplx{0.0, 0.0});
  for (std::size_t a = 0; a < d[0]; ++a)
    for (std::size_t p = 0; p < d[1]; ++p)
      for (std::size_t b = 0; b < d[2]; ++b) data[(a * d[1] + p) * dr + b] = t.data()[(a * d[1] + p) * d[2] + b];
  return DenseTensor({dl, d[1], dr}, {"l", "p", "r"}, std::move(data));
}

MatrixProductState prepare(const MatrixProductState& init, std::size_t max_bond) {
  MatrixProductState psi = init;
  if (psi.max_bond() > max_bond) {
    TruncationSpec spec;
    spec.max_bond = max_bond;
    psi = compress(psi, spec).state;
  }
  const auto target = target_bonds(psi.phys_dims(), max_bond);
  std::vector<DenseTensor> sites;
  for (std::size_t k = 0; k < psi.size(); ++k) {
    sites.push_back(pad(psi.site(k), std::max(target[k], psi.site(k).dims()[0]),
                        std::max(target[k + 1], psi.site(k).dims()[2])));
  }
  return normalized(canonicalize(MatrixProductState(std::move(sites)), 0));
}

class Sweeper {
 public:
  Sweeper(const MatrixProductOperator& w, const std::vector<MatrixProductState>& lower, double penalty,
          const MatrixProductState& init, const DmrgConfig& cfg)
      : w_(w), penalty_(penalty), cfg_(cfg), psi_(prepare(init, cfg.max_bond)), rng_(cfg.seed ^ 0x5eedULL) {
    for (const auto& s : lower) lower_.push_back(normalized(s));
    const std::size_t n = psi_.size();
    left_.assign(n, {});
    right_.assign(n, {});
    left_[0] = detail::unit_env3();
    right_[n - 1] = detail::unit_env3();
    for (std::size_t k = n - 1; k > 0; --k) {
      right_[k - 1] = detail::grow_right(right_[k], psi_.site(k), w_.site(k), psi_.site(k));
    }
    oleft_.assign(lower_.size(), std::vector<DenseTensor>(n));
    oright_.assign(lower_.size(), std::vector<DenseTensor>(n));
    for (std::size_t i = 0; i < lower_.size(); ++i) {
      oleft_[i][0] = detail::unit_env2();
      oright_[i][n - 1] = detail::unit_env2();
      for (std::size_t k = n - 1; k > 0; --k) {
        oright_[i][k - 1] = detail::grow_right(oright_[i][k], psi_.site(k), lower_[i].site(k));
      }
    }
  }

  // Objective at the current center (site 0 after construction).
  double objective(std::size_t c) const {
    const auto a = psi_.site(c);
    const VectorXc x = to_vec(a);
    return x.dot(apply(c, x)).real() / x.squaredNorm();
  }

  DmrgResult run() {
    DmrgResult out;
    auto& trace = out.trace;
    const std::size_t n = psi_.size();
    trace.initial_energy = objective(0);
    double previous = trace.initial_energy;
    double noise = cfg_.noise;
    for (std::size_t sweep = 1; sweep <= cfg_.sweeps; ++sweep) {
      max_residual_ = 0.0;
      check_hermitian(0);
      double e = previous;
      for (std::size_t c = 0; c + 1 < n; ++c) {
        e = optimize(c);
        shift_right(c, noise);
      }
      if (n == 1) e = optimize(0);
      trace.energies.push_back(e);
      for (std::size_t c = n - 1; c > 0; --c) {
        e = optimize(c);
        shift_left(c, noise);
      }
      trace.energies.push_back(e);
      trace.sweeps = sweep;
      noise *= 0.5;
      if (std::abs(e - previous) < cfg_.energy_tol) {
        trace.converged = true;
        break;
      }
      previous = e;
    }
    psi_.set_center(0);
    trace.max_residual = max_residual_;
    trace.unconverged_solves = unconverged_;
    trace.bond_dims = psi_.bond_dims();
    trace.energy = expect_mpo(psi_, w_).real();
    for (const auto& s : lower_) {
      const double ov = std::abs(inner(s, psi_)) / norm(psi_);
      trace.overlaps.push_back(ov);
      if (ov > 1e-6) trace.orthogonal = false;
    }
    if (!trace.orthogonal) trace.converged = false;
    out.energy = trace.energy;
    out.state = psi_;
    return out;
  }

 private:
  VectorXc apply(std::size_t c, const VectorXc& x) const {
    const auto& like = psi_.site(c);
    VectorXc y = to_vec(detail::apply_effective(left_[c], w_.site(c), right_[c], from_vec(x, like)));
    for (std::size_t i = 0; i < lower_.size(); ++i) {
      const VectorXc o = to_vec(detail::project(oleft_[i][c], oright_[i][c], lower_[i].site(c)));
      y += penalty_ * o * o.dot(x);
    }
    return y;
  }

  void check_hermitian(std::size_t c) {
    const auto dim = static_cast<Eigen::Index>(psi_.site(c).size());
    std::normal_distribution<double> nd;
    VectorXc x(dim), y(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      x(i) = cplx(nd(rng_), nd(rng_));
      y(i) = cplx(nd(rng_), nd(rng_));
    }
    x.normalize();
    y.normalize();
    const VectorXc hx = apply(c, x), hy = apply(c, y);
    const double scale = std::max({1.0, hx.norm(), hy.norm()});
    if (std::abs(x.dot(hy) - std::conj(y.dot(hx))) > 1e-8 * scale) {
      throw NumericalError("dmrg: effective Hamiltonian is not Hermitian");
    }
  }

  double optimize(std::size_t c) {
    auto op = [&](const VectorXc& x) { return apply(c, x); };
    auto res = lanczos_lowest(op, to_vec(psi_.site(c)), cfg_.eigensolver);
    if (!res.converged) {
      LanczosConfig retry = cfg_.eigensolver;
      retry.max_iter *= 2;
      auto second = lanczos_lowest(op, res.vector, retry);
      if (second.value <= res.value) res = second;
      if (!res.converged) ++unconverged_;
    }
    max_residual_ = std::max(max_residual_, res.residual);
    psi_.set_site(c, from_vec(res.vector, psi_.site(c)));
    return res.value;
  }

  // Left factor for a move to the right: QR, or with noise the dominant
  // eigenvectors of the perturbed reduced density matrix.
  std::pair<DenseTensor, DenseTensor> left_factor(std::size_t c, double noise) {
    const auto& a = psi_.site(c);
    if (noise <= 0.0) {
      auto qr = qr_split(a, {"l", "p"}, "r", "x");
      return {std::move(qr.q), std::move(qr.r)};
    }
    const MatrixXc m = a.to_matrix({"l", "p"});
    auto t = contract(left_[c], a, {{"k", "l"}});
    t = contract(t, w_.site(c).relabeled({{"l", "wl"}, {"r", "wr"}}), {{"w", "wl"}, {"p", "pi"}});
    const MatrixXc pm = t.to_matrix({"b", "po"});
    const MatrixXc rho = m * m.adjoint() + noise * pm * pm.adjoint();
    return from_density(rho, m, a, {"l", "p"}, "r");
  }

  std::pair<DenseTensor, DenseTensor> right_factor(std::size_t c, double noise) {
    const auto& a = psi_.site(c);
    if (noise <= 0.0) {
      auto qr = qr_split(a, {"p", "r"}, "l", "x");
      return {std::move(qr.q), std::move(qr.r)};
    }
    const MatrixXc m = a.to_matrix({"p", "r"});
    auto t = contract(a, right_[c], {{"r", "k"}});
    t = contract(t, w_.site(c).relabeled({{"l", "wl"}, {"r", "wr"}}), {{"p", "pi"}, {"w", "wr"}});
    const MatrixXc pm = t.to_matrix({"po", "b"});
    const MatrixXc rho = m * m.adjoint() + noise * pm * pm.adjoint();
    return from_density(rho, m, a, {"p", "r"}, "l");
  }

  // Keeps the bond extent; returns (isometry with open bond `bond`, carry with
  // labels (x, bond)) so that the state is U U^dagger applied to the site.
  static std::pair<DenseTensor, DenseTensor> from_density(const MatrixXc& rho, const MatrixXc& m,
                                                          const DenseTensor& a, const std::vector<Label>& rows,
                                                          const Label& bond) {
    const auto eig = detail::eigh(rho);
    const Eigen::Index k = m.cols();
    MatrixXc u = eig.vectors.rightCols(k).rowwise().reverse();
    const MatrixXc carry = u.adjoint() * m;
    std::vector<std::size_t> row_dims;
    for (const auto& l : rows) row_dims.push_back(a.dim(l));
    auto iso = DenseTensor::from_matrix(u, row_dims, rows, {static_cast<std::size_t>(k)}, {bond});
    auto c = DenseTensor::from_matrix(carry, {static_cast<std::size_t>(k)}, {"x"},
                                      {static_cast<std::size_t>(m.cols())}, {bond});
    return {std::move(iso), std::move(c)};
  }

  void shift_right(std::size_t c, double noise) {
    auto [q, r] = left_factor(c, noise);
    auto next = contract(r, psi_.site(c + 1), {{"r", "l"}}).relabeled({{"x", "l"}});
    if (noise > 0.0) next = next.scaled(1.0 / next.norm());
    left_[c + 1] = detail::grow_left(left_[c], q, w_.site(c), q);
    for (std::size_t i = 0; i < lower_.size(); ++i) {
      oleft_[i][c + 1] = detail::grow_left(oleft_[i][c], q, lower_[i].site(c));
    }
    psi_.set_pair(c, std::move(q), std::move(next));
  }

  void shift_left(std::size_t c, double noise) {
    auto [q, r] = right_factor(c, noise);
    auto prev = contract(psi_.site(c - 1), r, {{"r", "l"}}).relabeled({{"x", "r"}});
    if (noise > 0.0) prev = prev.scaled(1.0 / prev.norm());
    right_[c - 1] = detail::grow_right(right_[c], q, w_.site(c), q);
    for (std::size_t i = 0; i < lower_.size(); ++i) {
      oright_[i][c - 1] = detail::grow_right(oright_[i][c], q, lower_[i].site(c));
    }
    psi_.set_pair(c - 1, std::move(prev), std::move(q));
  }

  const MatrixProductOperator& w_;
  std::vector<MatrixProductState> lower_;
  double penalty_;
  DmrgConfig cfg_;
  MatrixProductState psi_;
  std::mt19937_64 rng_;
  std::vector<DenseTensor> left_, right_;
  std::vector<std::vector<DenseTensor>> oleft_, oright_;
  double max_residual_ = 0.0;
  std::size_t unconverged_ = 0;
};

void check_lattice(const MatrixProductOperator& w, const MatrixProductState& init) {
  if (w.phys_dims() != init.phys_dims()) throw std::invalid_argument("dmrg: state and operator lattices differ");
}

}  // namespace

DmrgResult ground_state(const MatrixProductOperator& w, const MatrixProductState& init, const DmrgConfig& cfg) {
  cfg.validate();
  check_lattice(w, init);
  return Sweeper(w, {}, 0.0, init, cfg).run();
}

DmrgResult excited_state(const MatrixProductOperator& w, const std::vector<MatrixProductState>& lower,
                         const MatrixProductState& init, const DmrgConfig& cfg) {
  cfg.validate();
  check_lattice(w, init);
  for (const auto& s : lower) check_lattice(w, s);
  double penalty = cfg.ortho_penalty;
  if (penalty == 0.0) {
    double scale = 1.0;
    for (const auto& s : lower) scale = std::max(scale, std::abs(expect_mpo(s, w).real()));
    penalty = 4.0 * scale;
  }
  return Sweeper(w, lower, penalty, init, cfg).run();
}

}  // namespace tnet
