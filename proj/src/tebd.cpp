#include "tnet/tebd.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tnet/errors.hpp"

namespace tnet {

namespace {

MatrixXc exp_hermitian(const MatrixXc& h, cplx factor) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(h);
  VectorXc e(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = std::exp(factor * es.eigenvalues()(i));
  return es.eigenvectors() * e.asDiagonal() * es.eigenvectors().adjoint();
}

std::size_t step_count(double total, double step) {
  if (total <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(total / step - 1e-9));
}

void check_order(int order) {
  if (order != 1 && order != 2) throw ConfigError("tebd.order", "Trotter order must be 1 or 2");
}

}  // namespace

TrotterScheme build_trotter(const HamiltonianSpec& spec, double step, int order, EvolutionMode mode) {
  spec.validate();
  check_order(order);
  if (!(step >= 0.0) || !std::isfinite(step)) throw ConfigError("tebd.step", "step must be finite and non-negative");
  const auto terms = bond_terms(spec);
  TrotterScheme out;
  out.step = step;
  out.order = order;
  out.mode = mode;
  out.sites = spec.n;
  const cplx unit = mode == EvolutionMode::real ? cplx{0.0, -1.0} : cplx{-1.0, 0.0};
  auto layer = [&](std::size_t parity, double dt) {
    for (std::size_t b = parity; b < terms.size(); b += 2) out.gates.push_back({b, exp_hermitian(terms[b], unit * dt)});
  };
  if (order == 1) {
    layer(0, step);
    layer(1, step);
  } else {
    layer(0, step / 2);
    layer(1, step);
    layer(0, step / 2);
  }
  return out;
}

TrotterScheme lift_to_purification(const TrotterScheme& scheme, std::size_t d_anc) {
  TrotterScheme out = scheme;
  for (auto& g : out.gates) {
    const auto dd = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(g.gate.rows()))));
    const auto big = static_cast<Eigen::Index>(dd * d_anc * dd * d_anc);
    MatrixXc lifted = MatrixXc::Zero(big, big);
    // Merged index (s a) with the system index major; the pair index is (s1 a1 s2 a2).
    auto idx = [&](std::size_t s1, std::size_t a1, std::size_t s2, std::size_t a2) {
      return static_cast<Eigen::Index>(((s1 * d_anc + a1) * dd + s2) * d_anc + a2);
    };
    for (std::size_t o1 = 0; o1 < dd; ++o1)
      for (std::size_t o2 = 0; o2 < dd; ++o2)
        for (std::size_t i1 = 0; i1 < dd; ++i1)
          for (std::size_t i2 = 0; i2 < dd; ++i2) {
            const cplx v = g.gate(static_cast<Eigen::Index>(o1 * dd + o2), static_cast<Eigen::Index>(i1 * dd + i2));
            if (v == cplx{0.0, 0.0}) continue;
            for (std::size_t a1 = 0; a1 < d_anc; ++a1)
              for (std::size_t a2 = 0; a2 < d_anc; ++a2) lifted(idx(o1, a1, o2, a2), idx(i1, a1, i2, a2)) = v;
          }
    g.gate = std::move(lifted);
  }
  return out;
}

GateResult apply_gate(const MatrixProductState& psi, std::size_t bond, const MatrixXc& gate,
                      const TruncationSpec& spec) {
  if (bond + 1 >= psi.size()) throw std::out_of_range("apply_gate: bond out of range");
  const std::size_t d1 = psi.phys_dim(bond), d2 = psi.phys_dim(bond + 1);
  if (gate.rows() != static_cast<Eigen::Index>(d1 * d2) || gate.cols() != gate.rows()) {
    throw std::invalid_argument("apply_gate: gate does not match the local dimensions");
  }
  MatrixProductState out = psi.center() == bond ? psi : move_center(psi, bond);
  const auto a = out.site(bond).relabeled({{"p", "p1"}, {"r", "m"}});
  const auto b = out.site(bond + 1).relabeled({{"p", "p2"}, {"l", "m"}});
  const auto theta = contract(a, b, {{"m", "m"}});  // l p1 p2 r
  const auto g = DenseTensor::from_matrix(gate, {d1, d2}, {"o1", "o2"}, {d1, d2}, {"i1", "i2"});
  const auto t = contract(theta, g, {{"p1", "i1"}, {"p2", "i2"}});  // l r o1 o2
  auto split = svd_split(t, {"l", "o1"}, spec, "r", "l");

  // Absorb the singular values into the right factor.
  const auto& v = split.v;  // l r o2 ordering follows svd_split: bond first
  const auto vm = v.to_matrix({"l"});
  MatrixXc scaled = vm;
  for (Eigen::Index i = 0; i < scaled.rows(); ++i) scaled.row(i) *= split.s[static_cast<std::size_t>(i)];
  std::vector<Label> cols;
  std::vector<std::size_t> col_dims;
  for (const auto& l : v.labels()) {
    if (l == "l") continue;
    cols.push_back(l);
    col_dims.push_back(v.dim(l));
  }
  auto right = DenseTensor::from_matrix(scaled, {v.dim("l")}, {"l"}, col_dims, cols)
                   .relabeled({{"o2", "p"}})
                   .permuted({"l", "p", "r"});
  auto left = split.u.relabeled({{"o1", "p"}}).permuted({"l", "p", "r"});
  out.set_pair(bond, std::move(left), std::move(right));
  out.set_center(bond + 1);
  return {std::move(out), split.report};
}

namespace {

EvolutionSample sample(const MatrixProductState& psi, double time, const EvolutionOptions& opts, double log_norm,
                       double weight) {
  EvolutionSample s;
  s.time = time;
  s.norm = norm(psi);
  s.log_norm = log_norm;
  s.discarded_weight = weight;
  for (const auto& o : opts.observables) {
    std::vector<cplx> row;
    for (std::size_t k = 0; k < psi.size(); ++k) row.push_back(expect_local(psi, o.op, k));
    s.local.push_back(std::move(row));
  }
  if (opts.hamiltonian) s.energy = expect_mpo(psi, *opts.hamiltonian).real();
  if (opts.entropies) {
    for (std::size_t b = 0; b + 1 < psi.size(); ++b) s.entropies.push_back(entanglement_entropy(psi, b));
  }
  return s;
}

}  // namespace

EvolutionResult evolve(const MatrixProductState& psi, const TrotterScheme& scheme, const EvolutionOptions& opts) {
  opts.truncation.validate();
  if (scheme.sites != psi.size()) throw std::invalid_argument("evolve: scheme and state sizes differ");
  if (!(opts.total_time >= 0.0)) throw ConfigError("tebd.total_time", "total time must be non-negative");
  if (opts.sample_every == 0) throw ConfigError("tebd.sample_every", "sampling cadence must be positive");
  if (scheme.step <= 0.0 && opts.total_time > 0.0) throw ConfigError("tebd.step", "step must be positive");

  EvolutionResult out{psi, {}};
  auto& tr = out.trace;
  const bool imaginary = scheme.mode == EvolutionMode::imaginary;
  if (imaginary) {
    const double n0 = norm(out.state);
    if (!(n0 > 0.0)) throw NumericalError("evolve: zero initial state");
    tr.log_norm = std::log(n0);
    out.state = scaled(out.state, 1.0 / n0);
  }
  tr.samples.push_back(sample(out.state, 0.0, opts, tr.log_norm, 0.0));

  const std::size_t steps = step_count(opts.total_time, scheme.step);
  for (std::size_t k = 1; k <= steps; ++k) {
    MatrixProductState next = out.state;
    double weight = 0.0;
    for (const auto& g : scheme.gates) {
      auto r = apply_gate(next, g.bond, g.gate, opts.truncation);
      next = std::move(r.state);
      weight += r.report.discarded_weight;
    }
    if (weight > opts.abort_weight) {
      tr.aborted = true;
      tr.max_step_weight = std::max(tr.max_step_weight, weight);
      break;
    }
    if (imaginary) {
      const double n = norm(next);
      if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("evolve: imaginary-time norm vanished");
      tr.log_norm += std::log(n);
      next = scaled(next, 1.0 / n);
    }
    out.state = std::move(next);
    tr.steps = k;
    tr.discarded_weight += weight;
    tr.max_step_weight = std::max(tr.max_step_weight, weight);
    if (k % opts.sample_every == 0 || k == steps) {
      tr.samples.push_back(sample(out.state, static_cast<double>(k) * scheme.step, opts, tr.log_norm,
                                  tr.discarded_weight));
    }
  }
  return out;
}

std::vector<ImaginaryStage> default_imaginary_schedule() { return {{0.1, 20.0}, {0.01, 2.0}, {0.001, 0.2}}; }

EvolutionResult imaginary_ground_state(const HamiltonianSpec& spec, const MatrixProductState& init,
                                       const std::vector<ImaginaryStage>& schedule, const TruncationSpec& spec_trunc,
                                       int order) {
  if (schedule.empty()) throw ConfigError("tebd.schedule", "imaginary-time schedule is empty");
  EvolutionOptions opts;
  opts.truncation = spec_trunc;
  opts.hamiltonian = build_mpo(spec);
  opts.entropies = false;
  opts.abort_weight = std::numeric_limits<double>::infinity();
  EvolutionResult out{init, {}};
  double t0 = 0.0;
  for (const auto& stage : schedule) {
    if (!(stage.step > 0.0) || !(stage.duration >= 0.0)) {
      throw ConfigError("tebd.schedule", "stages need a positive step and non-negative duration");
    }
    const auto scheme = build_trotter(spec, stage.step, order, EvolutionMode::imaginary);
    opts.total_time = stage.duration;
    opts.sample_every = std::max<std::size_t>(1, step_count(stage.duration, stage.step));
    auto r = evolve(out.state, scheme, opts);
    for (auto& s : r.trace.samples) {
      s.time += t0;
      s.log_norm += out.trace.log_norm;
      s.discarded_weight += out.trace.discarded_weight;
    }
    auto& tr = out.trace;
    auto first = r.trace.samples.begin();
    if (!tr.samples.empty()) ++first;  // stage start repeats the previous end
    tr.samples.insert(tr.samples.end(), first, r.trace.samples.end());
    tr.steps += r.trace.steps;
    tr.discarded_weight += r.trace.discarded_weight;
    tr.max_step_weight = std::max(tr.max_step_weight, r.trace.max_step_weight);
    tr.log_norm += r.trace.log_norm;
    t0 += static_cast<double>(r.trace.steps) * stage.step;
    out.state = std::move(r.state);
  }
  return out;
}

ThermalResult thermal_state(const HamiltonianSpec& spec, double beta, double step, const TruncationSpec& spec_trunc,
                            int order, double abort_weight) {
  spec.validate();
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("thermal.beta", "beta must be finite and >= 0");
  if (!(step > 0.0)) throw ConfigError("thermal.step", "step must be positive");
  const std::size_t d = spec.phys_dim();
  const auto dd = static_cast<Eigen::Index>(d * d);
  VectorXc pair = VectorXc::Zero(dd);
  for (std::size_t s = 0; s < d; ++s) pair(static_cast<Eigen::Index>(s * d + s)) = 1.0 / std::sqrt(static_cast<double>(d));

  ThermalResult out;
  out.beta = beta;
  out.state = product_state(std::vector<VectorXc>(spec.n, pair));
  const double tau = beta / 2;
  const std::size_t n = step_count(tau, step);
  if (n > 0) {
    const double dt = tau / static_cast<double>(n);
    const auto scheme = lift_to_purification(build_trotter(spec, dt, order, EvolutionMode::imaginary), d);
    EvolutionOptions opts;
    opts.total_time = dt * static_cast<double>(n);
    opts.truncation = spec_trunc;
    opts.entropies = false;
    opts.sample_every = n;
    opts.abort_weight = abort_weight;
    auto r = evolve(out.state, scheme, opts);
    out.state = std::move(r.state);
    out.steps = r.trace.steps;
    out.discarded_weight = r.trace.discarded_weight;
    out.aborted = r.trace.aborted;
    out.log_z = 2.0 * r.trace.log_norm;
  }
  out.log_z += static_cast<double>(spec.n) * std::log(static_cast<double>(d));
  out.energy = expect_mpo(out.state, lift_to_purification(build_mpo(spec), d)).real();
  return out;
}

MatrixXc thermal_site_density(const MatrixProductState& purified, std::size_t site, std::size_t d) {
  const std::size_t dd = purified.phys_dim(site);
  if (dd != d * d) throw std::invalid_argument("thermal_site_density: site is not a (system, ancilla) pair");
  const auto c = move_center(purified, site);
  const auto t = c.site(site);
  // rho_sys[s, s'] = sum_{l, a, r} A[l, (s a), r] conj(A[l, (s' a), r]).
  const MatrixXc m = t.to_matrix({"p"});  // (s a) x (l r)
  MatrixXc rho = MatrixXc::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t s = 0; s < d; ++s)
    for (std::size_t s2 = 0; s2 < d; ++s2)
      for (std::size_t a = 0; a < d; ++a) {
        rho(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s2)) +=
            m.row(static_cast<Eigen::Index>(s2 * d + a)).dot(m.row(static_cast<Eigen::Index>(s * d + a)));
      }
  return rho / rho.trace();
}

cplx thermal_expect_local(const MatrixProductState& purified, const MatrixXc& op, std::size_t site) {
  const auto d = static_cast<std::size_t>(op.rows());
  return expect_local(purified, ops::kron(op, ops::identity(d)), site);
}

}  // namespace tnet
