#include <gtest/gtest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "tnet/dmrg.hpp"
#include "tnet/oracle.hpp"

using namespace tnet;
using namespace tnet::testing;

namespace {

DmrgConfig small_config(std::size_t bond, std::uint64_t seed = 1) {
  DmrgConfig cfg;
  cfg.max_bond = bond;
  cfg.seed = seed;
  return cfg;
}

DmrgResult run(const HamiltonianSpec& spec, const DmrgConfig& cfg) {
  return ground_state(build_mpo(spec), dmrg_initial_state(std::vector<std::size_t>(spec.n, spec.phys_dim()), cfg),
                      cfg);
}

void expect_monotone(const SweepTrace& t, double slack) {
  double prev = t.initial_energy;
  for (double e : t.energies) {
    EXPECT_LE(e, prev + slack);
    prev = e;
  }
}

}  // namespace

TEST(Lanczos, MatchesDenseLowest) {
  std::mt19937_64 rng(3);
  const MatrixXc a = random_hermitian(40, rng);
  auto op = [&](const VectorXc& x) -> VectorXc { return a * x; };
  const auto r = lanczos_lowest(op, VectorXc::Ones(40), {200, 1e-12});
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(a);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, es.eigenvalues()(0), 1e-11);
  EXPECT_LT((a * r.vector - r.value * r.vector).norm(), 1e-10);
}

TEST(Lanczos, NeverAboveSeedQuotient) {
  std::mt19937_64 rng(4);
  const MatrixXc a = random_hermitian(30, rng);
  const VectorXc seed = random_matrix(30, 1, rng).col(0);
  auto op = [&](const VectorXc& x) -> VectorXc { return a * x; };
  const double rq = seed.dot(a * seed).real() / seed.squaredNorm();
  for (std::size_t it : {1u, 2u, 5u}) EXPECT_LE(lanczos_lowest(op, seed, {it, 1e-12}).value, rq + 1e-12);
}

TEST(Lanczos, InvariantSubspaceStopsEarly) {
  const MatrixXc a = MatrixXc::Identity(10, 10) * 2.5;
  auto op = [&](const VectorXc& x) -> VectorXc { return a * x; };
  const auto r = lanczos_lowest(op, VectorXc::Ones(10));
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_NEAR(r.value, 2.5, 1e-14);
}

TEST(Dmrg, TwoSitesAgreeWithDiagonalization) {
  const auto spec = tfi(2, 1.0, 0.7);
  const auto r = run(spec, small_config(4));
  EXPECT_NEAR(r.energy, oracle::ed_ground(oracle::dense_hamiltonian(spec)).energy, 1e-12);
  EXPECT_TRUE(r.trace.converged);
}

TEST(Dmrg, TransverseIsingChainsMatchDiagonalization) {
  for (double h : {0.5, 1.0, 1.5}) {
    const auto spec = tfi(10, 1.0, h);
    const auto r = run(spec, small_config(32));
    const double ref = oracle::ed_ground(oracle::dense_hamiltonian(spec)).energy;
    EXPECT_LT(std::abs(r.energy - ref) / std::abs(ref), 1e-10) << h;
    EXPECT_NEAR(ref, oracle::tfi_free_fermion_ground(10, 1.0, h), 1e-10);
    EXPECT_TRUE(r.trace.converged);
    EXPECT_EQ(r.trace.unconverged_solves, 0u);
  }
}

TEST(Dmrg, HeisenbergChain) {
  const auto spec = xxz(8, 1.0, 1.0);
  const auto r = run(spec, small_config(16));
  EXPECT_NEAR(r.energy, oracle::ed_ground(oracle::dense_hamiltonian(spec)).energy, 1e-9);
}

TEST(Dmrg, SpinOneCustomCoupling) {
  // Spin-1 Heisenberg coupling through the generic two-site path.
  MatrixXc sz = MatrixXc::Zero(3, 3), sp = MatrixXc::Zero(3, 3);
  sz(0, 0) = 1;
  sz(2, 2) = -1;
  sp(0, 1) = sp(1, 2) = std::sqrt(2.0);
  HamiltonianSpec spec;
  spec.model = ModelKind::custom_nn;
  spec.n = 6;
  spec.two_site = ops::kron(sz, sz) + 0.5 * (ops::kron(sp, sp.adjoint()) + ops::kron(sp.adjoint(), sp));
  const auto r = run(spec, small_config(27));
  EXPECT_NEAR(r.energy, oracle::ed_ground(oracle::dense_hamiltonian(spec)).energy, 1e-9);
}

TEST(Dmrg, ClassicalLimitConvergesImmediately) {
  const auto spec = tfi(8, 1.0, 0.0);
  const auto w = build_mpo(spec);
  auto up = product_state(std::vector<VectorXc>(8, (VectorXc(2) << 1, 0).finished()));
  const auto r = ground_state(w, up, small_config(4));
  EXPECT_NEAR(r.energy, -7.0, 1e-12);
  EXPECT_NEAR(r.trace.initial_energy, -7.0, 1e-12);
  EXPECT_TRUE(r.trace.converged);
  EXPECT_EQ(r.trace.sweeps, 1u);
}

TEST(Dmrg, SweepEnergiesNeverRise) {
  const auto spec = tfi(10, 1.0, 0.9);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = run(spec, small_config(8, seed));
    expect_monotone(r.trace, 1e-9);
  }
}

TEST(Dmrg, VariationalBoundAndBondMonotone) {
  const auto spec = tfi(10, 1.0, 1.0);
  const double ref = oracle::ed_ground(oracle::dense_hamiltonian(spec)).energy;
  double prev = 0.0;
  for (std::size_t d : {1u, 2u, 4u, 8u}) {
    const auto r = run(spec, small_config(d));
    EXPECT_GE(r.energy, ref - 1e-10) << d;
    if (d > 1) EXPECT_LE(r.energy, prev + 1e-10) << d;
    EXPECT_LE(r.state.max_bond(), d);
    prev = r.energy;
  }
}

TEST(Dmrg, EntropyWithinBondBound) {
  const auto r = run(tfi(10, 1.0, 1.0), small_config(6));
  for (std::size_t b = 0; b + 1 < r.state.size(); ++b) {
    EXPECT_LE(entanglement_entropy(r.state, b), std::log(static_cast<double>(r.state.bond_dim(b))) + 1e-10);
  }
}

TEST(Dmrg, ResultGaugeIndependent) {
  const auto spec = tfi(8, 1.0, 0.6);
  const auto w = build_mpo(spec);
  const auto r = run(spec, small_config(16));
  std::mt19937_64 rng(5);
  const auto d = static_cast<Eigen::Index>(r.state.bond_dim(3));
  MatrixXc x = MatrixXc::Identity(d, d) + 0.2 * random_matrix(d, d, rng).normalized();
  EXPECT_NEAR(expect_mpo(gauge_transform(r.state, 3, x), w).real(), r.energy, 1e-9);
}

TEST(Dmrg, WarmStartKeepsEnergy) {
  const auto spec = tfi(8, 1.0, 1.2);
  const auto w = build_mpo(spec);
  const auto first = run(spec, small_config(16));
  const auto second = ground_state(w, first.state, small_config(16));
  EXPECT_NEAR(second.trace.initial_energy, first.energy, 1e-10);
  EXPECT_NEAR(second.energy, first.energy, 1e-10);
  EXPECT_LE(second.trace.sweeps, 2u);
}

TEST(Dmrg, NoiseStillConverges) {
  const auto spec = tfi(10, 1.0, 1.0);
  auto cfg = small_config(16);
  cfg.noise = 1e-3;
  const auto r = run(spec, cfg);
  EXPECT_NEAR(r.energy, oracle::ed_ground(oracle::dense_hamiltonian(spec)).energy, 1e-8);
}

TEST(Dmrg, DeterministicForSeed) {
  const auto spec = tfi(8, 1.0, 0.8);
  const auto a = run(spec, small_config(8, 11));
  const auto b = run(spec, small_config(8, 11));
  EXPECT_EQ(a.trace.energies, b.trace.energies);
  EXPECT_EQ(dense_state(a.state), dense_state(b.state));
}

TEST(Dmrg, ExcitedStateMatchesSpectrum) {
  const auto spec = tfi(8, 1.0, 1.0);
  const auto w = build_mpo(spec);
  const auto ref = oracle::ed_spectrum(oracle::dense_hamiltonian(spec), 3);
  const auto g = run(spec, small_config(16));
  const auto e1 = excited_state(w, {g.state}, dmrg_initial_state(g.state.phys_dims(), small_config(16, 2)),
                                small_config(16, 2));
  EXPECT_NEAR(e1.energy, ref.values(1), 1e-6);
  EXPECT_TRUE(e1.trace.orthogonal);
  EXPECT_LT(e1.trace.overlaps[0], 1e-6);
}

TEST(Dmrg, DegenerateClassicalPair) {
  // At h = 0 both ferromagnetic states share the ground energy.
  const auto spec = tfi(6, 1.0, 0.0);
  const auto w = build_mpo(spec);
  const auto g = run(spec, small_config(4));
  const auto e1 =
      excited_state(w, {g.state}, dmrg_initial_state(g.state.phys_dims(), small_config(4, 7)), small_config(4, 7));
  EXPECT_NEAR(g.energy, -5.0, 1e-9);
  EXPECT_NEAR(e1.energy, -5.0, 1e-8);
  EXPECT_LT(std::abs(inner(g.state, e1.state)), 1e-6);
}

TEST(Dmrg, RejectsBadConfig) {
  const auto w = build_mpo(tfi(4, 1.0, 1.0));
  auto cfg = small_config(0);
  EXPECT_THROW(ground_state(w, random_mps({2, 2, 2, 2}, 2, 1), cfg), ConfigError);
  cfg = small_config(4);
  cfg.energy_tol = 0.0;
  EXPECT_THROW(ground_state(w, random_mps({2, 2, 2, 2}, 2, 1), cfg), ConfigError);
  EXPECT_THROW(ground_state(w, random_mps({2, 2, 2}, 2, 1), small_config(4)), std::invalid_argument);
}
