#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "support/oracles.hpp"
#include "tnet/errors.hpp"
#include "tnet/tensor.hpp"

using namespace tnet;
using tnet::testing::brute_force_network;
using tnet::testing::random_matrix;
using tnet::testing::random_tensor;

namespace {

DenseTensor matrix_tensor(const MatrixXc& m, Label row, Label col) {
  return DenseTensor::from_matrix(m, {static_cast<std::size_t>(m.rows())}, {std::move(row)},
                                  {static_cast<std::size_t>(m.cols())}, {std::move(col)});
}

double rel_err(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(DenseTensor, LayoutAndInvariants) {
  DenseTensor t({2, 3}, {"a", "b"}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.at({1, 0}), cplx(4));
  EXPECT_EQ(t.permuted({"b", "a"}).at({2, 1}), cplx(6));
  EXPECT_THROW(DenseTensor({2, 2}, {"a", "a"}), std::invalid_argument);
  EXPECT_THROW(DenseTensor({2, 2}, {"a", "b"}, {1, 2, 3}), std::invalid_argument);
  EXPECT_EQ(DenseTensor::scalar(3.0).size(), 1u);
  EXPECT_EQ(DenseTensor().rank(), 0u);
}

TEST(Contract, IdentityActsTrivially) {
  DenseTensor id = matrix_tensor(MatrixXc::Identity(3, 3), "x", "y");
  DenseTensor v({3}, {"y"}, {1.0, cplx(2.0, -1.0), 3.0});
  auto r = contract(id, v, {{"y", "y"}});
  ASSERT_EQ(r.labels(), std::vector<Label>{"x"});
  EXPECT_LT(max_abs_diff(r, v.relabeled({{"y", "x"}})), 1e-15);
}

TEST(Contract, MatrixProductMatchesTripleLoop) {
  std::mt19937_64 rng(1);
  auto a = random_tensor({2, 2}, {"i", "k"}, rng);
  auto b = random_tensor({2, 2}, {"k", "j"}, rng);
  auto c = contract(a, b, {{"k", "k"}});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      cplx s = 0;
      for (std::size_t k = 0; k < 2; ++k) s += a.at({i, k}) * b.at({k, j});
      EXPECT_LT(std::abs(c.at({i, j}) - s), 1e-14);
    }
}

TEST(Contract, FullPairingGivesScalar) {
  std::vector<cplx> v(8);
  for (std::size_t i = 0; i < 8; ++i) v[i] = static_cast<double>(i + 1);
  double n = 0;
  for (auto z : v) n += std::norm(z);
  for (auto& z : v) z /= std::sqrt(n);
  DenseTensor a({2, 2, 2}, {"a", "b", "c"}, v);
  auto r = contract(a, a.relabeled({{"a", "x"}, {"b", "y"}, {"c", "z"}}),
                    {{"a", "x"}, {"b", "y"}, {"c", "z"}});
  EXPECT_EQ(r.rank(), 0u);
  EXPECT_NEAR(std::abs(r.value() - 1.0), 0.0, 1e-14);
}

TEST(Contract, ErrorPaths) {
  DenseTensor a({2, 3}, {"i", "j"});
  DenseTensor b({2, 3}, {"j", "k"});
  EXPECT_THROW(contract(a, b, {{"j", "j"}}), std::invalid_argument);   // 3 vs 2
  EXPECT_THROW(contract(a, b, {{"q", "j"}}), std::invalid_argument);   // unknown
  DenseTensor c({3, 2}, {"j", "i"});
  EXPECT_THROW(contract(a, c, {{"j", "j"}}), std::invalid_argument);   // 'i' survives twice
}

TEST(Contract, BilinearInEachArgument) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = random_tensor({3, 4, 2}, {"a", "b", "c"}, rng);
    auto b = random_tensor({4, 5, 3}, {"b", "d", "a"}, rng);
    const cplx alpha(0.3 * trial - 2.0, 1.1);
    auto lhs = contract(a.scaled(alpha), b, {{"a", "a"}, {"b", "b"}});
    auto rhs = contract(a, b, {{"a", "a"}, {"b", "b"}}).scaled(alpha);
    EXPECT_LT(max_abs_diff(lhs, rhs), 1e-12 * rhs.max_abs());
  }
}

TEST(Contract, RealFastPathMatchesComplexPath) {
  std::mt19937_64 rng(3);
  auto a = random_tensor({4, 3, 5}, {"a", "b", "c"}, rng, true);
  auto b = random_tensor({5, 4, 2}, {"c", "a", "d"}, rng, true);
  auto real = contract(a, b, {{"a", "a"}, {"c", "c"}});
  auto shift = DenseTensor(a.dims(), a.labels(), std::vector<cplx>(a.size(), cplx(0, 1e-300)));
  auto cpx = contract(a + shift, b, {{"a", "a"}, {"c", "c"}});
  EXPECT_LT(max_abs_diff(real, cpx), 1e-12);
  EXPECT_EQ(contract_shared(a, b).dims(), real.dims());
}

TEST(ContractNetwork, RingOfIdentitiesIsTrace) {
  const MatrixXc id = MatrixXc::Identity(2, 2);
  std::vector<DenseTensor> ring = {matrix_tensor(id, "a", "b"), matrix_tensor(id, "b", "c"),
                                   matrix_tensor(id, "c", "d"), matrix_tensor(id, "d", "a")};
  EXPECT_NEAR(std::abs(contract_network(ring).value() - 2.0), 0.0, 1e-15);
}

TEST(ContractNetwork, GreedyMatchesLeftToRightOnTree) {
  std::mt19937_64 rng(11);
  std::vector<DenseTensor> tree = {
      random_tensor({3, 4}, {"a", "b"}, rng), random_tensor({4, 2, 5}, {"b", "c", "d"}, rng),
      random_tensor({2, 3}, {"c", "e"}, rng), random_tensor({5, 2}, {"d", "f"}, rng),
      random_tensor({3, 3, 2}, {"a", "e", "f"}, rng)};
  // The last tensor closes the tree into a scalar.
  ContractionOrder ltr = {{0, 1}, {5, 2}, {6, 3}, {7, 4}};
  const cplx g = contract_network(tree).value();
  const cplx l = contract_network(tree, ltr).value();
  EXPECT_LT(rel_err(g, l), 1e-12);
}

TEST(ContractNetwork, FourTensorLoopMatchesMonolithicSum) {
  // Four tensors on a loop, each with one open leg.
  std::mt19937_64 rng(5);
  std::vector<DenseTensor> net = {random_tensor({2, 3, 2}, {"o1", "a", "d"}, rng),
                                  random_tensor({3, 2, 3}, {"a", "o2", "b"}, rng),
                                  random_tensor({3, 2, 2}, {"b", "c", "o3"}, rng),
                                  random_tensor({2, 2, 3}, {"c", "d", "o4"}, rng)};
  auto fast = contract_network(net);
  auto slow = brute_force_network(net);
  ASSERT_EQ(fast.labels(), slow.labels());
  EXPECT_LT(max_abs_diff(fast, slow), 1e-12 * slow.max_abs());
}

TEST(ContractNetwork, EveryOrderGivesSameResult) {
  std::mt19937_64 rng(9);
  std::vector<DenseTensor> net = {random_tensor({2, 3, 2}, {"a", "b", "x"}, rng),
                                  random_tensor({3, 2, 2}, {"b", "c", "e"}, rng),
                                  random_tensor({2, 2, 3}, {"c", "d", "y"}, rng),
                                  random_tensor({2, 2, 2}, {"d", "a", "f"}, rng),
                                  random_tensor({2, 2}, {"e", "f"}, rng)};
  const auto reference = brute_force_network(net);
  std::size_t orders = 0;
  std::function<void(std::vector<std::size_t>, std::size_t, ContractionOrder)> visit =
      [&](std::vector<std::size_t> live, std::size_t next, ContractionOrder order) {
        if (live.size() == 1) {
          ++orders;
          auto r = contract_network(net, order);
          EXPECT_LT(max_abs_diff(r, reference), 1e-10 * reference.max_abs());
          return;
        }
        for (std::size_t i = 0; i < live.size(); ++i)
          for (std::size_t j = i + 1; j < live.size(); ++j) {
            auto l = live;
            auto o = order;
            o.emplace_back(live[i], live[j]);
            l.erase(l.begin() + static_cast<std::ptrdiff_t>(j));
            l.erase(l.begin() + static_cast<std::ptrdiff_t>(i));
            l.push_back(next);
            visit(l, next + 1, o);
          }
      };
  visit({0, 1, 2, 3, 4}, 5, {});
  EXPECT_EQ(orders, 180u);  // 10 * 6 * 3 * 1
}

TEST(ContractNetwork, OptimalNeverCostsMoreThanGreedy) {
  std::mt19937_64 rng(2);
  std::vector<DenseTensor> net = {random_tensor({8, 2}, {"a", "b"}, rng),
                                  random_tensor({2, 8, 8}, {"b", "c", "d"}, rng),
                                  random_tensor({8, 2}, {"c", "e"}, rng),
                                  random_tensor({8, 2, 8}, {"d", "e", "f"}, rng),
                                  random_tensor({8, 8}, {"f", "a"}, rng)};
  const auto greedy = greedy_order(net);
  const auto best = optimal_order(net);
  EXPECT_LE(order_cost(net, best), order_cost(net, greedy));
  EXPECT_LT(rel_err(contract_network(net, best).value(), contract_network(net).value()), 1e-10);
  std::vector<DenseTensor> seven(7, random_tensor({2}, {"z"}, rng));
  EXPECT_THROW(optimal_order(seven), std::invalid_argument);
}

TEST(ContractNetwork, RejectsLabelsUsedThreeTimes) {
  DenseTensor a({2}, {"x"}), b({2}, {"x"}), c({2}, {"x"});
  EXPECT_THROW(contract_network({a, b, c}), std::invalid_argument);
}

TEST(ContractNetwork, DisconnectedNetworkIsOuterProduct) {
  DenseTensor a({2}, {"x"}, {1.0, 2.0});
  DenseTensor b({3}, {"y"}, {3.0, 4.0, 5.0});
  auto r = contract_network({a, b});
  ASSERT_EQ(r.dims(), (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(r.at({1, 2}), cplx(10.0));
}

TEST(SvdSplit, RankOneMatrix) {
  Eigen::VectorXcd u(3), v(4);
  u << 1, 2, cplx(0, 2);
  v << 1, -1, 0.5, cplx(1, 1);
  u.normalize();
  v.normalize();
  MatrixXc m = u * v.transpose();
  auto r = svd_split(matrix_tensor(m, "i", "j"), {"i"});
  ASSERT_EQ(r.s.size(), 1u);
  EXPECT_NEAR(r.s[0], 1.0, 1e-14);
  EXPECT_EQ(r.report.discarded_weight, 0.0);
}

TEST(SvdSplit, EqualSpectrumForcedTruncation) {
  TruncationSpec spec;
  spec.max_bond = 2;
  auto r = svd_split(matrix_tensor(MatrixXc::Identity(4, 4), "i", "j"), {"i"}, spec);
  ASSERT_EQ(r.s.size(), 2u);
  EXPECT_NEAR(r.s[0], 1.0, 1e-15);
  EXPECT_NEAR(r.s[1], 1.0, 1e-15);
  EXPECT_NEAR(r.report.discarded_weight, 0.5, 1e-15);
}

TEST(SvdSplit, ReconstructsAndIsometric) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    auto t = random_tensor({2, 4, 8}, {"a", "b", "c"}, rng, trial % 2 == 0);
    TruncationSpec spec;
    spec.max_bond = 8;
    auto r = svd_split(t, {"b", "a"}, spec, "s", "s2");
    std::vector<cplx> sd(r.s.begin(), r.s.end());
    std::vector<cplx> diag(r.s.size() * r.s.size());
    for (std::size_t i = 0; i < r.s.size(); ++i) diag[i * r.s.size() + i] = r.s[i];
    DenseTensor sm({r.s.size(), r.s.size()}, {"s", "s2"}, diag);
    auto rec = contract(contract(r.u, sm, {{"s", "s"}}), r.v, {{"s2", "s2"}});
    EXPECT_LT(max_abs_diff(rec, t), 1e-12);
    EXPECT_TRUE(std::is_sorted(r.s.rbegin(), r.s.rend()));

    auto uu = contract(r.u.conj().relabeled({{"s", "x"}}), r.u, {{"a", "a"}, {"b", "b"}});
    auto vv = contract(r.v.conj().relabeled({{"s2", "x"}}), r.v, {{"c", "c"}});
    const MatrixXc id = MatrixXc::Identity(8, 8);
    EXPECT_LT(max_abs_diff(uu, matrix_tensor(id, "x", "s")), 1e-12);
    EXPECT_LT(max_abs_diff(vv, matrix_tensor(id, "x", "s2")), 1e-12);

    // Largest entry of each left vector is real positive.
    auto um = r.u.to_matrix({"b", "a"});
    for (Eigen::Index j = 0; j < um.cols(); ++j) {
      Eigen::Index arg;
      um.col(j).cwiseAbs().maxCoeff(&arg);
      EXPECT_NEAR(um(arg, j).imag(), 0.0, 1e-14);
      EXPECT_GT(um(arg, j).real(), 0.0);
    }
  }
}

TEST(SvdSplit, KeptPlusDiscardedWeightIsNorm) {
  std::mt19937_64 rng(6);
  auto t = random_tensor({6, 7}, {"i", "j"}, rng);
  TruncationSpec spec;
  spec.max_bond = 3;
  auto r = svd_split(t, {"i"}, spec);
  double kept = 0;
  for (double x : r.s) kept += x * x;
  const double total = t.norm() * t.norm();
  EXPECT_NEAR((kept + r.report.discarded_weight * total) / total, 1.0, 1e-12);
  EXPECT_EQ(r.report.kept, 3u);

  spec.norm_policy = NormPolicy::renormalize;
  auto rn = svd_split(t, {"i"}, spec);
  double kept_n = 0;
  for (double x : rn.s) kept_n += x * x;
  EXPECT_NEAR(kept_n / total, 1.0, 1e-12);
}

TEST(SvdSplit, RelativeCutoffAndTies) {
  TruncationSpec spec;
  spec.rel_cutoff = 0.5;
  const std::vector<double> s = {1.0, 0.6, 0.4, 0.1};
  auto rep = choose_truncation(s, spec);
  EXPECT_EQ(rep.kept, 2u);
  EXPECT_NEAR(rep.discarded_weight, (0.16 + 0.01) / (1 + 0.36 + 0.16 + 0.01), 1e-15);

  // A degenerate multiplet straddling the cutoff is kept whole.
  const std::vector<double> deg = {1.0, 0.5, 0.5 * (1 - 1e-15), 0.5 * (1 - 2e-15), 0.1};
  spec.rel_cutoff = 0.5;
  EXPECT_EQ(choose_truncation(deg, spec).kept, 4u);
  spec.max_bond = 3;
  EXPECT_EQ(choose_truncation(deg, spec).kept, 3u);

  // Numerically zero singular values are always dropped.
  const std::vector<double> zeros = {1.0, 1e-17};
  EXPECT_EQ(choose_truncation(zeros, TruncationSpec{}).kept, 1u);

  TruncationSpec bad;
  bad.rel_cutoff = 1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad.rel_cutoff = 0;
  bad.max_bond = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(SvdSplit, RejectsNonFinite) {
  DenseTensor t({2, 2}, {"i", "j"}, {1.0, std::numeric_limits<double>::quiet_NaN(), 0.0, 1.0});
  EXPECT_THROW(svd_split(t, {"i"}), NumericalError);
  EXPECT_THROW(qr_split(t, {"i"}), NumericalError);
  EXPECT_THROW(svd_split(t, {}), std::invalid_argument);
  EXPECT_THROW(svd_split(t, {"i", "j"}), std::invalid_argument);
}

TEST(QrSplit, IdentityIsFixedPoint) {
  auto r = qr_split(matrix_tensor(MatrixXc::Identity(3, 3), "i", "j"), {"i"});
  EXPECT_LT(max_abs_diff(r.q, matrix_tensor(MatrixXc::Identity(3, 3), "i", "bond")), 1e-15);
  EXPECT_LT(max_abs_diff(r.r, matrix_tensor(MatrixXc::Identity(3, 3), "bond", "j")), 1e-15);
}

TEST(QrSplit, TallMatrixReconstructs) {
  std::mt19937_64 rng(12);
  auto t = matrix_tensor(random_matrix(6, 3, rng), "i", "j");
  auto r = qr_split(t, {"i"});
  EXPECT_LT(max_abs_diff(contract(r.q, r.r, {{"bond", "bond"}}), t), 1e-12);
  auto qq = contract(r.q.conj().relabeled({{"bond", "x"}}), r.q, {{"i", "i"}});
  EXPECT_LT(max_abs_diff(qq, matrix_tensor(MatrixXc::Identity(3, 3), "x", "bond")), 1e-12);
}

TEST(QrSplit, RankThreeTwoLegsOneLeg) {
  std::mt19937_64 rng(13);
  auto t = random_tensor({3, 2, 4}, {"l", "p", "r"}, rng);
  auto r = qr_split(t, {"l", "p"}, "q", "q");
  EXPECT_EQ(r.q.dims(), (std::vector<std::size_t>{3, 2, 4}));
  EXPECT_LT(max_abs_diff(contract(r.q, r.r, {{"q", "q"}}), t), 1e-12);
}

TEST(Factorize, LargeRealProductsAndSpectra) {
  // Sizes large enough to run the blocked BLAS and LAPACK kernels.
  std::mt19937_64 rng(77);
  std::normal_distribution<double> nd;
  const Eigen::Index n = 300;
  Eigen::MatrixXd a(n, n), b(n, n);
  for (Eigen::Index i = 0; i < n * n; ++i) {
    a.data()[i] = nd(rng);
    b.data()[i] = nd(rng);
  }
  const auto ta = DenseTensor::from_matrix(a.cast<cplx>(), {300}, {"i"}, {300}, {"k"});
  const auto tb = DenseTensor::from_matrix(b.cast<cplx>(), {300}, {"k"}, {300}, {"j"});
  const MatrixXc c = contract(ta, tb, {{"k", "k"}}).to_matrix({"i"});
  EXPECT_LT((c.real() - a.lazyProduct(b)).cwiseAbs().maxCoeff(), 1e-10);

  const auto split = svd_split(ta, {"i"});
  const MatrixXc u = split.u.to_matrix({"i"});
  EXPECT_LT((u.adjoint() * u - MatrixXc::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
  const auto back = contract(split.u, split.v.scaled(1.0), {{"bond", "bond"}});
  Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(split.s.data(), n);
  const MatrixXc us = u * s.cast<cplx>().asDiagonal();
  EXPECT_LT((us * split.v.to_matrix({"bond"}) - a.cast<cplx>()).cwiseAbs().maxCoeff(), 1e-10);
  (void)back;
}
