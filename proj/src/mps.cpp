#include "tnet/mps.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace tnet {

namespace {

const std::vector<Label> kSiteLabels = {"l", "p", "r"};

DenseTensor op_tensor(const MatrixXc& op) {
  const auto d = static_cast<std::size_t>(op.rows());
  if (op.rows() != op.cols()) throw std::invalid_argument("operator must be square");
  return DenseTensor::from_matrix(op, {d}, {"po"}, {d}, {"pi"});
}

// Applies a one-site operator to the physical leg of a site tensor.
DenseTensor apply_op(const DenseTensor& a, const MatrixXc& op) {
  if (static_cast<std::size_t>(op.rows()) != a.dim("p")) {
    throw std::invalid_argument("operator dimension does not match the physical dimension");
  }
  return contract(a, op_tensor(op), {{"p", "pi"}}).relabeled({{"po", "p"}}).permuted(kSiteLabels);
}

// E(b, k) -> E'(b, k) through one site: bra tensor conjugated, ket as given.
DenseTensor transfer(const DenseTensor& env, const DenseTensor& bra, const DenseTensor& ket) {
  auto t = contract(env, ket, {{"k", "l"}});  // (b, p, r)
  t = contract(t, bra.conj().relabeled({{"l", "bl"}, {"p", "bp"}, {"r", "br"}}),
               {{"b", "bl"}, {"p", "bp"}});  // (r, br)
  return t.relabeled({{"r", "k"}, {"br", "b"}});
}

DenseTensor identity_env(std::size_t d) {
  return DenseTensor::from_matrix(MatrixXc::Identity(static_cast<Eigen::Index>(d),
                                                     static_cast<Eigen::Index>(d)),
                                  {d}, {"b"}, {d}, {"k"});
}

cplx close_env(const DenseTensor& env) {
  cplx tr = 0.0;
  const auto m = env.to_matrix({"b"});
  for (Eigen::Index i = 0; i < m.rows(); ++i) tr += m(i, i);
  return tr;
}

// <psi| prod ops |psi> over [start, end] with identity boundary environments;
// exact whenever [start, end] contains the orthogonality center (or spans the chain).
cplx sandwich(const MatrixProductState& psi, const std::map<std::size_t, MatrixXc>& ops,
              std::size_t start, std::size_t end) {
  auto env = identity_env(psi.site(start).dim("l"));
  for (std::size_t k = start; k <= end; ++k) {
    const auto& a = psi.site(k);
    auto it = ops.find(k);
    env = transfer(env, a, it == ops.end() ? a : apply_op(a, it->second));
  }
  return close_env(env);
}

cplx expectation(const MatrixProductState& psi, const std::map<std::size_t, MatrixXc>& ops) {
  std::size_t lo = ops.begin()->first, hi = ops.rbegin()->first;
  if (hi >= psi.size()) throw std::out_of_range("site index out of range");
  std::size_t start = 0, end = psi.size() - 1;
  if (auto c = psi.center()) {
    start = std::min(lo, *c);
    end = std::max(hi, *c);
  }
  const cplx num = sandwich(psi, ops, start, end);
  const cplx den = sandwich(psi, {}, start, end);
  return num / den;
}

}  // namespace

// ---------------------------------------------------------------------------

MatrixProductState::MatrixProductState(std::vector<DenseTensor> sites, std::optional<std::size_t> center)
    : center_(center) {
  if (sites.empty()) throw std::invalid_argument("MatrixProductState: empty chain");
  sites_.reserve(sites.size());
  for (auto& s : sites) sites_.push_back(checked(std::move(s)));
  if (sites_.front().dims()[0] != 1 || sites_.back().dims()[2] != 1) {
    throw std::invalid_argument("MatrixProductState: boundary bonds must have extent 1");
  }
  for (std::size_t b = 0; b + 1 < sites_.size(); ++b) check_bond(b);
  if (center_ && *center_ >= sites_.size()) throw std::out_of_range("MatrixProductState: center out of range");
}

DenseTensor MatrixProductState::checked(DenseTensor t) {
  if (t.rank() != 3) throw std::invalid_argument("MatrixProductState: site tensors must be rank 3");
  return t.permuted(kSiteLabels);
}

void MatrixProductState::check_bond(std::size_t b) const {
  if (sites_[b].dims()[2] != sites_[b + 1].dims()[0]) {
    throw std::invalid_argument("MatrixProductState: bond extent mismatch at bond " + std::to_string(b));
  }
}

std::vector<std::size_t> MatrixProductState::phys_dims() const {
  std::vector<std::size_t> d;
  for (const auto& s : sites_) d.push_back(s.dims()[1]);
  return d;
}

std::vector<std::size_t> MatrixProductState::bond_dims() const {
  std::vector<std::size_t> d;
  for (std::size_t b = 0; b + 1 < sites_.size(); ++b) d.push_back(bond_dim(b));
  return d;
}

std::size_t MatrixProductState::max_bond() const {
  std::size_t m = 1;
  for (const auto& s : sites_) m = std::max(m, s.dims()[2]);
  return m;
}

void MatrixProductState::set_site(std::size_t k, DenseTensor t) {
  sites_.at(k) = checked(std::move(t));
  if (k > 0) check_bond(k - 1);
  if (k + 1 < sites_.size()) check_bond(k);
  if (k == 0 && sites_[0].dims()[0] != 1) throw std::invalid_argument("left boundary bond must be 1");
  if (k + 1 == sites_.size() && sites_[k].dims()[2] != 1) {
    throw std::invalid_argument("right boundary bond must be 1");
  }
  center_.reset();
}

void MatrixProductState::set_pair(std::size_t k, DenseTensor left, DenseTensor right) {
  if (k + 1 >= sites_.size()) throw std::out_of_range("set_pair: no bond to the right of site");
  sites_[k] = checked(std::move(left));
  sites_[k + 1] = checked(std::move(right));
  check_bond(k);
  if (k > 0) check_bond(k - 1);
  if (k + 2 < sites_.size()) check_bond(k + 1);
  center_.reset();
}

void MatrixProductState::set_center(std::optional<std::size_t> c) {
  if (c && *c >= sites_.size()) throw std::out_of_range("center out of range");
  center_ = c;
}

// ---------------------------------------------------------------------------

MatrixProductState product_state(const std::vector<VectorXc>& local_vectors) {
  std::vector<DenseTensor> sites;
  for (const auto& v : local_vectors) {
    const auto d = static_cast<std::size_t>(v.size());
    sites.emplace_back(std::vector<std::size_t>{1, d, 1}, kSiteLabels,
                       std::vector<cplx>(v.data(), v.data() + v.size()));
  }
  return MatrixProductState(std::move(sites), 0);
}

MatrixProductState random_mps(const std::vector<std::size_t>& phys_dims, std::size_t bond,
                              std::uint64_t seed) {
  const std::size_t n = phys_dims.size();
  std::vector<std::size_t> bonds(n + 1, 1);
  for (std::size_t b = 1; b < n; ++b) {
    double left = 1, right = 1;
    for (std::size_t i = 0; i < b; ++i) left *= static_cast<double>(phys_dims[i]);
    for (std::size_t i = b; i < n; ++i) right *= static_cast<double>(phys_dims[i]);
    bonds[b] = static_cast<std::size_t>(std::min({static_cast<double>(bond), left, right}));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<DenseTensor> sites;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<cplx> data(bonds[k] * phys_dims[k] * bonds[k + 1]);
    for (auto& z : data) z = nd(rng);
    sites.emplace_back(std::vector<std::size_t>{bonds[k], phys_dims[k], bonds[k + 1]}, kSiteLabels,
                       std::move(data));
  }
  return normalized(canonicalize(MatrixProductState(std::move(sites)), 0));
}

namespace {

// Moves the center one site to the right using a QR of site k.
void shift_right(MatrixProductState& psi, std::size_t k) {
  auto qr = qr_split(psi.site(k), {"l", "p"}, "r", "x");
  auto next = contract(qr.r, psi.site(k + 1), {{"r", "l"}}).relabeled({{"x", "l"}});
  psi.set_pair(k, std::move(qr.q), std::move(next));
}

// Moves the center one site to the left using a QR of the transposed site k.
void shift_left(MatrixProductState& psi, std::size_t k) {
  auto qr = qr_split(psi.site(k), {"p", "r"}, "l", "x");
  auto prev = contract(psi.site(k - 1), qr.r, {{"r", "l"}}).relabeled({{"x", "r"}});
  psi.set_pair(k - 1, std::move(prev), std::move(qr.q));
}

}  // namespace

MatrixProductState canonicalize(const MatrixProductState& psi, std::size_t c) {
  if (c >= psi.size()) throw std::out_of_range("canonicalize: center out of range");
  MatrixProductState out = psi;
  for (std::size_t k = 0; k < c; ++k) shift_right(out, k);
  for (std::size_t k = out.size() - 1; k > c; --k) shift_left(out, k);
  out.set_center(c);
  return out;
}

MatrixProductState move_center(const MatrixProductState& psi, std::size_t c) {
  if (c >= psi.size()) throw std::out_of_range("move_center: center out of range");
  if (!psi.center()) return canonicalize(psi, c);
  MatrixProductState out = psi;
  const std::size_t from = *psi.center();
  for (std::size_t k = from; k < c; ++k) shift_right(out, k);
  for (std::size_t k = from; k > c; --k) shift_left(out, k);
  out.set_center(c);
  return out;
}

MatrixProductState scaled(const MatrixProductState& psi, cplx factor) {
  MatrixProductState out = psi;
  const std::size_t k = psi.center().value_or(0);
  out.set_site(k, psi.site(k).scaled(factor));
  out.set_center(psi.center());
  return out;
}

MatrixProductState normalized(const MatrixProductState& psi) {
  const double n = norm(psi);
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("normalized: state has zero or non-finite norm");
  return scaled(psi, 1.0 / n);
}

MatrixProductState gauge_transform(const MatrixProductState& psi, std::size_t bond, const MatrixXc& x) {
  if (bond + 1 >= psi.size()) throw std::out_of_range("gauge_transform: bond out of range");
  const auto d = psi.bond_dim(bond);
  if (static_cast<std::size_t>(x.rows()) != d || x.rows() != x.cols()) {
    throw std::invalid_argument("gauge_transform: X must be square with the bond extent");
  }
  Eigen::FullPivLU<MatrixXc> lu(x);
  if (!lu.isInvertible()) throw std::invalid_argument("gauge_transform: X is not invertible");
  const MatrixXc xinv = lu.inverse();
  auto xt = DenseTensor::from_matrix(x, {d}, {"r"}, {d}, {"x"});
  auto xi = DenseTensor::from_matrix(xinv, {d}, {"x"}, {d}, {"l"});
  auto left = contract(psi.site(bond), xt, {{"r", "r"}}).relabeled({{"x", "r"}});
  auto right = contract(xi, psi.site(bond + 1), {{"l", "l"}}).relabeled({{"x", "l"}});
  MatrixProductState out = psi;
  out.set_pair(bond, std::move(left), std::move(right));
  return out;
}

cplx inner(const MatrixProductState& phi, const MatrixProductState& psi) {
  if (phi.phys_dims() != psi.phys_dims()) throw std::invalid_argument("inner: lattice mismatch");
  auto env = identity_env(1);
  for (std::size_t k = 0; k < psi.size(); ++k) env = transfer(env, phi.site(k), psi.site(k));
  return close_env(env);
}

double norm(const MatrixProductState& psi) {
  if (auto c = psi.center()) return psi.site(*c).norm();
  return std::sqrt(std::max(0.0, inner(psi, psi).real()));
}

cplx expect_local(const MatrixProductState& psi, const MatrixXc& op, std::size_t site) {
  return expectation(psi, {{site, op}});
}

cplx correlator(const MatrixProductState& psi, const MatrixXc& op_a, std::size_t site_a,
                const MatrixXc& op_b, std::size_t site_b) {
  if (site_a == site_b) return expectation(psi, {{site_a, op_a * op_b}});
  return expectation(psi, {{site_a, op_a}, {site_b, op_b}});
}

SchmidtSpectrum schmidt_spectrum(const MatrixProductState& psi, std::size_t bond) {
  if (bond + 1 >= psi.size()) throw std::out_of_range("schmidt_spectrum: bond out of range");
  const auto c = move_center(psi, bond);
  const auto split = svd_split(c.site(bond), {"l", "p"});
  SchmidtSpectrum out{bond, split.s};
  double n = 0.0;
  for (double s : out.values) n += s * s;
  n = std::sqrt(n);
  if (n > 0.0)
    for (auto& s : out.values) s /= n;
  return out;
}

double entropy(const SchmidtSpectrum& spectrum) {
  double s = 0.0;
  for (double l : spectrum.values) {
    const double p = l * l;
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

double entanglement_entropy(const MatrixProductState& psi, std::size_t bond) {
  return entropy(schmidt_spectrum(psi, bond));
}

CompressResult compress(const MatrixProductState& psi, const TruncationSpec& spec) {
  spec.validate();
  CompressResult out{canonicalize(psi, psi.size() - 1), 0.0,
                     std::vector<double>(psi.size() > 0 ? psi.size() - 1 : 0, 0.0)};
  auto& st = out.state;
  for (std::size_t k = st.size() - 1; k > 0; --k) {
    auto split = svd_split(st.site(k), {"l"}, spec, "x", "l");
    std::vector<cplx> diag(split.s.size() * split.s.size(), 0.0);
    for (std::size_t i = 0; i < split.s.size(); ++i) diag[i * split.s.size() + i] = split.s[i];
    DenseTensor us = contract(split.u, DenseTensor({split.s.size(), split.s.size()}, {"x", "y"}, diag),
                              {{"x", "x"}});  // (l, y)
    auto prev = contract(st.site(k - 1), us, {{"r", "l"}}).relabeled({{"y", "r"}});
    st.set_pair(k - 1, std::move(prev), std::move(split.v));
    out.bond_weights[k - 1] = split.report.discarded_weight;
    out.discarded_weight += split.report.discarded_weight;
  }
  st.set_center(0);
  return out;
}

VectorXc to_dense(const MatrixProductState& psi) {
  DenseTensor t = psi.site(0).relabeled({{"p", "s0"}});
  for (std::size_t k = 1; k < psi.size(); ++k) {
    t = contract(t, psi.site(k).relabeled({{"p", "s" + std::to_string(k)}}), {{"r", "l"}});
  }
  VectorXc v(static_cast<Eigen::Index>(t.size()));
  std::copy(t.data().begin(), t.data().end(), v.data());
  return v;
}

namespace ops {

MatrixXc identity(std::size_t d) {
  return MatrixXc::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

MatrixXc sigma_x() {
  MatrixXc m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

MatrixXc sigma_y() {
  MatrixXc m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}

MatrixXc sigma_z() {
  MatrixXc m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

MatrixXc sigma_plus() {
  MatrixXc m(2, 2);
  m << 0, 1, 0, 0;
  return m;
}

MatrixXc sigma_minus() {
  MatrixXc m(2, 2);
  m << 0, 0, 1, 0;
  return m;
}

MatrixXc kron(const MatrixXc& a, const MatrixXc& b) {
  MatrixXc out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace ops

}  // namespace tnet
