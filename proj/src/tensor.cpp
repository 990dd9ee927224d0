#include "tnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "detail/blas_guard.hpp"
#include "detail/permute.hpp"

namespace tnet {

namespace {
[[maybe_unused]] const bool kBlasChecked = detail::ensure_blas_kernels();
}  // namespace

namespace {

std::size_t product(const std::vector<std::size_t>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

void check_labels(const std::vector<std::size_t>& dims, const std::vector<Label>& labels) {
  if (dims.size() != labels.size()) {
    throw std::invalid_argument("DenseTensor: label count does not match rank");
  }
  std::unordered_set<Label> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) {
      throw std::invalid_argument("DenseTensor: duplicate label '" + l + "'");
    }
  }
  for (auto d : dims) {
    if (d == 0) throw std::invalid_argument("DenseTensor: axis extents must be positive");
  }
}

}  // namespace

DenseTensor::DenseTensor()
    : data_(std::make_shared<const std::vector<cplx>>(1, cplx{0.0, 0.0})) {}

DenseTensor::DenseTensor(std::vector<std::size_t> dims, std::vector<Label> labels)
    : dims_(std::move(dims)), labels_(std::move(labels)) {
  check_labels(dims_, labels_);
  data_ = std::make_shared<const std::vector<cplx>>(product(dims_), cplx{0.0, 0.0});
}

DenseTensor::DenseTensor(std::vector<std::size_t> dims, std::vector<Label> labels,
                         std::vector<cplx> data)
    : dims_(std::move(dims)), labels_(std::move(labels)) {
  check_labels(dims_, labels_);
  if (data.size() != product(dims_)) {
    throw std::invalid_argument("DenseTensor: data length " + std::to_string(data.size()) +
                                " does not match product of dims " +
                                std::to_string(product(dims_)));
  }
  data_ = std::make_shared<const std::vector<cplx>>(std::move(data));
}

DenseTensor DenseTensor::scalar(cplx value) { return DenseTensor({}, {}, {value}); }

DenseTensor DenseTensor::from_matrix(const MatrixXc& m, std::vector<std::size_t> row_dims,
                                     std::vector<Label> row_labels,
                                     std::vector<std::size_t> col_dims,
                                     std::vector<Label> col_labels) {
  const auto rows = product(row_dims);
  const auto cols = product(col_dims);
  if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols) {
    throw std::invalid_argument("DenseTensor::from_matrix: shape mismatch");
  }
  std::vector<cplx> data(rows * cols);
  Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)) = m;
  row_dims.insert(row_dims.end(), col_dims.begin(), col_dims.end());
  row_labels.insert(row_labels.end(), col_labels.begin(), col_labels.end());
  return DenseTensor(std::move(row_dims), std::move(row_labels), std::move(data));
}

bool DenseTensor::has_label(const Label& l) const noexcept {
  return std::find(labels_.begin(), labels_.end(), l) != labels_.end();
}

std::size_t DenseTensor::axis(const Label& l) const {
  auto it = std::find(labels_.begin(), labels_.end(), l);
  if (it == labels_.end()) throw std::invalid_argument("DenseTensor: unknown label '" + l + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

cplx DenseTensor::at(std::initializer_list<std::size_t> index) const {
  return at(std::span<const std::size_t>(index.begin(), index.size()));
}

cplx DenseTensor::at(std::span<const std::size_t> index) const {
  if (index.size() != rank()) throw std::invalid_argument("DenseTensor::at: wrong index rank");
  std::size_t offset = 0;
  for (std::size_t i = 0; i < rank(); ++i) {
    if (index[i] >= dims_[i]) throw std::out_of_range("DenseTensor::at: index out of range");
    offset = offset * dims_[i] + index[i];
  }
  return (*data_)[offset];
}

cplx DenseTensor::value() const {
  if (rank() != 0) throw std::invalid_argument("DenseTensor::value: tensor is not rank-0");
  return (*data_)[0];
}

DenseTensor DenseTensor::relabeled(std::initializer_list<LabelPair> renames) const {
  return relabeled(std::vector<LabelPair>(renames));
}

DenseTensor DenseTensor::relabeled(const std::vector<LabelPair>& renames) const {
  auto labels = labels_;
  for (const auto& [from, to] : renames) {
    labels[axis(from)] = to;
  }
  return with_labels(std::move(labels));
}

DenseTensor DenseTensor::with_labels(std::vector<Label> labels) const {
  check_labels(dims_, labels);
  DenseTensor out = *this;
  out.labels_ = std::move(labels);
  return out;
}

DenseTensor DenseTensor::permuted(const std::vector<Label>& order) const {
  if (order.size() != rank()) throw std::invalid_argument("DenseTensor::permuted: wrong label count");
  std::vector<std::size_t> perm(rank());
  bool identity = true;
  for (std::size_t i = 0; i < rank(); ++i) {
    perm[i] = axis(order[i]);
    identity = identity && perm[i] == i;
  }
  if (identity) return *this;
  std::vector<std::size_t> dims(rank());
  for (std::size_t i = 0; i < rank(); ++i) dims[i] = dims_[perm[i]];
  std::vector<cplx> out(size());
  detail::permute_into(data(), dims_, perm, out.data(), detail::Identity{});
  return DenseTensor(std::move(dims), order, std::move(out));
}

DenseTensor DenseTensor::conj() const {
  std::vector<cplx> out(size());
  std::transform(data_->begin(), data_->end(), out.begin(), [](cplx z) { return std::conj(z); });
  return DenseTensor(dims_, labels_, std::move(out));
}

DenseTensor DenseTensor::scaled(cplx factor) const {
  std::vector<cplx> out(size());
  std::transform(data_->begin(), data_->end(), out.begin(), [factor](cplx z) { return factor * z; });
  return DenseTensor(dims_, labels_, std::move(out));
}

double DenseTensor::norm() const {
  double s = 0.0;
  for (const auto& z : *data_) s += std::norm(z);
  return std::sqrt(s);
}

double DenseTensor::max_abs() const {
  double m = 0.0;
  for (const auto& z : *data_) m = std::max(m, std::abs(z));
  return m;
}

bool DenseTensor::is_real() const {
  return std::all_of(data_->begin(), data_->end(), [](cplx z) { return z.imag() == 0.0; });
}

bool DenseTensor::all_finite() const {
  return std::all_of(data_->begin(), data_->end(), [](cplx z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

MatrixXc DenseTensor::to_matrix(const std::vector<Label>& row_labels) const {
  std::vector<Label> order = row_labels;
  std::size_t rows = 1;
  for (const auto& l : row_labels) rows *= dim(l);
  for (const auto& l : labels_) {
    if (std::find(row_labels.begin(), row_labels.end(), l) == row_labels.end()) order.push_back(l);
  }
  const auto p = permuted(order);
  const auto cols = size() / rows;
  return Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      p.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

namespace {

DenseTensor combine(const DenseTensor& a, const DenseTensor& b, double sign) {
  const auto bb = b.permuted(a.labels());
  if (bb.dims() != a.dims()) throw std::invalid_argument("DenseTensor: shape mismatch in sum");
  std::vector<cplx> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + sign * bb.data()[i];
  return DenseTensor(a.dims(), a.labels(), std::move(out));
}

}  // namespace

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b) { return combine(a, b, 1.0); }
DenseTensor operator-(const DenseTensor& a, const DenseTensor& b) { return combine(a, b, -1.0); }

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) { return (a - b).max_abs(); }

// ---------------------------------------------------------------------------
// Pairwise contraction: permute to (free_a | paired) x (paired | free_b) and
// hand the product to GEMM. When both operands are real the product runs in
// double precision real arithmetic.

namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Operand {
  std::vector<std::size_t> perm;  // source axis for each matricized axis
  bool identity = true;
};

Operand make_operand(const DenseTensor& t, const std::vector<Label>& order) {
  Operand op;
  op.perm.resize(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    op.perm[i] = t.axis(order[i]);
    op.identity = op.identity && op.perm[i] == i;
  }
  return op;
}

std::vector<double> real_matrix(const DenseTensor& t, const Operand& op) {
  std::vector<double> out(t.size());
  detail::permute_into(t.data(), t.dims(), op.perm, out.data(), detail::RealPart{});
  return out;
}

}  // namespace

DenseTensor contract(const DenseTensor& a, const DenseTensor& b, const std::vector<LabelPair>& pairs) {
  std::vector<Label> paired_a, paired_b;
  std::unordered_set<Label> used_a, used_b;
  std::size_t k = 1;
  for (const auto& [la, lb] : pairs) {
    const auto ax = a.axis(la);
    const auto bx = b.axis(lb);
    if (!used_a.insert(la).second || !used_b.insert(lb).second) {
      throw std::invalid_argument("contract: label paired twice");
    }
    if (a.dims()[ax] != b.dims()[bx]) {
      throw std::invalid_argument("contract: dimension mismatch on pair (" + la + ", " + lb + ")");
    }
    k *= a.dims()[ax];
  }
  // Order the summed axes as they appear in `a` so row-major layouts often need
  // no permutation.
  std::vector<std::pair<std::size_t, std::size_t>> order_idx;
  for (std::size_t i = 0; i < pairs.size(); ++i) order_idx.emplace_back(a.axis(pairs[i].first), i);
  std::sort(order_idx.begin(), order_idx.end());
  for (const auto& [ax, i] : order_idx) {
    paired_a.push_back(pairs[i].first);
    paired_b.push_back(pairs[i].second);
  }

  std::vector<Label> free_a, free_b, out_labels;
  std::vector<std::size_t> out_dims;
  std::size_t m = 1, n = 1;
  for (std::size_t i = 0; i < a.rank(); ++i) {
    if (!used_a.count(a.labels()[i])) {
      free_a.push_back(a.labels()[i]);
      out_dims.push_back(a.dims()[i]);
      m *= a.dims()[i];
    }
  }
  for (std::size_t i = 0; i < b.rank(); ++i) {
    if (!used_b.count(b.labels()[i])) {
      free_b.push_back(b.labels()[i]);
      out_dims.push_back(b.dims()[i]);
      n *= b.dims()[i];
    }
  }
  out_labels = free_a;
  for (const auto& l : free_b) {
    if (std::find(free_a.begin(), free_a.end(), l) != free_a.end()) {
      throw std::invalid_argument("contract: duplicate surviving label '" + l + "'");
    }
    out_labels.push_back(l);
  }

  // Try both (free|paired) and (paired|free) layouts for each operand; the
  // latter is consumed as a transposed map without copying.
  std::vector<Label> a_fp = free_a, a_pf = paired_a;
  a_fp.insert(a_fp.end(), paired_a.begin(), paired_a.end());
  a_pf.insert(a_pf.end(), free_a.begin(), free_a.end());
  std::vector<Label> b_pf = paired_b, b_fp = free_b;
  b_pf.insert(b_pf.end(), free_b.begin(), free_b.end());
  b_fp.insert(b_fp.end(), paired_b.begin(), paired_b.end());

  const auto em = static_cast<Eigen::Index>(m);
  const auto ek = static_cast<Eigen::Index>(k);
  const auto en = static_cast<Eigen::Index>(n);
  std::vector<cplx> out(m * n);
  Eigen::Map<RowMat> c(out.data(), em, en);

  if (a.is_real() && b.is_real()) {
    const bool a_t = a.labels() == a_pf && a.labels() != a_fp;
    const bool b_t = b.labels() == b_fp && b.labels() != b_pf;
    const auto ra = real_matrix(a, make_operand(a, a_t ? a_pf : a_fp));
    const auto rb = real_matrix(b, make_operand(b, b_t ? b_fp : b_pf));
    RowMatD rc(em, en);
    if (!a_t && !b_t) {
      rc.noalias() = Eigen::Map<const RowMatD>(ra.data(), em, ek) * Eigen::Map<const RowMatD>(rb.data(), ek, en);
    } else if (a_t && !b_t) {
      rc.noalias() = Eigen::Map<const RowMatD>(ra.data(), ek, em).transpose() *
                     Eigen::Map<const RowMatD>(rb.data(), ek, en);
    } else if (!a_t && b_t) {
      rc.noalias() = Eigen::Map<const RowMatD>(ra.data(), em, ek) *
                     Eigen::Map<const RowMatD>(rb.data(), en, ek).transpose();
    } else {
      rc.noalias() = Eigen::Map<const RowMatD>(ra.data(), ek, em).transpose() *
                     Eigen::Map<const RowMatD>(rb.data(), en, ek).transpose();
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = cplx{rc.data()[i], 0.0};
    return DenseTensor(std::move(out_dims), std::move(out_labels), std::move(out));
  }

  // Complex path. Operands already laid out compatibly are mapped in place.
  DenseTensor pa = a, pb = b;
  bool a_t = false, b_t = false;
  if (a.labels() == a_fp) {
  } else if (a.labels() == a_pf) {
    a_t = true;
  } else {
    pa = a.permuted(a_fp);
  }
  if (b.labels() == b_pf) {
  } else if (b.labels() == b_fp) {
    b_t = true;
  } else {
    pb = b.permuted(b_pf);
  }
  const cplx* ad = pa.data().data();
  const cplx* bd = pb.data().data();
  if (!a_t && !b_t) {
    c.noalias() = Eigen::Map<const RowMat>(ad, em, ek) * Eigen::Map<const RowMat>(bd, ek, en);
  } else if (a_t && !b_t) {
    c.noalias() = Eigen::Map<const RowMat>(ad, ek, em).transpose() * Eigen::Map<const RowMat>(bd, ek, en);
  } else if (!a_t && b_t) {
    c.noalias() = Eigen::Map<const RowMat>(ad, em, ek) * Eigen::Map<const RowMat>(bd, en, ek).transpose();
  } else {
    c.noalias() = Eigen::Map<const RowMat>(ad, ek, em).transpose() *
                  Eigen::Map<const RowMat>(bd, en, ek).transpose();
  }
  return DenseTensor(std::move(out_dims), std::move(out_labels), std::move(out));
}

DenseTensor contract_shared(const DenseTensor& a, const DenseTensor& b) {
  std::vector<LabelPair> pairs;
  for (const auto& l : a.labels()) {
    if (b.has_label(l)) pairs.emplace_back(l, l);
  }
  return contract(a, b, pairs);
}

DenseTensor outer(const DenseTensor& a, const DenseTensor& b) { return contract(a, b, {}); }

void TruncationSpec::validate() const {
  if (max_bond < 1) throw std::invalid_argument("TruncationSpec: max_bond must be >= 1");
  if (!(rel_cutoff >= 0.0 && rel_cutoff < 1.0)) {
    throw std::invalid_argument("TruncationSpec: rel_cutoff must lie in [0, 1)");
  }
}

}  // namespace tnet
