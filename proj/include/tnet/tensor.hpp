#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace tnet {

using cplx = std::complex<double>;
using Label = std::string;
using LabelPair = std::pair<Label, Label>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;

// Dense complex tensor with labeled axes.
//
// Storage is row-major over `dims()` (the last axis varies fastest) and is
// shared between copies: a DenseTensor never mutates after construction, so
// relabeling or copying is O(rank). A rank-0 tensor holds exactly one value.
class DenseTensor {
 public:
  DenseTensor();  // rank-0 zero
  DenseTensor(std::vector<std::size_t> dims, std::vector<Label> labels);  // zeros
  DenseTensor(std::vector<std::size_t> dims, std::vector<Label> labels,
              std::vector<cplx> data);

  static DenseTensor scalar(cplx value);
  // Rows are labeled by `row_labels`/`row_dims`, columns likewise; the matrix
  // is unpacked in row-major axis order.
  static DenseTensor from_matrix(const MatrixXc& m, std::vector<std::size_t> row_dims,
                                 std::vector<Label> row_labels,
                                 std::vector<std::size_t> col_dims,
                                 std::vector<Label> col_labels);

  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return data_->size(); }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  const std::vector<Label>& labels() const noexcept { return labels_; }
  std::span<const cplx> data() const noexcept { return {data_->data(), data_->size()}; }

  bool has_label(const Label& l) const noexcept;
  std::size_t axis(const Label& l) const;  // throws std::invalid_argument
  std::size_t dim(const Label& l) const { return dims_[axis(l)]; }

  cplx at(std::initializer_list<std::size_t> index) const;
  cplx at(std::span<const std::size_t> index) const;
  cplx value() const;  // rank-0 only

  DenseTensor relabeled(std::initializer_list<LabelPair> renames) const;
  DenseTensor relabeled(const std::vector<LabelPair>& renames) const;
  DenseTensor with_labels(std::vector<Label> labels) const;
  // Axis permutation; `order` lists every label once.
  DenseTensor permuted(const std::vector<Label>& order) const;
  DenseTensor conj() const;
  DenseTensor scaled(cplx factor) const;

  double norm() const;      // Frobenius
  double max_abs() const;
  bool is_real() const;     // every imaginary part is exactly zero
  bool all_finite() const;

  // Groups `row_labels` (in that order) into rows and the remaining labels,
  // in their current order, into columns.
  MatrixXc to_matrix(const std::vector<Label>& row_labels) const;

 private:
  std::vector<std::size_t> dims_;
  std::vector<Label> labels_;
  std::shared_ptr<const std::vector<cplx>> data_;
};

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b);  // same labels
DenseTensor operator-(const DenseTensor& a, const DenseTensor& b);
double max_abs_diff(const DenseTensor& a, const DenseTensor& b);   // aligns labels

// Pairwise contraction. The result carries the unpaired labels of `a` (in
// order) followed by those of `b`.
DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     const std::vector<LabelPair>& pairs);
// Pairs every label the two tensors share.
DenseTensor contract_shared(const DenseTensor& a, const DenseTensor& b);
DenseTensor outer(const DenseTensor& a, const DenseTensor& b);

// Contraction sequence over single-assignment ids: inputs are 0..n-1 and the
// k-th pairwise contraction produces id n+k.
using ContractionOrder = std::vector<std::pair<std::size_t, std::size_t>>;

ContractionOrder greedy_order(const std::vector<DenseTensor>& tensors);
// Exhaustive search minimizing total cost (sum over steps of the product of all
// distinct extents involved). Limited to six tensors.
ContractionOrder optimal_order(const std::vector<DenseTensor>& tensors);
double order_cost(const std::vector<DenseTensor>& tensors, const ContractionOrder& order);

// Contracts every label shared by two tensors. Labels may appear at most twice
// across the network; open labels are returned in order of first appearance.
// Disconnected components are joined by outer products.
DenseTensor contract_network(const std::vector<DenseTensor>& tensors,
                             const std::optional<ContractionOrder>& order = std::nullopt);

enum class NormPolicy { keep, renormalize };

struct TruncationSpec {
  std::size_t max_bond = static_cast<std::size_t>(-1);
  double rel_cutoff = 0.0;
  NormPolicy norm_policy = NormPolicy::keep;

  void validate() const;
};

struct TruncationReport {
  std::size_t kept = 0;
  double discarded_weight = 0.0;
};

struct SvdSplit {
  DenseTensor u;              // left labels + bond
  std::vector<double> s;      // descending
  DenseTensor v;              // bond + right labels
  TruncationReport report;
};

// t ~= U diag(S) V with `left_labels` grouped into rows. Singular values at or
// below 1e-14 * S[0] are numerically zero and never kept.
SvdSplit svd_split(const DenseTensor& t, const std::vector<Label>& left_labels,
                   const TruncationSpec& spec = {}, const Label& u_bond = "bond",
                   const Label& v_bond = "bond");

struct QrSplit {
  DenseTensor q;  // left labels + bond, isometric
  DenseTensor r;  // bond + right labels
};

QrSplit qr_split(const DenseTensor& t, const std::vector<Label>& left_labels,
                 const Label& q_bond = "bond", const Label& r_bond = "bond");

// Truncation rule shared by every SVD-based split: returns the number of
// singular values to keep and the relative discarded weight.
TruncationReport choose_truncation(std::span<const double> s, const TruncationSpec& spec);

}  // namespace tnet
