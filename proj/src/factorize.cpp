#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "detail/linalg.hpp"
#include "tnet/errors.hpp"
#include "tnet/tensor.hpp"

namespace tnet {

namespace {

constexpr double kNumericalZero = 1e-14;
constexpr double kTieTolerance = 1e-14;

struct Grouping {
  std::vector<Label> left_labels, right_labels;
  std::vector<std::size_t> left_dims, right_dims;
};

Grouping group(const DenseTensor& t, const std::vector<Label>& left_labels) {
  if (left_labels.empty() || left_labels.size() >= t.rank()) {
    throw std::invalid_argument("split: left labels must be a nonempty proper subset");
  }
  Grouping g;
  g.left_labels = left_labels;
  for (const auto& l : left_labels) g.left_dims.push_back(t.dim(l));
  for (std::size_t i = 0; i < t.rank(); ++i) {
    const auto& l = t.labels()[i];
    if (std::find(left_labels.begin(), left_labels.end(), l) == left_labels.end()) {
      g.right_labels.push_back(l);
      g.right_dims.push_back(t.dims()[i]);
    }
  }
  if (g.left_labels.size() + g.right_labels.size() != t.rank()) {
    throw std::invalid_argument("split: duplicate left label");
  }
  return g;
}

// Rotates column j of `q` so that its largest-magnitude entry is real positive
// and applies the inverse phase to row j of `r`.
void fix_phases(MatrixXc& q, MatrixXc& r) {
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      const double a = std::abs(q(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (best <= 0.0) continue;
    const cplx phase = q(arg, j) / best;
    q.col(j) *= std::conj(phase);
    r.row(j) *= phase;
  }
}

}  // namespace

TruncationReport choose_truncation(std::span<const double> s, const TruncationSpec& spec) {
  spec.validate();
  TruncationReport report;
  if (s.empty()) return report;
  const double s0 = s[0];
  double total = 0.0;
  for (double x : s) total += x * x;
  if (!(s0 > 0.0)) {
    report.kept = 1;
    return report;
  }
  std::size_t nonzero = 0;
  while (nonzero < s.size() && s[nonzero] > kNumericalZero * s0) ++nonzero;
  nonzero = std::max<std::size_t>(nonzero, 1);

  const std::size_t cap = std::min(spec.max_bond, nonzero);
  std::size_t keep = 0;
  while (keep < nonzero && s[keep] >= spec.rel_cutoff * s0) ++keep;
  keep = std::max<std::size_t>(keep, 1);
  // Never split a degenerate multiplet at the cutoff boundary (up to max_bond).
  while (keep < cap && std::abs(s[keep] - s[keep - 1]) <= kTieTolerance * s[keep - 1]) ++keep;
  keep = std::min(keep, cap);

  // Numerically zero values are structural, not truncation error.
  double discarded = 0.0;
  for (std::size_t i = keep; i < nonzero; ++i) discarded += s[i] * s[i];
  report.kept = keep;
  report.discarded_weight = std::clamp(discarded / total, 0.0, 1.0);
  return report;
}

SvdSplit svd_split(const DenseTensor& t, const std::vector<Label>& left_labels,
                   const TruncationSpec& spec, const Label& u_bond, const Label& v_bond) {
  spec.validate();
  const auto g = group(t, left_labels);
  if (!t.all_finite()) throw NumericalError("svd_split: non-finite input");
  const auto dec = detail::svd(t.to_matrix(left_labels));

  std::vector<double> s(dec.s.data(), dec.s.data() + dec.s.size());
  const auto report = choose_truncation(s, spec);
  const auto k = static_cast<Eigen::Index>(report.kept);

  MatrixXc u = dec.u.leftCols(k);
  MatrixXc vh = dec.vh.topRows(k);
  fix_phases(u, vh);

  s.resize(report.kept);
  if (spec.norm_policy == NormPolicy::renormalize && report.discarded_weight > 0.0 &&
      report.discarded_weight < 1.0) {
    const double factor = 1.0 / std::sqrt(1.0 - report.discarded_weight);
    for (auto& x : s) x *= factor;
  }

  SvdSplit out{DenseTensor::from_matrix(u, g.left_dims, g.left_labels, {report.kept}, {u_bond}), s,
               DenseTensor::from_matrix(vh, {report.kept}, {v_bond}, g.right_dims, g.right_labels),
               report};
  return out;
}

QrSplit qr_split(const DenseTensor& t, const std::vector<Label>& left_labels, const Label& q_bond,
                 const Label& r_bond) {
  const auto g = group(t, left_labels);
  if (!t.all_finite()) throw NumericalError("qr_split: non-finite input");
  const MatrixXc a = t.to_matrix(left_labels);
  const auto m = a.rows(), n = a.cols();
  const auto k = std::min(m, n);
  Eigen::HouseholderQR<MatrixXc> qr(a);
  MatrixXc q = qr.householderQ() * MatrixXc::Identity(m, k);
  MatrixXc r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  fix_phases(q, r);
  const auto bond = static_cast<std::size_t>(k);
  return {DenseTensor::from_matrix(q, g.left_dims, g.left_labels, {bond}, {q_bond}),
          DenseTensor::from_matrix(r, {bond}, {r_bond}, g.right_dims, g.right_labels)};
}

}  // namespace tnet
