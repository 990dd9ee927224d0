#include "tnet/lanczos.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tnet/errors.hpp"

namespace tnet {

LanczosResult lanczos_lowest(const std::function<VectorXc(const VectorXc&)>& apply, const VectorXc& seed,
                             const LanczosConfig& cfg) {
  if (cfg.max_iter < 1 || !(cfg.tol > 0.0)) throw std::invalid_argument("lanczos: invalid configuration");
  const Eigen::Index n = seed.size();
  if (n == 0) throw std::invalid_argument("lanczos: empty seed");

  VectorXc v0 = seed;
  if (!(v0.norm() > 0.0) || !v0.allFinite()) v0 = VectorXc::Ones(n);
  v0.normalize();

  const auto max_dim = static_cast<Eigen::Index>(std::min<std::size_t>(cfg.max_iter, static_cast<std::size_t>(n)));
  MatrixXc basis(n, max_dim);
  basis.col(0) = v0;
  std::vector<double> alpha, beta;

  LanczosResult out;
  Eigen::VectorXd ritz;
  for (Eigen::Index j = 0; j < max_dim; ++j) {
    VectorXc w = apply(basis.col(j));
    if (!w.allFinite()) throw NumericalError("lanczos: non-finite operator output");
    alpha.push_back(basis.col(j).dot(w).real());
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) {
      w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * w);
    }
    const double b = w.norm();

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(j + 1, j + 1);
    for (Eigen::Index i = 0; i <= j; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i > 0) t(i, i - 1) = t(i - 1, i) = beta[static_cast<std::size_t>(i - 1)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    ritz = es.eigenvectors().col(0);
    out.value = es.eigenvalues()(0);
    out.residual = b * std::abs(ritz(j));
    out.iterations = static_cast<std::size_t>(j + 1);

    const double scale = std::max(1.0, std::abs(out.value));
    const bool exhausted = b <= 1e-13 * scale || j + 1 == n;
    if (out.residual <= cfg.tol || exhausted) {
      out.converged = true;
      break;
    }
    if (j + 1 == max_dim) break;
    beta.push_back(b);
    basis.col(j + 1) = w / b;
  }
  const auto k = static_cast<Eigen::Index>(out.iterations);
  out.vector = basis.leftCols(k) * ritz.cast<cplx>();
  out.vector.normalize();
  return out;
}

}  // namespace tnet
