#pragma once

#include <Eigen/Dense>

namespace tnet::detail {

struct Svd {
  Eigen::MatrixXcd u;   // m x k
  Eigen::VectorXd s;    // k, descending
  Eigen::MatrixXcd vh;  // k x n
};

// Thin SVD through LAPACK gesdd (gesvd fallback). Real input is factorized in
// real arithmetic. Throws NumericalError on failure.
Svd svd(const Eigen::MatrixXcd& a);

struct Eigh {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // columns
};

// Hermitian eigendecomposition through LAPACK (syevd / heevd).
Eigh eigh(const Eigen::MatrixXcd& a);

bool is_real(const Eigen::MatrixXcd& a);

}  // namespace tnet::detail
