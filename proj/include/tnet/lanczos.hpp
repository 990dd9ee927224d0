#pragma once

#include <functional>

#include "tnet/tensor.hpp"

namespace tnet {

struct LanczosConfig {
  std::size_t max_iter = 100;
  double tol = 1e-10;  // on ||A x - theta x||
};

struct LanczosResult {
  double value = 0.0;
  VectorXc vector;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Lowest eigenpair of a Hermitian operator given only its action. Krylov
// vectors are fully reorthogonalized; the seed is the first Krylov vector, so
// the returned value never exceeds the seed's Rayleigh quotient.
LanczosResult lanczos_lowest(const std::function<VectorXc(const VectorXc&)>& apply, const VectorXc& seed,
                             const LanczosConfig& cfg = {});

}  // namespace tnet
