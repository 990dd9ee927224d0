#pragma once

// Model descriptions shared by the solvers, the reference oracles and the
// config reader. Header-only so the oracle target does not link the solvers.

#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "tnet/errors.hpp"

namespace tnet {

enum class ModelKind { transverse_field_ising, heisenberg_xxz, custom_nn };

// Nearest-neighbour chain Hamiltonian with open boundaries.
//   transverse_field_ising: H = -J sum sz sz - h sum sx            (Pauli matrices)
//   heisenberg_xxz:         H = J sum (Sx Sx + Sy Sy + delta Sz Sz) - field sum Sz   (S = sigma/2)
//   custom_nn:              H = sum two_site(k, k+1) + sum one_site(k)
struct HamiltonianSpec {
  ModelKind model = ModelKind::transverse_field_ising;
  std::size_t n = 2;
  double j = 1.0;
  double h = 0.0;
  double delta = 1.0;
  double field = 0.0;
  Eigen::MatrixXcd two_site;  // d^2 x d^2, rows ordered (left, right)
  Eigen::MatrixXcd one_site;  // d x d, optional

  std::size_t phys_dim() const {
    if (model != ModelKind::custom_nn) return 2;
    const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(two_site.rows()))));
    return d;
  }

  void validate() const {
    if (n < 2) throw ConfigError("model.n", "chain length must be at least 2");
    for (double v : {j, h, delta, field}) {
      if (!std::isfinite(v)) throw ConfigError("model", "couplings must be finite");
    }
    if (model != ModelKind::custom_nn) return;
    const auto d = static_cast<Eigen::Index>(phys_dim());
    if (d < 1 || two_site.rows() != d * d || two_site.cols() != d * d) {
      throw ConfigError("model.two_site", "two-site term must be a d^2 x d^2 matrix");
    }
    if (!two_site.allFinite() || (two_site - two_site.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
      throw ConfigError("model.two_site", "two-site term must be Hermitian");
    }
    if (one_site.size() != 0) {
      if (one_site.rows() != d || one_site.cols() != d) {
        throw ConfigError("model.one_site", "one-site term dimension does not match the two-site term");
      }
      if (!one_site.allFinite() || (one_site - one_site.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
        throw ConfigError("model.one_site", "one-site term must be Hermitian");
      }
    }
  }
};

inline const char* model_name(ModelKind m) {
  switch (m) {
    case ModelKind::transverse_field_ising: return "transverse_field_ising";
    case ModelKind::heisenberg_xxz: return "heisenberg_xxz";
    case ModelKind::custom_nn: return "custom_nn";
  }
  return "?";
}

inline HamiltonianSpec tfi(std::size_t n, double j, double h) {
  HamiltonianSpec s;
  s.model = ModelKind::transverse_field_ising;
  s.n = n;
  s.j = j;
  s.h = h;
  return s;
}

inline HamiltonianSpec xxz(std::size_t n, double j, double delta, double field = 0.0) {
  HamiltonianSpec s;
  s.model = ModelKind::heisenberg_xxz;
  s.n = n;
  s.j = j;
  s.delta = delta;
  s.field = field;
  return s;
}

// Square-lattice Ising model, Z = sum exp(beta J sum s_i s_j), zero field.
struct ClassicalModelSpec {
  double beta = 0.0;
  double j = 1.0;
  double field = 0.0;

  void validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("model.beta", "beta must be positive");
    if (!(j >= 0.0) || !std::isfinite(j)) throw ConfigError("model.j", "coupling must be non-negative");
    if (field != 0.0) throw ConfigError("model.field", "only zero field is supported");
  }
};

}  // namespace tnet
