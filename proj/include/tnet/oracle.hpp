#pragma once

// Brute-force reference computations. This target depends only on Eigen,
// LAPACK and the model descriptions; it shares no code with the solvers.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "tnet/models.hpp"

namespace tnet::oracle {

// Dense d^N x d^N Hamiltonian, site 0 most significant, |0> = spin up.
struct DenseHamiltonian {
  std::size_t n = 0;
  std::size_t d = 2;
  Eigen::MatrixXcd matrix;
};

struct Eigenpairs {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // columns
};

struct GroundState {
  double energy = 0.0;
  Eigen::VectorXcd vector;
};

struct GibbsState {
  double energy = 0.0;
  double log_z = 0.0;
  Eigen::MatrixXcd rho;
};

constexpr std::size_t kMaxDenseDim = 4096;

DenseHamiltonian dense_hamiltonian(const HamiltonianSpec& spec);
Eigen::MatrixXcd embed(const Eigen::MatrixXcd& op, std::size_t site, std::size_t n, std::size_t d = 2);

GroundState ed_ground(const DenseHamiltonian& h);
Eigenpairs ed_spectrum(const DenseHamiltonian& h, std::size_t k);
Eigenpairs full_spectrum(const DenseHamiltonian& h);

// exp(-i H t) v0.
Eigen::VectorXcd dense_evolve(const DenseHamiltonian& h, const Eigen::VectorXcd& v0, double t);
// exp(-beta H) / Z with energy and ln Z.
GibbsState dense_gibbs(const DenseHamiltonian& h, double beta);
// Tr(rho O_site).
std::complex<double> local_expectation(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& op, std::size_t site,
                                       std::size_t n, std::size_t d = 2);

// Open transverse-field Ising chain, H = -J sum sz sz - h sum sx, solved as
// free fermions: E0 = -sum of singular values of the bidiagonal matrix
// (diagonal h, superdiagonal J).
double tfi_free_fermion_ground(std::size_t n, double j, double h);

// Square-lattice Ising, Z = sum exp(beta J sum_<ij> s_i s_j).
// L x L torus by enumeration (L <= 4).
double ising_brute_force(std::size_t l, double beta, double j = 1.0);
// Free energy per site of an infinitely long cylinder of the given
// circumference, from the leading row-to-row transfer-matrix eigenvalue.
double ising_transfer_matrix(std::size_t width, double beta, double j = 1.0);
// Infinite-lattice estimate from cylinders of circumference max_width - 2 ..
// max_width: the finite-size error decays geometrically, so Aitken's delta^2
// removes the leading term.
double ising_transfer_matrix_limit(double beta, double j = 1.0, std::size_t max_width = 12);
// Exact infinite-lattice free energy per site.
double onsager_f(double beta, double j = 1.0);
// Same quantity from the double-integral form on a periodic grid; used to
// cross-check onsager_f away from criticality.
double onsager_f_double_integral(double beta, double j = 1.0, std::size_t grid = 256);

}  // namespace tnet::oracle
