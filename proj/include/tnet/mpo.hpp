#pragma once

#include <vector>

#include "tnet/models.hpp"
#include "tnet/mps.hpp"

namespace tnet {

// Site k holds a rank-4 tensor with labels ("l", "po", "pi", "r"): left bond,
// output (bra) physical leg, input (ket) physical leg, right bond.
//
// Nearest-neighbour Hamiltonians use the lower-triangular convention. With
// bond dimension D = r + 2, bulk tensors are
//
//   W[D-1][D-1] = I,  W[0][0] = I,  W[D-1][0] = h1,
//   W[D-1][1+a] = A_a,  W[1+a][0] = B_a,          h2 = sum_a A_a (x) B_a
//
// (row = left bond index). The first site keeps only row D-1, the last site
// only column 0.
class MatrixProductOperator {
 public:
  MatrixProductOperator() = default;
  explicit MatrixProductOperator(std::vector<DenseTensor> sites);

  std::size_t size() const noexcept { return sites_.size(); }
  const DenseTensor& site(std::size_t k) const { return sites_.at(k); }
  const std::vector<DenseTensor>& sites() const noexcept { return sites_; }
  std::size_t phys_dim(std::size_t k) const { return sites_.at(k).dims()[1]; }
  std::vector<std::size_t> phys_dims() const;
  std::size_t bond_dim(std::size_t b) const { return sites_.at(b).dims()[3]; }
  std::size_t max_bond() const;

 private:
  std::vector<DenseTensor> sites_;
};

MatrixProductOperator build_mpo(const HamiltonianSpec& spec);
MatrixProductOperator identity_mpo(const std::vector<std::size_t>& phys_dims);
// Same operator acting on the first factor of every site of a purified chain
// whose local space is (system) x (ancilla), ancilla dimension d_anc.
MatrixProductOperator lift_to_purification(const MatrixProductOperator& w, std::size_t d_anc);

// Two-site terms with one-site terms split evenly onto adjacent bonds (the
// edge sites keep their full share). Entry b acts on sites (b, b+1).
std::vector<MatrixXc> bond_terms(const HamiltonianSpec& spec);
MatrixXc two_site_term(const HamiltonianSpec& spec);
MatrixXc one_site_term(const HamiltonianSpec& spec);

MatrixXc to_dense(const MatrixProductOperator& w);

// <psi|W|psi> / <psi|psi>.
cplx expect_mpo(const MatrixProductState& psi, const MatrixProductOperator& w);
// Exact W|psi>, bond dimension D * D_W.
MatrixProductState apply_mpo(const MatrixProductOperator& w, const MatrixProductState& psi);

struct ApplyResult {
  MatrixProductState state;
  double residual = 0.0;               // ||phi - W psi|| / ||W psi||
  std::vector<double> fidelity_trace;  // |<phi|W psi>|^2 / (||phi||^2 ||W psi||^2), per half-sweep
  std::size_t sweeps = 0;
  bool converged = false;
};

// Fixed-bond variational approximation of W|psi> starting from `guess`
// (bonds above spec.max_bond are compressed first). The returned state carries
// the norm of W|psi> unless spec.norm_policy is renormalize.
ApplyResult apply_mpo_variational(const MatrixProductOperator& w, const MatrixProductState& psi,
                                  const MatrixProductState& guess, const TruncationSpec& spec,
                                  std::size_t max_sweeps = 10, double tol = 1e-12);

}  // namespace tnet
