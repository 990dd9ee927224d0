#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tnet/tensor.hpp"

namespace tnet {

// Open-boundary matrix product state. Site k holds a rank-3 tensor with labels
// ("l", "p", "r"); the outer bonds have extent 1. `center()` marks the
// orthogonality center when the chain is in mixed-canonical form: sites left
// of it are left isometries, sites right of it right isometries.
class MatrixProductState {
 public:
  MatrixProductState() = default;
  explicit MatrixProductState(std::vector<DenseTensor> sites,
                              std::optional<std::size_t> center = std::nullopt);

  std::size_t size() const noexcept { return sites_.size(); }
  const DenseTensor& site(std::size_t k) const { return sites_.at(k); }
  const std::vector<DenseTensor>& sites() const noexcept { return sites_; }
  std::optional<std::size_t> center() const noexcept { return center_; }

  std::size_t phys_dim(std::size_t k) const { return sites_.at(k).dims()[1]; }
  std::vector<std::size_t> phys_dims() const;
  // Extent of the bond between sites b and b+1, for b in [0, N-2].
  std::size_t bond_dim(std::size_t b) const { return sites_.at(b).dims()[2]; }
  std::vector<std::size_t> bond_dims() const;
  std::size_t max_bond() const;

  // In-place edits for algorithm drivers working on their own copy. Neighbor
  // bond extents are checked; the center marker is cleared unless reset.
  void set_site(std::size_t k, DenseTensor t);
  void set_pair(std::size_t k, DenseTensor left, DenseTensor right);
  void set_center(std::optional<std::size_t> c);

 private:
  static DenseTensor checked(DenseTensor t);
  void check_bond(std::size_t b) const;

  std::vector<DenseTensor> sites_;
  std::optional<std::size_t> center_;
};

struct SchmidtSpectrum {
  std::size_t bond = 0;
  std::vector<double> values;  // descending, unit 2-norm
};

MatrixProductState product_state(const std::vector<VectorXc>& local_vectors);
// Random state with bond dimension min(bond, local Hilbert space sizes), normal
// entries from a seeded generator, canonicalized at site 0 and normalized.
MatrixProductState random_mps(const std::vector<std::size_t>& phys_dims, std::size_t bond,
                              std::uint64_t seed);

// Full left/right QR sweeps around site c. The physical state is unchanged.
MatrixProductState canonicalize(const MatrixProductState& psi, std::size_t c);
// Like canonicalize, but only sweeps the range between the current center and c.
MatrixProductState move_center(const MatrixProductState& psi, std::size_t c);
MatrixProductState normalized(const MatrixProductState& psi);
MatrixProductState scaled(const MatrixProductState& psi, cplx factor);

// Inserts X X^{-1} on bond `bond`: site bond absorbs X, site bond+1 absorbs X^{-1}.
MatrixProductState gauge_transform(const MatrixProductState& psi, std::size_t bond, const MatrixXc& x);

cplx inner(const MatrixProductState& phi, const MatrixProductState& psi);  // <phi|psi>
double norm(const MatrixProductState& psi);

cplx expect_local(const MatrixProductState& psi, const MatrixXc& op, std::size_t site);
cplx correlator(const MatrixProductState& psi, const MatrixXc& op_a, std::size_t site_a,
                const MatrixXc& op_b, std::size_t site_b);

SchmidtSpectrum schmidt_spectrum(const MatrixProductState& psi, std::size_t bond);
double entropy(const SchmidtSpectrum& spectrum);  // -sum p ln p, p = lambda^2
double entanglement_entropy(const MatrixProductState& psi, std::size_t bond);

struct CompressResult {
  MatrixProductState state;
  double discarded_weight = 0.0;    // sum over bonds
  std::vector<double> bond_weights;  // per bond, index b = bond between b and b+1
};

CompressResult compress(const MatrixProductState& psi, const TruncationSpec& spec);

// Dense amplitude vector, site 0 most significant. Small chains only.
VectorXc to_dense(const MatrixProductState& psi);

namespace ops {
MatrixXc identity(std::size_t d);
MatrixXc sigma_x();
MatrixXc sigma_y();
MatrixXc sigma_z();
MatrixXc sigma_plus();   // |0><1|, raising with |0> = up
MatrixXc sigma_minus();
MatrixXc kron(const MatrixXc& a, const MatrixXc& b);
}  // namespace ops

}  // namespace tnet
