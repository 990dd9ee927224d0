#pragma once

#include <cstdint>
#include <vector>

#include "tnet/models.hpp"
#include "tnet/tensor.hpp"

namespace tnet {

// Square-lattice tensor with labels ("u", "l", "d", "r"). A tensor's "r" leg
// joins the right neighbour's "l", its "d" leg the lower neighbour's "u".
struct CoarseGrainState {
  DenseTensor tensor;
  double log_norm_per_site = 0.0;   // ln of the scale factors, per original site
  std::uint64_t sites = 1;          // original sites one tensor stands for
  double truncation_error = 0.0;    // of the last step
};

// Ising weights split symmetrically onto bonds: T = sum_s W_su W_sl W_sd W_sr
// with W W = [[e^{bJ}, e^{-bJ}], [e^{-bJ}, e^{bJ}]].
CoarseGrainState build_plaquette_tensor(const ClassicalModelSpec& spec);

// Levin-Nave step: both diagonal SVD splits truncated to chi, recombined on the
// 45-degree rotated lattice, then rescaled by the largest entry.
CoarseGrainState trg_step(const CoarseGrainState& state, std::size_t chi);

enum class HotrgDirection { horizontal, vertical };

// Merges two neighbours along `direction` and projects the doubled transverse
// bonds with the isometry of the side (up/down, or left/right) whose density
// matrix truncates less.
CoarseGrainState hotrg_step(const CoarseGrainState& state, std::size_t chi, HotrgDirection direction);

// sum_{a,b} T(a, b, a, b): the network of a single tensor on a 1 x 1 torus.
cplx torus_trace(const DenseTensor& t);
// ln Z per original site with the remaining lattice closed as a 1 x 1 torus.
double log_z_per_site(const CoarseGrainState& state);

enum class CoarseGrainMethod { trg, hotrg };

struct FreeEnergyResult {
  double free_energy = 0.0;                  // f per site
  double log_z_per_site = 0.0;
  std::vector<double> trace;                 // f after every iteration
  std::vector<double> truncation_errors;     // per iteration
  std::size_t iterations = 0;
};

// `iterations` coarse-graining steps (HOTRG alternates horizontal, vertical).
FreeEnergyResult free_energy(const ClassicalModelSpec& spec, CoarseGrainMethod method, std::size_t chi,
                             std::size_t iterations);

}  // namespace tnet
