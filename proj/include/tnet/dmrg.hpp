#pragma once

#include <cstdint>
#include <vector>

#include "tnet/lanczos.hpp"
#include "tnet/mpo.hpp"

namespace tnet {

struct DmrgConfig {
  std::size_t max_bond = 32;
  std::size_t sweeps = 50;
  double energy_tol = 1e-10;  // absolute change per full sweep
  LanczosConfig eigensolver;
  // Density-matrix perturbation amplitude for the first sweep; halved after
  // every sweep. Zero disables it (and keeps the sweep energies monotone).
  double noise = 0.0;
  // Weight of the projector onto lower states in excited_state. Zero selects
  // 4 max(1, |E_i|) from the lower states' energies.
  double ortho_penalty = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SweepTrace {
  double initial_energy = 0.0;
  std::vector<double> energies;  // objective after every half-sweep
  double energy = 0.0;           // <H> of the returned state
  std::size_t sweeps = 0;
  bool converged = false;
  std::vector<std::size_t> bond_dims;
  std::size_t unconverged_solves = 0;  // local solves still above tolerance after the retry
  double max_residual = 0.0;           // worst local residual in the last sweep
  std::vector<double> overlaps;        // |<psi|psi_i>| against lower states
  bool orthogonal = true;
};

struct DmrgResult {
  double energy = 0.0;
  MatrixProductState state;
  SweepTrace trace;
};

// Random normalized state with bond min(cfg.max_bond, Hilbert bound) from cfg.seed.
MatrixProductState dmrg_initial_state(const std::vector<std::size_t>& phys_dims, const DmrgConfig& cfg);

// Single-site sweeps in mixed-canonical gauge. Bonds of `init` smaller than
// min(cfg.max_bond, Hilbert bound) are zero-padded first so the local solves
// can populate them; larger bonds are compressed.
DmrgResult ground_state(const MatrixProductOperator& w, const MatrixProductState& init, const DmrgConfig& cfg);

// Lowest state of H + w sum_i |psi_i><psi_i|.
DmrgResult excited_state(const MatrixProductOperator& w, const std::vector<MatrixProductState>& lower,
                         const MatrixProductState& init, const DmrgConfig& cfg);

}  // namespace tnet
