#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tnet/mpo.hpp"

namespace tnet {

enum class EvolutionMode { real, imaginary };

struct TrotterGate {
  std::size_t bond = 0;  // acts on sites (bond, bond + 1)
  MatrixXc gate;         // (o1 o2) x (i1 i2), row-major pair index
};

struct TrotterScheme {
  double step = 0.0;
  int order = 2;
  EvolutionMode mode = EvolutionMode::real;
  std::size_t sites = 0;
  std::vector<TrotterGate> gates;  // one full step, in application order
};

// Gates exp(-i dt h_b) or exp(-dt h_b) from bond_terms(spec). Order 1 applies
// even bonds then odd bonds with dt = step; order 2 applies even (step/2),
// odd (step), even (step/2).
TrotterScheme build_trotter(const HamiltonianSpec& spec, double step, int order, EvolutionMode mode);

// The same scheme acting on the system factor of a purified chain with local
// space (system) x (ancilla).
TrotterScheme lift_to_purification(const TrotterScheme& scheme, std::size_t d_anc);

struct GateResult {
  MatrixProductState state;  // center at bond + 1
  TruncationReport report;
};

GateResult apply_gate(const MatrixProductState& psi, std::size_t bond, const MatrixXc& gate,
                      const TruncationSpec& spec = {});

struct LocalObservable {
  std::string name;
  MatrixXc op;  // measured on every site
};

struct EvolutionOptions {
  double total_time = 0.0;
  TruncationSpec truncation;
  std::vector<LocalObservable> observables;
  std::optional<MatrixProductOperator> hamiltonian;  // energy samples when set
  std::size_t sample_every = 1;                      // in steps; t = 0 and the final step always sampled
  bool entropies = true;
  double abort_weight = 1e-3;  // per-step discarded weight that stops the run
};

struct EvolutionSample {
  double time = 0.0;
  std::vector<std::vector<cplx>> local;  // [observable][site]
  std::optional<double> energy;
  std::vector<double> entropies;  // per bond
  double norm = 1.0;
  double log_norm = 0.0;          // accumulated ln of the imaginary-time norm factors
  double discarded_weight = 0.0;  // cumulative
};

struct EvolutionTrace {
  std::vector<EvolutionSample> samples;
  std::size_t steps = 0;
  double discarded_weight = 0.0;
  double max_step_weight = 0.0;
  double log_norm = 0.0;
  bool aborted = false;
};

struct EvolutionResult {
  MatrixProductState state;
  EvolutionTrace trace;
};

// ceil(total_time / step) steps. Imaginary mode renormalizes after every step.
// A step whose summed discarded weight exceeds abort_weight ends the run with
// trace.aborted set; the state is the last one before that step.
EvolutionResult evolve(const MatrixProductState& psi, const TrotterScheme& scheme, const EvolutionOptions& opts);

struct ImaginaryStage {
  double step = 0.0;
  double duration = 0.0;
};

std::vector<ImaginaryStage> default_imaginary_schedule();

// Imaginary-time projection through a sequence of decreasing steps.
EvolutionResult imaginary_ground_state(const HamiltonianSpec& spec, const MatrixProductState& init,
                                       const std::vector<ImaginaryStage>& schedule, const TruncationSpec& spec_trunc,
                                       int order = 2);

struct ThermalResult {
  MatrixProductState state;  // site dimension d * d, system index major
  double beta = 0.0;
  double log_z = 0.0;
  double energy = 0.0;
  std::size_t steps = 0;
  double discarded_weight = 0.0;
  bool aborted = false;
};

// Infinite-temperature pair state evolved by exp(-beta H / 2) on the system
// legs. The step is shrunk so that it divides beta / 2. ln Z counts from
// ln Z(0) = N ln d.
ThermalResult thermal_state(const HamiltonianSpec& spec, double beta, double step, const TruncationSpec& spec_trunc,
                            int order = 2, double abort_weight = 1e-3);

// Reduced system density matrix of one site of a purified chain.
MatrixXc thermal_site_density(const MatrixProductState& purified, std::size_t site, std::size_t d);
cplx thermal_expect_local(const MatrixProductState& purified, const MatrixXc& op, std::size_t site);

}  // namespace tnet
