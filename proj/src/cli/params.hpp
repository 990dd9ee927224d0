#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tnet/cli.hpp"
#include "tnet/dmrg.hpp"
#include "tnet/models.hpp"
#include "tnet/tebd.hpp"
#include "tnet/trg.hpp"

namespace tnet::cli::detail {

struct DmrgParams {
  DmrgConfig config;
  std::size_t excited = 0;
};

struct TebdParams {
  double step = 0.01;
  int order = 2;
  double total_time = 1.0;
  EvolutionMode mode = EvolutionMode::real;
  TruncationSpec truncation;
  std::size_t sample_every = 1;
  double abort_weight = 1e-3;
  std::string initial = "up";
};

struct ThermalParams {
  double beta = 0.0;
  double step = 0.01;
  int order = 2;
  TruncationSpec truncation;
  double abort_weight = 1e-3;
};

struct TrgParams {
  CoarseGrainMethod method = CoarseGrainMethod::trg;
  std::size_t chi = 16;
  std::size_t iterations = 25;
};

// Typed view of one resolved config point. `target` is the computation the
// point describes; for the oracle subcommand it is inferred from the sections.
struct Params {
  Subcommand subcommand = Subcommand::dmrg;
  Subcommand target = Subcommand::dmrg;
  std::uint64_t seed = 0;
  std::optional<HamiltonianSpec> quantum;
  std::optional<ClassicalModelSpec> classical;
  DmrgParams dmrg;
  TebdParams tebd;
  ThermalParams thermal;
  TrgParams trg;
  std::vector<std::string> observables;
};

Params parse_params(const nlohmann::json& config, Subcommand sub);
MatrixXc observable_matrix(const std::string& name);

}  // namespace tnet::cli::detail
