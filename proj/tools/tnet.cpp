#include <iostream>

#include "CLI11.hpp"
#include "tnet/cli.hpp"

int main(int argc, char** argv) {
  using namespace tnet::cli;
  CLI::App app{"Tensor network simulations: MPS ground states, time evolution, thermal states, 2D Ising coarse-graining"};
  app.require_subcommand(1, 1);

  Options opts;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"dmrg", "Ground state (and excited states) of a chain by DMRG"},
      {"tebd", "Real- or imaginary-time evolution of a chain"},
      {"thermal", "Finite-temperature state by purification"},
      {"trg", "2D Ising free energy by TRG or HOTRG"},
      {"oracle", "Exact reference values for the same config"},
  };
  for (const auto& [name, help] : commands) {
    auto* sc = app.add_subcommand(name, help);
    sc->add_option("--config", opts.config, "JSON run configuration")->required();
    sc->add_option("--out", opts.out, "Output directory")->capture_default_str();
    sc->add_option("--threads", opts.threads, "Worker threads for parameter scans")->capture_default_str();
    sc->add_option("--checkpoint", opts.checkpoint, "MPS checkpoint: warm start if present, written on completion");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }
  opts.subcommand = parse_subcommand(app.get_subcommands().front()->get_name());
  return run(opts);
}
