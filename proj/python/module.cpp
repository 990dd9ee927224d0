#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tnet/checkpoint.hpp"
#include "tnet/cli.hpp"
#include "tnet/dmrg.hpp"
#include "tnet/errors.hpp"
#include "tnet/oracle.hpp"
#include "tnet/tebd.hpp"
#include "tnet/trg.hpp"

namespace py = pybind11;
using namespace tnet;

namespace {

TruncationSpec truncation(std::size_t max_bond, double cutoff) {
  TruncationSpec t;
  t.max_bond = max_bond;
  t.rel_cutoff = cutoff;
  t.validate();
  return t;
}

std::vector<LocalObservable> observables(const std::map<std::string, MatrixXc>& ops) {
  std::vector<LocalObservable> out;
  for (const auto& [name, op] : ops) out.push_back({name, op});
  return out;
}

py::dict trace_dict(const EvolutionTrace& tr, const std::vector<LocalObservable>& obs) {
  std::vector<double> times, energies, norms;
  std::map<std::string, std::vector<std::vector<double>>> local;
  for (const auto& s : tr.samples) {
    times.push_back(s.time);
    energies.push_back(s.energy.value_or(std::nan("")));
    norms.push_back(s.norm);
    for (std::size_t i = 0; i < obs.size(); ++i) {
      std::vector<double> row;
      for (const auto& v : s.local[i]) row.push_back(v.real());
      local[obs[i].name].push_back(row);
    }
  }
  py::dict d;
  d["times"] = times;
  d["energies"] = energies;
  d["norms"] = norms;
  d["observables"] = local;
  d["steps"] = tr.steps;
  d["discarded_weight"] = tr.discarded_weight;
  d["log_norm"] = tr.log_norm;
  d["aborted"] = tr.aborted;
  return d;
}

}  // namespace

PYBIND11_MODULE(_tnet, m) {
  m.doc() = "Matrix product states, DMRG, TEBD, purification and 2D Ising coarse-graining.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_IOError);

  py::class_<HamiltonianSpec>(m, "HamiltonianSpec")
      .def_readonly("n", &HamiltonianSpec::n)
      .def_readonly("j", &HamiltonianSpec::j)
      .def_readonly("h", &HamiltonianSpec::h)
      .def_readonly("delta", &HamiltonianSpec::delta)
      .def_readonly("field", &HamiltonianSpec::field)
      .def_property_readonly("phys_dim", &HamiltonianSpec::phys_dim)
      .def("__repr__", [](const HamiltonianSpec& s) {
        return "<HamiltonianSpec " + std::string(model_name(s.model)) + " n=" + std::to_string(s.n) + ">";
      });
  m.def("tfi", [](std::size_t n, double j, double h) {
    auto s = tfi(n, j, h);
    s.validate();
    return s;
  }, py::arg("n"), py::arg("j") = 1.0, py::arg("h") = 1.0, "Transverse-field Ising chain -J sum zz - h sum x.");
  m.def("xxz", [](std::size_t n, double j, double delta, double field) {
    auto s = xxz(n, j, delta, field);
    s.validate();
    return s;
  }, py::arg("n"), py::arg("j") = 1.0, py::arg("delta") = 1.0, py::arg("field") = 0.0);
  m.def("custom_chain", [](std::size_t n, const MatrixXc& two_site, const std::optional<MatrixXc>& one_site) {
    HamiltonianSpec s;
    s.model = ModelKind::custom_nn;
    s.n = n;
    s.two_site = two_site;
    if (one_site) s.one_site = *one_site;
    s.validate();
    return s;
  }, py::arg("n"), py::arg("two_site"), py::arg("one_site") = py::none());

  py::class_<MatrixProductState>(m, "MPS")
      .def_property_readonly("size", &MatrixProductState::size)
      .def_property_readonly("bond_dims", &MatrixProductState::bond_dims)
      .def_property_readonly("phys_dims", &MatrixProductState::phys_dims)
      .def_property_readonly("center", &MatrixProductState::center)
      .def("norm", [](const MatrixProductState& s) { return norm(s); })
      .def("to_dense", [](const MatrixProductState& s) { return to_dense(s); })
      .def("entropy", [](const MatrixProductState& s, std::size_t bond) { return entanglement_entropy(s, bond); },
           py::arg("bond"))
      .def("expect", [](const MatrixProductState& s, const MatrixXc& op, std::size_t site) {
        return expect_local(s, op, site);
      }, py::arg("op"), py::arg("site"))
      .def("correlator", [](const MatrixProductState& s, const MatrixXc& a, std::size_t i, const MatrixXc& b,
                            std::size_t j) { return correlator(s, a, i, b, j); })
      .def("energy", [](const MatrixProductState& s, const HamiltonianSpec& h) {
        return expect_mpo(s, build_mpo(h)).real();
      })
      .def("save", [](const MatrixProductState& s, const std::filesystem::path& p) { checkpoint_write(s, p); })
      .def("to_bytes", [](const MatrixProductState& s) { return py::bytes(checkpoint_bytes(s)); })
      .def_static("load", &checkpoint_read)
      .def_static("from_bytes", [](const py::bytes& b) { return checkpoint_parse(std::string(b)); });

  m.def("random_mps", &random_mps, py::arg("phys_dims"), py::arg("bond"), py::arg("seed"));
  m.def("product_state", &product_state, py::arg("local_vectors"));

  py::class_<DmrgConfig>(m, "DmrgConfig")
      .def(py::init([](std::size_t max_bond, std::size_t sweeps, double energy_tol, double noise, std::uint64_t seed) {
             DmrgConfig c;
             c.max_bond = max_bond;
             c.sweeps = sweeps;
             c.energy_tol = energy_tol;
             c.noise = noise;
             c.seed = seed;
             c.validate();
             return c;
           }),
           py::arg("max_bond") = 32, py::arg("sweeps") = 50, py::arg("energy_tol") = 1e-10, py::arg("noise") = 0.0,
           py::arg("seed") = 1)
      .def_readwrite("max_bond", &DmrgConfig::max_bond)
      .def_readwrite("sweeps", &DmrgConfig::sweeps)
      .def_readwrite("energy_tol", &DmrgConfig::energy_tol)
      .def_readwrite("noise", &DmrgConfig::noise)
      .def_readwrite("seed", &DmrgConfig::seed);

  m.def("dmrg", [](const HamiltonianSpec& h, const DmrgConfig& cfg, const std::optional<MatrixProductState>& init) {
    const auto w = build_mpo(h);
    const auto start = init ? *init : dmrg_initial_state(std::vector<std::size_t>(h.n, h.phys_dim()), cfg);
    DmrgResult r;
    {
      py::gil_scoped_release release;
      r = ground_state(w, start, cfg);
    }
    py::dict d;
    d["energy"] = r.energy;
    d["state"] = r.state;
    d["sweeps"] = r.trace.sweeps;
    d["converged"] = r.trace.converged;
    d["sweep_energies"] = r.trace.energies;
    return d;
  }, py::arg("spec"), py::arg("config") = DmrgConfig{}, py::arg("init") = py::none(),
     "Ground state by single-site DMRG; returns a dict with energy, state, sweeps, converged.");

  m.def("tebd", [](const HamiltonianSpec& h, const MatrixProductState& psi, double step, double total_time, int order,
                   bool imaginary, std::size_t max_bond, double cutoff, const std::map<std::string, MatrixXc>& ops,
                   std::size_t sample_every) {
    const auto scheme = build_trotter(h, step, order, imaginary ? EvolutionMode::imaginary : EvolutionMode::real);
    EvolutionOptions opts;
    opts.total_time = total_time;
    opts.truncation = truncation(max_bond, cutoff);
    opts.observables = observables(ops);
    opts.hamiltonian = build_mpo(h);
    opts.sample_every = sample_every;
    EvolutionResult r;
    {
      py::gil_scoped_release release;
      r = evolve(psi, scheme, opts);
    }
    auto d = trace_dict(r.trace, opts.observables);
    d["state"] = r.state;
    return d;
  }, py::arg("spec"), py::arg("psi"), py::arg("step"), py::arg("total_time"), py::arg("order") = 2,
     py::arg("imaginary") = false, py::arg("max_bond") = 64, py::arg("cutoff") = 1e-12,
     py::arg("observables") = std::map<std::string, MatrixXc>{}, py::arg("sample_every") = 1);

  m.def("thermal_state", [](const HamiltonianSpec& h, double beta, double step, std::size_t max_bond, double cutoff) {
    ThermalResult r;
    {
      py::gil_scoped_release release;
      r = thermal_state(h, beta, step, truncation(max_bond, cutoff));
    }
    py::dict d;
    d["beta"] = r.beta;
    d["log_z"] = r.log_z;
    d["energy"] = r.energy;
    d["steps"] = r.steps;
    d["state"] = r.state;
    return d;
  }, py::arg("spec"), py::arg("beta"), py::arg("step") = 0.01, py::arg("max_bond") = 64, py::arg("cutoff") = 1e-12);
  m.def("thermal_expect", &thermal_expect_local, py::arg("purified"), py::arg("op"), py::arg("site"));

  m.def("ising_free_energy", [](double beta, const std::string& method, std::size_t chi, std::size_t iterations, double j) {
    ClassicalModelSpec s;
    s.beta = beta;
    s.j = j;
    CoarseGrainMethod cm;
    if (method == "trg") {
      cm = CoarseGrainMethod::trg;
    } else if (method == "hotrg") {
      cm = CoarseGrainMethod::hotrg;
    } else {
      throw ConfigError("trg.method", "must be 'trg' or 'hotrg'");
    }
    FreeEnergyResult r;
    {
      py::gil_scoped_release release;
      r = free_energy(s, cm, chi, iterations);
    }
    py::dict d;
    d["free_energy"] = r.free_energy;
    d["log_z_per_site"] = r.log_z_per_site;
    d["trace"] = r.trace;
    d["truncation_errors"] = r.truncation_errors;
    return d;
  }, py::arg("beta"), py::arg("method") = "trg", py::arg("chi") = 16, py::arg("iterations") = 25, py::arg("j") = 1.0);

  auto o = m.def_submodule("oracle", "Exact reference computations.");
  o.def("ground_energy", [](const HamiltonianSpec& h) { return oracle::ed_ground(oracle::dense_hamiltonian(h)).energy; });
  o.def("hamiltonian", [](const HamiltonianSpec& h) { return oracle::dense_hamiltonian(h).matrix; });
  o.def("gibbs_energy", [](const HamiltonianSpec& h, double beta) {
    return oracle::dense_gibbs(oracle::dense_hamiltonian(h), beta).energy;
  });
  o.def("tfi_free_fermion_ground", &oracle::tfi_free_fermion_ground, py::arg("n"), py::arg("j"), py::arg("h"));
  o.def("onsager_f", &oracle::onsager_f, py::arg("beta"), py::arg("j") = 1.0);

  m.def("run", [](const std::string& subcommand, const std::filesystem::path& config, const std::filesystem::path& out,
                  std::size_t threads, const std::optional<std::filesystem::path>& checkpoint) {
    cli::Options opts{cli::parse_subcommand(subcommand), config, out, threads, checkpoint};
    py::gil_scoped_release release;
    return cli::run(opts);
  }, py::arg("subcommand"), py::arg("config"), py::arg("out"), py::arg("threads") = 1, py::arg("checkpoint") = py::none(),
     "Same as the command-line tool; returns its exit status.");

  m.attr("__version__") = cli::code_version();
}
