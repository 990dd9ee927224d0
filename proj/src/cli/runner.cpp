#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <thread>

#include "params.hpp"
#include "tnet/checkpoint.hpp"
#include "tnet/errors.hpp"
#include "tnet/oracle.hpp"

#ifndef TNET_VERSION
#define TNET_VERSION "unknown"
#endif

namespace tnet::cli {

using ojson = nlohmann::ordered_json;
using detail::Params;

std::string code_version() { return TNET_VERSION; }

namespace {

// Shortest text that reads back to the same double.
std::string num(double v) { return std::isfinite(v) ? ojson(v).dump() : (std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf")); }

std::string num(std::size_t v) { return std::to_string(v); }

struct Row {
  std::vector<std::string> columns, values;
  void add(std::string c, std::string v) {
    columns.push_back(std::move(c));
    values.push_back(std::move(v));
  }
};

std::vector<double> real_parts(const std::vector<cplx>& v) {
  std::vector<double> out;
  for (const auto& x : v) out.push_back(x.real());
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::vector<VectorXc> named_product(const std::string& name, std::size_t n, std::size_t d, std::uint64_t seed) {
  std::vector<VectorXc> out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const double r = 1.0 / std::sqrt(2.0);
  for (std::size_t k = 0; k < n; ++k) {
    VectorXc v = VectorXc::Zero(static_cast<Eigen::Index>(d));
    if (name == "random") {
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(g(rng), g(rng));
      v.normalize();
    } else if (name == "up") {
      v(0) = 1.0;
    } else if (name == "down") {
      v(1) = 1.0;
    } else if (name == "plus") {
      v << r, r;
    } else if (name == "minus") {
      v << r, -r;
    } else {
      v(static_cast<Eigen::Index>(k % 2)) = 1.0;
    }
    out.push_back(v);
  }
  return out;
}

std::optional<MatrixProductState> warm_start(const std::optional<std::filesystem::path>& path, const HamiltonianSpec& h) {
  if (!path || !std::filesystem::exists(*path)) return std::nullopt;
  auto psi = checkpoint_read(*path);
  if (psi.size() != h.n) throw ConfigError("checkpoint", "checkpoint chain length does not match model.n");
  for (auto d : psi.phys_dims()) {
    if (d != h.phys_dim()) throw ConfigError("checkpoint", "checkpoint site dimension does not match the model");
  }
  return psi;
}

ojson site_observables(const Params& p, const std::function<cplx(const MatrixXc&, std::size_t)>& measure) {
  ojson out = ojson::object();
  for (const auto& name : p.observables) {
    const auto op = detail::observable_matrix(name);
    std::vector<double> v;
    for (std::size_t k = 0; k < p.quantum->n; ++k) v.push_back(measure(op, k).real());
    out[name] = v;
  }
  return out;
}

void add_observable_means(Row& row, const ojson& obs) {
  for (const auto& [name, values] : obs.items()) row.add("mean_" + name, num(mean(values.get<std::vector<double>>())));
}

int run_dmrg(const Params& p, const std::optional<std::filesystem::path>& ckpt, ojson& res, Row& row) {
  const auto& h = *p.quantum;
  const auto w = build_mpo(h);
  const std::vector<std::size_t> phys(h.n, h.phys_dim());
  const auto& cfg = p.dmrg.config;
  const auto warm = warm_start(ckpt, h);
  const auto gs = ground_state(w, warm ? *warm : dmrg_initial_state(phys, cfg), cfg);
  bool converged = gs.trace.converged;

  std::vector<double> entropies;
  for (std::size_t b = 0; b + 1 < h.n; ++b) entropies.push_back(entanglement_entropy(gs.state, b));
  res["energy"] = gs.energy;
  res["energy_per_site"] = gs.energy / static_cast<double>(h.n);
  res["sweeps"] = gs.trace.sweeps;
  res["converged"] = gs.trace.converged;
  res["warm_start"] = warm.has_value();
  res["bond_dims"] = gs.state.bond_dims();
  res["entropies"] = entropies;
  res["sweep_energies"] = gs.trace.energies;
  res["unconverged_solves"] = gs.trace.unconverged_solves;
  res["observables"] = site_observables(p, [&](const MatrixXc& op, std::size_t k) { return expect_local(gs.state, op, k); });

  row.add("energy", num(gs.energy));
  row.add("sweeps", num(gs.trace.sweeps));
  row.add("converged", gs.trace.converged ? "1" : "0");
  row.add("max_bond", num(gs.state.max_bond()));
  row.add("entropy_mid", num(entropies[h.n / 2 - 1]));

  std::vector<MatrixProductState> lower{gs.state};
  ojson excited = ojson::array();
  for (std::size_t k = 1; k <= p.dmrg.excited; ++k) {
    auto c = cfg;
    c.seed = cfg.seed + k;
    const auto ex = excited_state(w, lower, dmrg_initial_state(phys, c), c);
    converged = converged && ex.trace.converged;
    excited.push_back({{"energy", ex.energy}, {"sweeps", ex.trace.sweeps}, {"converged", ex.trace.converged},
                       {"orthogonal", ex.trace.orthogonal}});
    row.add("energy_" + std::to_string(k), num(ex.energy));
    lower.push_back(ex.state);
  }
  if (p.dmrg.excited > 0) res["excited"] = excited;
  add_observable_means(row, res["observables"]);
  if (ckpt) checkpoint_write(gs.state, *ckpt);
  return converged ? kOk : kNotConverged;
}

int run_tebd(const Params& p, const std::optional<std::filesystem::path>& ckpt, ojson& res, Row& row,
             std::string& series) {
  const auto& h = *p.quantum;
  const auto& t = p.tebd;
  const auto scheme = build_trotter(h, t.step, t.order, t.mode);
  const auto warm = warm_start(ckpt, h);
  const auto init = warm ? *warm : product_state(named_product(t.initial, h.n, h.phys_dim(), p.seed));

  EvolutionOptions opts;
  opts.total_time = t.total_time;
  opts.truncation = t.truncation;
  opts.hamiltonian = build_mpo(h);
  opts.sample_every = t.sample_every;
  opts.abort_weight = t.abort_weight;
  for (const auto& name : p.observables) opts.observables.push_back({name, detail::observable_matrix(name)});
  const auto out = evolve(init, scheme, opts);
  const auto& tr = out.trace;
  const auto& last = tr.samples.back();

  std::string header = "time\tenergy\tnorm\tlog_norm\tdiscarded_weight\tentropy_mid";
  for (const auto& name : p.observables) {
    for (std::size_t k = 0; k < h.n; ++k) header += "\t" + name + "_" + std::to_string(k);
  }
  series = header + "\n";
  for (const auto& s : tr.samples) {
    series += num(s.time) + "\t" + num(s.energy.value_or(0.0)) + "\t" + num(s.norm) + "\t" + num(s.log_norm) + "\t" +
              num(s.discarded_weight) + "\t" + num(s.entropies.empty() ? 0.0 : s.entropies[h.n / 2 - 1]);
    for (const auto& site_values : s.local) {
      for (const auto& v : site_values) series += "\t" + num(v.real());
    }
    series += "\n";
  }

  res["time"] = last.time;
  res["steps"] = tr.steps;
  res["energy"] = last.energy.value_or(0.0);
  res["norm"] = last.norm;
  res["log_norm"] = tr.log_norm;
  res["discarded_weight"] = tr.discarded_weight;
  res["max_step_weight"] = tr.max_step_weight;
  res["aborted"] = tr.aborted;
  res["warm_start"] = warm.has_value();
  res["entropies"] = last.entropies;
  ojson obs = ojson::object();
  for (std::size_t i = 0; i < p.observables.size(); ++i) obs[p.observables[i]] = real_parts(last.local[i]);
  res["observables"] = obs;

  row.add("time", num(last.time));
  row.add("energy", num(last.energy.value_or(0.0)));
  row.add("norm", num(last.norm));
  row.add("discarded_weight", num(tr.discarded_weight));
  row.add("max_bond", num(out.state.max_bond()));
  add_observable_means(row, obs);
  if (ckpt) checkpoint_write(out.state, *ckpt);
  return tr.aborted ? kNumericalFailure : kOk;
}

int run_thermal(const Params& p, const std::optional<std::filesystem::path>& ckpt, ojson& res, Row& row) {
  const auto& h = *p.quantum;
  const auto& t = p.thermal;
  const auto th = thermal_state(h, t.beta, t.step, t.truncation, t.order, t.abort_weight);
  res["beta"] = th.beta;
  res["log_z"] = th.log_z;
  res["energy"] = th.energy;
  if (t.beta > 0.0) res["free_energy_per_site"] = -th.log_z / (t.beta * static_cast<double>(h.n));
  res["steps"] = th.steps;
  res["discarded_weight"] = th.discarded_weight;
  res["aborted"] = th.aborted;
  res["observables"] = site_observables(p, [&](const MatrixXc& op, std::size_t k) { return thermal_expect_local(th.state, op, k); });

  row.add("beta", num(t.beta));
  row.add("log_z", num(th.log_z));
  row.add("energy", num(th.energy));
  row.add("steps", num(th.steps));
  row.add("discarded_weight", num(th.discarded_weight));
  add_observable_means(row, res["observables"]);
  if (ckpt) checkpoint_write(th.state, *ckpt);
  return th.aborted ? kNumericalFailure : kOk;
}

int run_trg(const Params& p, ojson& res, Row& row, std::string& series) {
  const auto& c = *p.classical;
  const auto& t = p.trg;
  const auto fr = free_energy(c, t.method, t.chi, t.iterations);
  const double exact = oracle::onsager_f(c.beta, c.j);
  const double err = std::abs(fr.free_energy - exact);

  res["free_energy"] = fr.free_energy;
  res["log_z_per_site"] = fr.log_z_per_site;
  res["onsager"] = exact;
  res["abs_error"] = err;
  res["rel_error"] = err / std::abs(exact);
  res["trace"] = fr.trace;
  res["truncation_errors"] = fr.truncation_errors;

  row.add("beta", num(c.beta));
  row.add("chi", num(t.chi));
  row.add("iterations", num(fr.iterations));
  row.add("f", num(fr.free_energy));
  row.add("abs_error", num(err));
  row.add("rel_error", num(err / std::abs(exact)));

  series = "iteration\tf\ttruncation_error\n";
  for (std::size_t i = 0; i < fr.trace.size(); ++i) {
    series += num(i + 1) + "\t" + num(fr.trace[i]) + "\t" + num(fr.truncation_errors[i]) + "\n";
  }
  return std::isfinite(fr.free_energy) ? kOk : kNumericalFailure;
}

Eigen::VectorXcd kron_all(const std::vector<VectorXc>& v) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Ones(1);
  for (const auto& x : v) {
    Eigen::VectorXcd next(out.size() * x.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) next.segment(i * x.size(), x.size()) = out(i) * x;
    out = next;
  }
  return out;
}

int run_oracle(const Params& p, ojson& res, Row& row) {
  res["target"] = subcommand_name(p.target);
  if (p.target == Subcommand::trg) {
    const auto& c = *p.classical;
    const double f = oracle::onsager_f(c.beta, c.j);
    res["free_energy"] = f;
    res["log_z_per_site"] = -c.beta * f;
    row.add("beta", num(c.beta));
    row.add("f", num(f));
    return kOk;
  }
  const auto& h = *p.quantum;
  const auto d = h.phys_dim();
  double dim = 1.0;
  for (std::size_t k = 0; k < h.n; ++k) dim *= static_cast<double>(d);
  if (dim > static_cast<double>(oracle::kMaxDenseDim)) {
    if (p.target == Subcommand::dmrg && h.model == ModelKind::transverse_field_ising && p.dmrg.excited == 0) {
      const double e = oracle::tfi_free_fermion_ground(h.n, h.j, h.h);
      res["energy"] = e;
      res["method"] = "free_fermion";
      row.add("energy", num(e));
      return kOk;
    }
    throw ConfigError("model.n", "chain too large for the dense reference");
  }
  const auto dense = oracle::dense_hamiltonian(h);
  auto dense_obs = [&](const std::function<cplx(const MatrixXc&, std::size_t)>& f) {
    return site_observables(p, f);
  };

  switch (p.target) {
    case Subcommand::dmrg: {
      const auto spec = oracle::ed_spectrum(dense, p.dmrg.excited + 1);
      const Eigen::VectorXcd v = spec.vectors.col(0);
      res["energy"] = spec.values(0);
      res["method"] = "exact_diagonalization";
      if (h.model == ModelKind::transverse_field_ising) res["free_fermion_energy"] = oracle::tfi_free_fermion_ground(h.n, h.j, h.h);
      res["observables"] = dense_obs([&](const MatrixXc& op, std::size_t k) {
        return v.dot(oracle::embed(op, k, h.n, d) * v);
      });
      row.add("energy", num(spec.values(0)));
      for (std::size_t k = 1; k <= p.dmrg.excited; ++k) {
        res["excited"].push_back({{"energy", spec.values(static_cast<Eigen::Index>(k))}});
        row.add("energy_" + std::to_string(k), num(spec.values(static_cast<Eigen::Index>(k))));
      }
      add_observable_means(row, res["observables"]);
      return kOk;
    }
    case Subcommand::tebd: {
      const auto& t = p.tebd;
      Eigen::VectorXcd v;
      if (t.mode == EvolutionMode::real) {
        v = oracle::dense_evolve(dense, kron_all(named_product(t.initial, h.n, d, p.seed)), t.total_time);
        res["time"] = t.total_time;
      } else {
        v = oracle::ed_ground(dense).vector;
        res["time"] = "infinity";
      }
      const double e = v.dot(dense.matrix * v).real();
      res["energy"] = e;
      res["observables"] = dense_obs([&](const MatrixXc& op, std::size_t k) {
        return v.dot(oracle::embed(op, k, h.n, d) * v);
      });
      row.add("energy", num(e));
      add_observable_means(row, res["observables"]);
      return kOk;
    }
    case Subcommand::thermal: {
      const auto g = oracle::dense_gibbs(dense, p.thermal.beta);
      res["beta"] = p.thermal.beta;
      res["log_z"] = g.log_z;
      res["energy"] = g.energy;
      res["observables"] = dense_obs([&](const MatrixXc& op, std::size_t k) {
        return oracle::local_expectation(g.rho, op, k, h.n, d);
      });
      row.add("beta", num(p.thermal.beta));
      row.add("log_z", num(g.log_z));
      row.add("energy", num(g.energy));
      add_observable_means(row, res["observables"]);
      return kOk;
    }
    default: break;
  }
  return kOk;
}

const char* status_name(int s) {
  switch (s) {
    case kOk: return "ok";
    case kConfigError: return "config_error";
    case kNumericalFailure: return "numerical_failure";
    case kNotConverged: return "not_converged";
  }
  return "error";
}

ojson error_record(const std::string& kind, const std::string& field, const std::string& message) {
  ojson e = ojson::object();
  e["kind"] = kind;
  if (!field.empty()) e["field"] = field;
  e["message"] = message;
  return e;
}

std::optional<std::filesystem::path> per_run(const std::optional<std::filesystem::path>& base, std::size_t index,
                                             std::size_t count) {
  if (!base || count == 1) return base;
  auto p = *base;
  const auto ext = p.extension().string();
  p.replace_extension();
  p += "." + std::to_string(index) + ext;
  return p;
}

int worst(int a, int b) {
  auto rank = [](int s) {
    switch (s) {
      case kConfigError: return 3;
      case kNumericalFailure: return 2;
      case kNotConverged: return 1;
      default: return 0;
    }
  };
  return rank(a) >= rank(b) ? a : b;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

RunRecord run_point(const RunConfig& run, const std::optional<std::filesystem::path>& checkpoint) {
  RunRecord r;
  const auto start = std::chrono::steady_clock::now();
  ojson results = ojson::object();
  Row row;
  ojson error;
  try {
    const auto p = detail::parse_params(run.config, run.subcommand);
    switch (run.subcommand) {
      case Subcommand::dmrg: r.status = run_dmrg(p, checkpoint, results, row); break;
      case Subcommand::tebd: r.status = run_tebd(p, checkpoint, results, row, r.series); break;
      case Subcommand::thermal: r.status = run_thermal(p, checkpoint, results, row); break;
      case Subcommand::trg: r.status = run_trg(p, results, row, r.series); break;
      case Subcommand::oracle: r.status = run_oracle(p, results, row); break;
    }
  } catch (const ConfigError& e) {
    r.status = kConfigError;
    error = error_record("config", e.field(), e.what());
  } catch (const CheckpointError& e) {
    r.status = kConfigError;
    error = error_record("checkpoint", "checkpoint", e.what());
  } catch (const std::exception& e) {
    r.status = kNumericalFailure;
    error = error_record("numerical", "", e.what());
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  r.record["run"] = run.index;
  r.record["subcommand"] = subcommand_name(run.subcommand);
  r.record["params"] = run.point;
  r.record["seed"] = run.seed;
  r.record["config_hash"] = run.hash;
  r.record["code_version"] = code_version();
  r.record["wall_time_s"] = wall;
  r.record["status"] = status_name(r.status);
  if (error.is_null()) {
    r.record["results"] = results;
  } else {
    r.record["error"] = error;
  }
  r.columns = std::move(row.columns);
  r.values = std::move(row.values);

  std::string params;
  for (const auto& [k, v] : run.point.items()) params += " " + k + "=" + v.dump();
  char buf[96];
  std::snprintf(buf, sizeof buf, "  [%.2fs]", wall);
  r.summary = "run " + std::to_string(run.index) + params + ": " + status_name(r.status);
  if (results.contains("energy")) r.summary += " energy=" + num(results["energy"].get<double>());
  if (results.contains("free_energy")) r.summary += " f=" + num(results["free_energy"].get<double>());
  if (results.contains("rel_error")) r.summary += " rel_error=" + num(results["rel_error"].get<double>());
  if (results.contains("log_z")) r.summary += " log_z=" + num(results["log_z"].get<double>());
  if (!error.is_null()) r.summary += " (" + error["message"].get<std::string>() + ")";
  r.summary += buf;
  return r;
}

int run(const Options& opts) {
  std::vector<RunConfig> runs;
  auto fail = [&](const std::string& kind, const std::string& field, const std::string& message) {
    ojson rec = ojson::object();
    rec["status"] = "config_error";
    rec["error"] = error_record(kind, field, message);
    rec["code_version"] = code_version();
    std::cerr << rec.dump() << "\n";
    std::error_code ec;
    std::filesystem::create_directories(opts.out, ec);
    if (!ec) {
      std::ofstream(opts.out / "error.json") << rec.dump(2) << "\n";
    }
    return kConfigError;
  };
  try {
    if (opts.threads < 1) throw ConfigError("threads", "must be at least 1");
    runs = load_config(opts.config, opts.subcommand);
    if (opts.checkpoint && (opts.subcommand == Subcommand::trg || opts.subcommand == Subcommand::oracle)) {
      throw ConfigError("checkpoint", std::string(subcommand_name(opts.subcommand)) + " does not use checkpoints");
    }
    std::filesystem::create_directories(opts.out);
  } catch (const ConfigError& e) {
    return fail("config", e.field(), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("output", "out", e.what());
  }

  std::vector<RunRecord> records(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      records[i] = run_point(runs[i], per_run(opts.checkpoint, i, runs.size()));
      if (records[i].series.empty()) continue;
      try {
        write_file(opts.out / ("run-" + std::to_string(i) + ".tsv"), records[i].series);
      } catch (const std::exception& e) {
        records[i].status = kNumericalFailure;
        records[i].summary += " (" + std::string(e.what()) + ")";
      }
    }
  };
  const std::size_t workers = std::min(opts.threads, runs.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(worker);
  }

  std::vector<std::string> columns;
  for (const auto& r : records) {
    if (!r.columns.empty()) {
      columns = r.columns;
      break;
    }
  }
  std::string jsonl, tsv = "run\tstatus", summary;
  const auto& point_keys = runs.front().point;
  for (const auto& [k, v] : point_keys.items()) tsv += "\t" + k;
  for (const auto& c : columns) tsv += "\t" + c;
  tsv += "\n";
  int status = kOk;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = records[i];
    status = worst(status, r.status);
    jsonl += r.record.dump() + "\n";
    tsv += std::to_string(i) + "\t" + status_name(r.status);
    for (const auto& [k, v] : runs[i].point.items()) tsv += "\t" + v.dump();
    for (std::size_t c = 0; c < columns.size(); ++c) {
      tsv += "\t" + (r.columns.size() == columns.size() ? r.values[c] : std::string("NA"));
    }
    tsv += "\n";
    summary += r.summary + "\n";
  }
  summary = std::string("tnet ") + subcommand_name(opts.subcommand) + " " + code_version() + ": " +
            std::to_string(runs.size()) + " run(s), status " + status_name(status) + "\n" + summary;
  write_file(opts.out / "results.jsonl", jsonl);
  write_file(opts.out / "data.tsv", tsv);
  write_file(opts.out / "summary.txt", summary);
  return status;
}

}  // namespace tnet::cli
