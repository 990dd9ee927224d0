#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <openssl/sha.h>

#include "params.hpp"
#include "tnet/errors.hpp"
#include "tnet/mps.hpp"

namespace tnet::cli {

using nlohmann::json;

const char* subcommand_name(Subcommand s) {
  switch (s) {
    case Subcommand::dmrg: return "dmrg";
    case Subcommand::tebd: return "tebd";
    case Subcommand::thermal: return "thermal";
    case Subcommand::trg: return "trg";
    case Subcommand::oracle: return "oracle";
  }
  return "?";
}

Subcommand parse_subcommand(const std::string& name) {
  for (auto s : {Subcommand::dmrg, Subcommand::tebd, Subcommand::thermal, Subcommand::trg, Subcommand::oracle}) {
    if (name == subcommand_name(s)) return s;
  }
  throw ConfigError("subcommand", "unknown subcommand '" + name + "'");
}

const std::vector<std::string>& scan_keys() {
  static const std::vector<std::string> keys = {
      "seed",          "model.n",         "model.j",       "model.h",         "model.delta",
      "model.field",   "model.beta",      "dmrg.max_bond", "tebd.step",       "tebd.max_bond",
      "thermal.beta",  "thermal.step",    "thermal.max_bond", "trg.chi",      "trg.iterations"};
  return keys;
}

namespace detail {
namespace {

std::string join(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

void check_keys(const json& obj, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(section, "must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(join(section, key), "unknown key");
    }
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const json& obj, const std::string& section, const char* key, std::optional<double> fallback) {
  const auto* v = find(obj, key);
  if (!v) {
    if (!fallback) throw ConfigError(join(section, key), "required key is missing");
    return *fallback;
  }
  if (!v->is_number()) throw ConfigError(join(section, key), "must be a number");
  const double x = v->get<double>();
  if (!std::isfinite(x)) throw ConfigError(join(section, key), "must be finite");
  return x;
}

std::uint64_t integer(const json& obj, const std::string& section, const char* key, std::optional<std::uint64_t> fallback) {
  const auto* v = find(obj, key);
  if (!v) {
    if (!fallback) throw ConfigError(join(section, key), "required key is missing");
    return *fallback;
  }
  if (v->is_number_unsigned()) return v->get<std::uint64_t>();
  if (v->is_number_integer() && v->get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v->get<std::int64_t>());
  if (v->is_number_float()) {
    const double x = v->get<double>();
    if (x >= 0.0 && x == std::floor(x) && x < 1.8e19) return static_cast<std::uint64_t>(x);
  }
  throw ConfigError(join(section, key), "must be a non-negative integer");
}

std::string text(const json& obj, const std::string& section, const char* key, const std::string& fallback) {
  const auto* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) throw ConfigError(join(section, key), "must be a string");
  return v->get<std::string>();
}

MatrixXc matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty() || !v[0].is_array()) throw ConfigError(path, "must be a list of rows");
  const auto rows = static_cast<Eigen::Index>(v.size()), cols = static_cast<Eigen::Index>(v[0].size());
  MatrixXc m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError(path, "rows must have equal length");
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto& e = row[static_cast<std::size_t>(j)];
      if (e.is_number()) {
        m(i, j) = e.get<double>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(i, j) = cplx(e[0].get<double>(), e[1].get<double>());
      } else {
        throw ConfigError(path, "entries must be numbers or [re, im] pairs");
      }
    }
  }
  return m;
}

TruncationSpec truncation(const json& obj, const std::string& section, std::size_t default_bond) {
  TruncationSpec t;
  t.max_bond = integer(obj, section, "max_bond", default_bond);
  t.rel_cutoff = number(obj, section, "cutoff", 1e-12);
  if (t.max_bond < 1) throw ConfigError(section + ".max_bond", "must be at least 1");
  if (t.rel_cutoff < 0.0 || t.rel_cutoff >= 1.0) throw ConfigError(section + ".cutoff", "must be in [0, 1)");
  return t;
}

void parse_model(const json& doc, Params& p) {
  const auto* m = find(doc, "model");
  if (!m) throw ConfigError("model", "required section is missing");
  const auto type = text(*m, "model", "type", p.target == Subcommand::trg ? "ising2d" : "tfi");
  if (type == "ising2d") {
    check_keys(*m, "model", {"type", "beta", "j", "field"});
    ClassicalModelSpec c;
    c.beta = number(*m, "model", "beta", std::nullopt);
    c.j = number(*m, "model", "j", 1.0);
    c.field = number(*m, "model", "field", 0.0);
    c.validate();
    p.classical = c;
    return;
  }
  HamiltonianSpec h;
  if (type == "tfi" || type == "transverse_field_ising") {
    check_keys(*m, "model", {"type", "n", "j", "h"});
    h.model = ModelKind::transverse_field_ising;
    h.h = number(*m, "model", "h", std::nullopt);
  } else if (type == "xxz" || type == "heisenberg_xxz") {
    check_keys(*m, "model", {"type", "n", "j", "delta", "field"});
    h.model = ModelKind::heisenberg_xxz;
    h.delta = number(*m, "model", "delta", 1.0);
    h.field = number(*m, "model", "field", 0.0);
  } else if (type == "custom") {
    check_keys(*m, "model", {"type", "n", "two_site", "one_site"});
    h.model = ModelKind::custom_nn;
    const auto* two = find(*m, "two_site");
    if (!two) throw ConfigError("model.two_site", "required key is missing");
    h.two_site = matrix(*two, "model.two_site");
    if (const auto* one = find(*m, "one_site")) h.one_site = matrix(*one, "model.one_site");
  } else {
    throw ConfigError("model.type", "unknown model '" + type + "'");
  }
  h.n = integer(*m, "model", "n", std::nullopt);
  if (h.model != ModelKind::custom_nn) h.j = number(*m, "model", "j", 1.0);
  h.validate();
  p.quantum = h;
}

void parse_dmrg(const json& s, Params& p) {
  check_keys(s, "dmrg", {"max_bond", "sweeps", "energy_tol", "lanczos_max_iter", "lanczos_tol", "noise",
                         "ortho_penalty", "excited"});
  auto& c = p.dmrg.config;
  c.max_bond = integer(s, "dmrg", "max_bond", c.max_bond);
  c.sweeps = integer(s, "dmrg", "sweeps", c.sweeps);
  c.energy_tol = number(s, "dmrg", "energy_tol", c.energy_tol);
  c.eigensolver.max_iter = integer(s, "dmrg", "lanczos_max_iter", c.eigensolver.max_iter);
  c.eigensolver.tol = number(s, "dmrg", "lanczos_tol", c.eigensolver.tol);
  c.noise = number(s, "dmrg", "noise", c.noise);
  c.ortho_penalty = number(s, "dmrg", "ortho_penalty", c.ortho_penalty);
  c.seed = p.seed;
  c.validate();
  p.dmrg.excited = integer(s, "dmrg", "excited", 0);
  if (p.dmrg.excited > 16) throw ConfigError("dmrg.excited", "at most 16 excited states");
}

void parse_tebd(const json& s, Params& p) {
  check_keys(s, "tebd", {"step", "order", "total_time", "mode", "max_bond", "cutoff", "sample_every", "abort_weight",
                         "initial"});
  auto& t = p.tebd;
  t.step = number(s, "tebd", "step", t.step);
  t.order = static_cast<int>(integer(s, "tebd", "order", 2));
  t.total_time = number(s, "tebd", "total_time", t.total_time);
  const auto mode = text(s, "tebd", "mode", "real");
  if (mode == "real") {
    t.mode = EvolutionMode::real;
  } else if (mode == "imaginary") {
    t.mode = EvolutionMode::imaginary;
  } else {
    throw ConfigError("tebd.mode", "must be 'real' or 'imaginary'");
  }
  t.truncation = truncation(s, "tebd", 64);
  t.sample_every = integer(s, "tebd", "sample_every", 1);
  t.abort_weight = number(s, "tebd", "abort_weight", t.abort_weight);
  t.initial = text(s, "tebd", "initial", t.initial);
  if (!(t.step > 0.0)) throw ConfigError("tebd.step", "must be positive");
  if (t.order != 1 && t.order != 2) throw ConfigError("tebd.order", "must be 1 or 2");
  if (t.total_time < 0.0) throw ConfigError("tebd.total_time", "must be non-negative");
  if (t.sample_every < 1) throw ConfigError("tebd.sample_every", "must be at least 1");
  if (!(t.abort_weight > 0.0)) throw ConfigError("tebd.abort_weight", "must be positive");
  static const std::set<std::string> initial = {"up", "down", "plus", "minus", "neel", "random"};
  if (!initial.count(t.initial)) throw ConfigError("tebd.initial", "must be one of up, down, plus, minus, neel, random");
  if (t.initial != "random" && p.quantum && p.quantum->phys_dim() != 2) {
    throw ConfigError("tebd.initial", "named product states need a spin-1/2 chain");
  }
}

void parse_thermal(const json& s, Params& p) {
  check_keys(s, "thermal", {"beta", "step", "order", "max_bond", "cutoff", "abort_weight"});
  auto& t = p.thermal;
  t.beta = number(s, "thermal", "beta", std::nullopt);
  t.step = number(s, "thermal", "step", t.step);
  t.order = static_cast<int>(integer(s, "thermal", "order", 2));
  t.truncation = truncation(s, "thermal", 64);
  t.abort_weight = number(s, "thermal", "abort_weight", t.abort_weight);
  if (t.beta < 0.0) throw ConfigError("thermal.beta", "must be non-negative");
  if (!(t.step > 0.0)) throw ConfigError("thermal.step", "must be positive");
  if (t.order != 1 && t.order != 2) throw ConfigError("thermal.order", "must be 1 or 2");
  if (!(t.abort_weight > 0.0)) throw ConfigError("thermal.abort_weight", "must be positive");
}

void parse_trg(const json& s, Params& p) {
  check_keys(s, "trg", {"method", "chi", "iterations"});
  const auto method = text(s, "trg", "method", "trg");
  if (method == "trg") {
    p.trg.method = CoarseGrainMethod::trg;
  } else if (method == "hotrg") {
    p.trg.method = CoarseGrainMethod::hotrg;
  } else {
    throw ConfigError("trg.method", "must be 'trg' or 'hotrg'");
  }
  p.trg.chi = integer(s, "trg", "chi", p.trg.chi);
  p.trg.iterations = integer(s, "trg", "iterations", p.trg.iterations);
  if (p.trg.chi < 1 || p.trg.chi > 256) throw ConfigError("trg.chi", "must be in [1, 256]");
  if (p.trg.iterations < 1 || p.trg.iterations > 60) throw ConfigError("trg.iterations", "must be in [1, 60]");
}

Subcommand infer_target(const json& doc) {
  std::vector<Subcommand> found;
  for (auto s : {Subcommand::dmrg, Subcommand::tebd, Subcommand::thermal, Subcommand::trg}) {
    if (doc.contains(subcommand_name(s))) found.push_back(s);
  }
  if (found.size() > 1) throw ConfigError("oracle", "config names more than one computation section");
  if (found.size() == 1) return found[0];
  const auto* m = find(doc, "model");
  if (m && m->is_object() && m->value("type", "") == "ising2d") return Subcommand::trg;
  return Subcommand::dmrg;
}

}  // namespace

MatrixXc observable_matrix(const std::string& name) {
  if (name == "sx") return ops::sigma_x();
  if (name == "sy") return ops::sigma_y();
  if (name == "sz") return ops::sigma_z();
  throw ConfigError("observables", "unknown observable '" + name + "' (expected sx, sy or sz)");
}

Params parse_params(const json& doc, Subcommand sub) {
  if (!doc.is_object()) throw ConfigError("", "config must be an object");
  check_keys(doc, "", {"description", "seed", "model", "dmrg", "tebd", "thermal", "trg", "observables"});
  Params p;
  p.subcommand = sub;
  p.target = sub == Subcommand::oracle ? infer_target(doc) : sub;
  p.seed = integer(doc, "", "seed", std::nullopt);
  parse_model(doc, p);

  const bool classical = p.target == Subcommand::trg;
  if (classical && !p.classical) throw ConfigError("model.type", "trg needs the ising2d model");
  if (!classical && !p.quantum) throw ConfigError("model.type", std::string(subcommand_name(p.target)) + " needs a chain model");

  static const json empty = json::object();
  auto section = [&](const char* name) -> const json& {
    const auto* s = find(doc, name);
    return s ? *s : empty;
  };
  for (auto s : {Subcommand::dmrg, Subcommand::tebd, Subcommand::thermal, Subcommand::trg}) {
    if (s != p.target && doc.contains(subcommand_name(s))) {
      throw ConfigError(subcommand_name(s), std::string("section does not apply to ") + subcommand_name(p.target));
    }
  }
  switch (p.target) {
    case Subcommand::dmrg: parse_dmrg(section("dmrg"), p); break;
    case Subcommand::tebd: parse_tebd(section("tebd"), p); break;
    case Subcommand::thermal:
      if (!doc.contains("thermal")) throw ConfigError("thermal.beta", "required key is missing");
      parse_thermal(section("thermal"), p);
      break;
    case Subcommand::trg: parse_trg(section("trg"), p); break;
    case Subcommand::oracle: break;
  }

  if (const auto* obs = find(doc, "observables")) {
    if (!obs->is_array()) throw ConfigError("observables", "must be a list of names");
    for (const auto& o : *obs) {
      if (!o.is_string()) throw ConfigError("observables", "must be a list of names");
      observable_matrix(o.get<std::string>());
      p.observables.push_back(o.get<std::string>());
    }
    if (!p.observables.empty() && (classical || p.quantum->phys_dim() != 2)) {
      throw ConfigError("observables", "Pauli observables need a spin-1/2 chain");
    }
  }
  return p;
}

}  // namespace detail

namespace {

std::string sha256_hex(const std::string& s) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(s.data()), s.size(), digest);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char c : digest) {
    out.push_back(hex[c >> 4]);
    out.push_back(hex[c & 15]);
  }
  return out;
}

json::json_pointer pointer_of(const std::string& dotted) {
  std::string p = "/" + dotted;
  std::replace(p.begin(), p.end(), '.', '/');
  return json::json_pointer(p);
}

}  // namespace

std::vector<RunConfig> expand_config(const json& doc, Subcommand sub) {
  if (!doc.is_object()) throw ConfigError("", "config must be an object");
  struct Axis {
    std::string key;
    json values;
  };
  std::vector<Axis> axes;
  for (const auto& key : scan_keys()) {
    const auto ptr = pointer_of(key);
    if (!doc.contains(ptr)) continue;
    const auto& v = doc.at(ptr);
    if (!v.is_array()) continue;
    if (v.empty()) throw ConfigError(key, "scan list is empty");
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(key, "scan values must be numbers");
    }
    axes.push_back({key, v});
  }
  std::size_t total = 1;
  for (const auto& a : axes) {
    total *= a.values.size();
    if (total > 10000) throw ConfigError(a.key, "scan expands to more than 10000 runs");
  }

  std::vector<RunConfig> runs;
  runs.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    RunConfig r;
    r.subcommand = sub;
    r.index = i;
    r.config = doc;
    r.point = nlohmann::ordered_json::object();
    std::size_t rest = i;
    std::vector<std::size_t> digits(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      digits[k] = rest % axes[k].values.size();
      rest /= axes[k].values.size();
    }
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const auto& v = axes[k].values[digits[k]];
      r.config[pointer_of(axes[k].key)] = v;
      r.point[axes[k].key] = v;
    }
    const auto p = detail::parse_params(r.config, sub);
    r.seed = p.seed;
    r.hash = sha256_hex(std::string(subcommand_name(sub)) + "\n" + r.config.dump());
    runs.push_back(std::move(r));
  }
  return runs;
}

std::vector<RunConfig> load_config(const std::filesystem::path& path, Subcommand sub) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("not valid JSON: ") + e.what());
  }
  return expand_config(doc, sub);
}

}  // namespace tnet::cli
