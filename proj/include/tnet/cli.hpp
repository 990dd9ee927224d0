#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace tnet::cli {

enum class Subcommand { dmrg, tebd, thermal, trg, oracle };

const char* subcommand_name(Subcommand s);
Subcommand parse_subcommand(const std::string& name);  // ConfigError("subcommand")

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalFailure = 3, kNotConverged = 4 };

// One point of a (possibly scanned) run configuration.
struct RunConfig {
  Subcommand subcommand = Subcommand::dmrg;
  std::size_t index = 0;
  nlohmann::ordered_json point;  // scanned values by dotted path, in scan order
  nlohmann::json config;         // fully resolved, scalar config
  std::uint64_t seed = 0;
  std::string hash;              // SHA-256 of the canonical config text
};

// Expands list-valued scan keys into their Cartesian product (the first key
// varies slowest) and validates every point. Throws ConfigError naming the
// offending key.
std::vector<RunConfig> expand_config(const nlohmann::json& doc, Subcommand sub);
std::vector<RunConfig> load_config(const std::filesystem::path& path, Subcommand sub);

// Dotted paths that accept a list of values.
const std::vector<std::string>& scan_keys();

struct Options {
  Subcommand subcommand = Subcommand::dmrg;
  std::filesystem::path config;
  std::filesystem::path out = "tnet-out";
  std::size_t threads = 1;
  std::optional<std::filesystem::path> checkpoint;
};

struct RunRecord {
  int status = kOk;
  nlohmann::ordered_json record;  // one line of results.jsonl
  std::vector<std::string> columns;
  std::vector<std::string> values;  // one row of data.tsv
  std::string series;               // per-run table, empty when none
  std::string summary;              // one line of summary.txt
};

// Runs one point; never throws, failures become records with nonzero status.
RunRecord run_point(const RunConfig& run, const std::optional<std::filesystem::path>& checkpoint);

// Loads, validates and runs every point on a bounded worker pool, then writes
// results.jsonl, data.tsv, summary.txt and run-<i>.tsv into `out`. Returns
// the exit status; config errors are reported as a JSON record on stderr and
// in out/error.json.
int run(const Options& opts);

std::string code_version();

}  // namespace tnet::cli
