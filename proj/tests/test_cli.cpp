#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "support/oracles.hpp"
#include "tnet/checkpoint.hpp"
#include "tnet/cli.hpp"
#include "tnet/errors.hpp"
#include "tnet/oracle.hpp"

using namespace tnet;
using namespace tnet::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = fs::temp_directory_path() / ("tnet-test-" + std::to_string(::getpid())) /
             (std::string(info->test_suite_name()) + "." + info->name()) / name;
  fs::remove_all(dir);
  fs::create_directories(dir.parent_path());
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const fs::path& dir, const json& doc) {
  fs::create_directories(dir);
  const auto path = dir / "config.json";
  std::ofstream(path) << doc.dump(2);
  return path;
}

std::vector<json> records(const fs::path& out) {
  std::vector<json> r;
  std::istringstream in(slurp(out / "results.jsonl"));
  for (std::string line; std::getline(in, line);) r.push_back(json::parse(line));
  return r;
}

MatrixProductState complex_state(std::uint64_t seed) {
  auto psi = random_mps({2, 3, 2, 2, 3}, 4, seed);
  // Make every entry genuinely complex.
  std::vector<DenseTensor> sites;
  for (const auto& t : psi.sites()) sites.push_back(t.scaled(cplx(0.6, 0.8)));
  return MatrixProductState(sites, psi.center());
}

json trg_config() {
  return {{"seed", 3}, {"model", {{"type", "ising2d"}, {"beta", {0.3, 0.5}}}},
          {"trg", {{"method", "hotrg"}, {"chi", 8}, {"iterations", 12}}}};
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
  for (std::uint64_t seed : {1u, 2u}) {
    const auto psi = complex_state(seed);
    const auto bytes = checkpoint_bytes(psi);
    const auto back = checkpoint_parse(bytes);
    EXPECT_EQ(checkpoint_bytes(back), bytes);
    ASSERT_EQ(back.size(), psi.size());
    EXPECT_EQ(back.center(), psi.center());
    for (std::size_t k = 0; k < psi.size(); ++k) {
      const auto a = psi.site(k).permuted({"l", "p", "r"});
      ASSERT_EQ(back.site(k).dims(), a.dims());
      for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(back.site(k).data()[i], a.data()[i]);
    }
  }
  MatrixProductState no_center(complex_state(3).sites());
  EXPECT_FALSE(checkpoint_parse(checkpoint_bytes(no_center)).center().has_value());
}

TEST(Checkpoint, LayoutIsLittleEndian) {
  const auto psi = product_state({VectorXc::Unit(2, 0), VectorXc::Unit(2, 1)});
  const auto b = checkpoint_bytes(psi);
  ASSERT_EQ(b.substr(0, 6), "TNMPS1");
  auto u64 = [&](std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[off + i])) << (8 * i);
    return v;
  };
  EXPECT_EQ(u64(6), 2u);
  EXPECT_EQ(u64(14), 1u);
  EXPECT_EQ(u64(22), 2u);
  EXPECT_EQ(u64(30), 1u);
  // First value of site 0 is 1 + 0i: IEEE bits of 1.0.
  EXPECT_EQ(u64(6 + 8 + 48), 0x3ff0000000000000ull);
  // magic + count + headers + 4 complex values + center + crc
  EXPECT_EQ(b.size(), 6u + 8u + 48u + 4u * 16u + 8u + 4u);
}

TEST(Checkpoint, CorruptionIsDetected) {
  const auto bytes = checkpoint_bytes(complex_state(4));
  EXPECT_THROW(checkpoint_parse(bytes.substr(0, bytes.size() - 1)), CheckpointError);
  EXPECT_THROW(checkpoint_parse(bytes.substr(0, bytes.size() / 2)), CheckpointError);
  EXPECT_THROW(checkpoint_parse(bytes.substr(0, 10)), CheckpointError);
  auto flipped = bytes;
  flipped[40] = static_cast<char>(flipped[40] ^ 0x10);
  EXPECT_THROW(checkpoint_parse(flipped), CheckpointError);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(checkpoint_parse(magic), CheckpointError);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto dir = scratch("ckpt");
  fs::create_directories(dir);
  const auto psi = complex_state(5);
  checkpoint_write(psi, dir / "psi.tnmps");
  EXPECT_EQ(slurp(dir / "psi.tnmps"), checkpoint_bytes(psi));
  EXPECT_EQ(checkpoint_bytes(checkpoint_read(dir / "psi.tnmps")), checkpoint_bytes(psi));
  EXPECT_THROW(checkpoint_read(dir / "missing.tnmps"), CheckpointError);
}

TEST(Config, ScanExpandsInKeyOrder) {
  json doc = {{"seed", 1}, {"model", {{"type", "tfi"}, {"n", 6}, {"h", {0.5, 1.0, 1.5}}, {"j", {1.0, 2.0}}}},
              {"dmrg", {{"max_bond", 8}}}};
  const auto runs = expand_config(doc, Subcommand::dmrg);
  ASSERT_EQ(runs.size(), 6u);
  // model.j precedes model.h in the scan order, so h varies fastest.
  EXPECT_EQ(runs[0].point.dump(), R"({"model.j":1.0,"model.h":0.5})");
  EXPECT_EQ(runs[1].point.dump(), R"({"model.j":1.0,"model.h":1.0})");
  EXPECT_EQ(runs[5].point.dump(), R"({"model.j":2.0,"model.h":1.5})");
  EXPECT_EQ(runs[4].config["model"]["h"], 1.0);
  EXPECT_NE(runs[0].hash, runs[1].hash);
  EXPECT_EQ(runs[0].hash, expand_config(doc, Subcommand::dmrg)[0].hash);
}

TEST(Config, ErrorsNameTheField) {
  auto field_of = [](const json& doc, Subcommand s) -> std::string {
    try {
      expand_config(doc, s);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return "";
  };
  const json tfi = {{"type", "tfi"}, {"n", 6}, {"h", 1.0}};
  EXPECT_EQ(field_of({{"model", tfi}}, Subcommand::dmrg), "seed");
  EXPECT_EQ(field_of({{"seed", 1}, {"model", {{"type", "ising2d"}}}}, Subcommand::trg), "model.beta");
  EXPECT_EQ(field_of({{"seed", 1}, {"model", {{"type", "tfi"}, {"n", 6}}}}, Subcommand::dmrg), "model.h");
  EXPECT_EQ(field_of({{"seed", 1}, {"model", tfi}, {"dmrg", {{"max_bond", 0}}}}, Subcommand::dmrg), "dmrg.max_bond");
  EXPECT_EQ(field_of({{"seed", 1}, {"model", tfi}, {"dmrg", {{"sweep", 3}}}}, Subcommand::dmrg), "dmrg.sweep");
  EXPECT_EQ(field_of({{"seed", 1}, {"model", tfi}, {"tebd", {{"step", -0.1}}}}, Subcommand::tebd), "tebd.step");
  EXPECT_EQ(field_of({{"seed", 1}, {"model", tfi}, {"tebd", {{"order", 3}}}}, Subcommand::tebd), "tebd.order");
  EXPECT_EQ(field_of({{"seed", 1}, {"model", tfi}}, Subcommand::thermal), "thermal.beta");
  EXPECT_EQ(field_of({{"seed", 1}, {"model", tfi}, {"thermal", {{"beta", -1.0}}}}, Subcommand::thermal), "thermal.beta");
  EXPECT_EQ(field_of({{"seed", 1}, {"model", {{"type", "ising2d"}, {"beta", 0.3}}}, {"trg", {{"chi", 0}}}}, Subcommand::trg),
            "trg.chi");
  EXPECT_EQ(field_of({{"seed", 1}, {"model", {{"type", "ising2d"}, {"beta", 0.3}}}, {"trg", {{"method", "srg"}}}},
                     Subcommand::trg),
            "trg.method");
  EXPECT_EQ(field_of({{"seed", 1}, {"model", tfi}, {"observables", {"sq"}}}, Subcommand::dmrg), "observables");
  EXPECT_EQ(field_of({{"seed", 1}, {"model", tfi}, {"trg", json::object()}}, Subcommand::dmrg), "trg");
  EXPECT_EQ(field_of({{"seed", 1}, {"model", {{"type", "tfi"}, {"n", 6}, {"h", json::array()}}}}, Subcommand::dmrg),
            "model.h");
  EXPECT_EQ(field_of({{"seed", "one"}, {"model", tfi}}, Subcommand::dmrg), "seed");
  EXPECT_EQ(field_of({{"seed", 1}, {"model", tfi}, {"color", 1}}, Subcommand::dmrg), "color");
}

TEST(Runner, DmrgMatchesBundledOracle) {
  const auto dir = scratch("dmrg");
  const auto cfg = write_config(dir, {{"seed", 1},
                                      {"model", {{"type", "tfi"}, {"n", 12}, {"j", 1.0}, {"h", 1.0}}},
                                      {"dmrg", {{"max_bond", 32}, {"energy_tol", 1e-12}}}});
  ASSERT_EQ(run({Subcommand::dmrg, cfg, dir / "run", 1, std::nullopt}), kOk);
  ASSERT_EQ(run({Subcommand::oracle, cfg, dir / "oracle", 1, std::nullopt}), kOk);
  const double e = records(dir / "run")[0]["results"]["energy"];
  const double ref = records(dir / "oracle")[0]["results"]["energy"];
  EXPECT_LT(std::abs(e - ref) / std::abs(ref), 1e-8);
  EXPECT_NEAR(ref, oracle::tfi_free_fermion_ground(12, 1.0, 1.0), 1e-9);
  for (const auto& f : {"results.jsonl", "data.tsv", "summary.txt"}) EXPECT_TRUE(fs::exists(dir / "run" / f));
  const auto rec = records(dir / "run")[0];
  EXPECT_EQ(rec["config_hash"].get<std::string>().size(), 64u);
  EXPECT_EQ(rec["code_version"], code_version());
  EXPECT_TRUE(rec["wall_time_s"].is_number());
}

TEST(Runner, WarmStartNeedsFewerSweeps) {
  const auto dir = scratch("warm");
  const auto cfg = write_config(dir, {{"seed", 1},
                                      {"model", {{"type", "tfi"}, {"n", 12}, {"h", 1.0}}},
                                      {"dmrg", {{"max_bond", 32}, {"energy_tol", 1e-10}}}});
  const auto ckpt = dir / "psi.tnmps";
  ASSERT_EQ(run({Subcommand::dmrg, cfg, dir / "cold", 1, ckpt}), kOk);
  ASSERT_TRUE(fs::exists(ckpt));
  ASSERT_EQ(run({Subcommand::dmrg, cfg, dir / "warm", 1, ckpt}), kOk);
  const auto cold = records(dir / "cold")[0]["results"], warm = records(dir / "warm")[0]["results"];
  EXPECT_FALSE(cold["warm_start"].get<bool>());
  EXPECT_TRUE(warm["warm_start"].get<bool>());
  EXPECT_LT(warm["sweeps"].get<int>(), cold["sweeps"].get<int>());
  EXPECT_NEAR(warm["energy"].get<double>(), cold["energy"].get<double>(), 1e-9);
}

TEST(Runner, CheckpointMismatchIsConfigError) {
  const auto dir = scratch("mismatch");
  fs::create_directories(dir);
  checkpoint_write(random_mps(std::vector<std::size_t>(5, 2), 4, 1), dir / "psi.tnmps");
  const auto cfg = write_config(dir, {{"seed", 1}, {"model", {{"type", "tfi"}, {"n", 6}, {"h", 1.0}}}});
  EXPECT_EQ(run({Subcommand::dmrg, cfg, dir / "out", 1, dir / "psi.tnmps"}), kConfigError);
  EXPECT_EQ(records(dir / "out")[0]["error"]["field"], "checkpoint");
}

TEST(Runner, TrgOutputIsDeterministic) {
  const auto dir = scratch("det");
  const auto cfg = write_config(dir, trg_config());
  ASSERT_EQ(run({Subcommand::trg, cfg, dir / "a", 1, std::nullopt}), kOk);
  ASSERT_EQ(run({Subcommand::trg, cfg, dir / "b", 2, std::nullopt}), kOk);
  EXPECT_EQ(slurp(dir / "a" / "data.tsv"), slurp(dir / "b" / "data.tsv"));
  EXPECT_EQ(slurp(dir / "a" / "run-1.tsv"), slurp(dir / "b" / "run-1.tsv"));
  auto strip = [](std::vector<json> r) {
    for (auto& x : r) x.erase("wall_time_s");
    return r;
  };
  EXPECT_EQ(strip(records(dir / "a")), strip(records(dir / "b")));
  const auto tsv = slurp(dir / "a" / "data.tsv");
  EXPECT_EQ(tsv.substr(0, tsv.find('\n')), "run\tstatus\tmodel.beta\tbeta\tchi\titerations\tf\tabs_error\trel_error");
}

TEST(Runner, MalformedConfigReportsField) {
  const auto dir = scratch("bad");
  const auto cfg = write_config(dir, {{"seed", 1}, {"model", {{"type", "ising2d"}}}, {"trg", {{"chi", 8}}}});
  EXPECT_EQ(run({Subcommand::trg, cfg, dir / "out", 1, std::nullopt}), kConfigError);
  const auto err = json::parse(slurp(dir / "out" / "error.json"));
  EXPECT_EQ(err["error"]["field"], "model.beta");
  EXPECT_FALSE(fs::exists(dir / "out" / "results.jsonl"));

  std::ofstream(dir / "broken.json") << "{\"seed\": 1, ";
  EXPECT_EQ(run({Subcommand::trg, dir / "broken.json", dir / "out2", 1, std::nullopt}), kConfigError);
  EXPECT_EQ(run({Subcommand::trg, dir / "absent.json", dir / "out3", 1, std::nullopt}), kConfigError);
}

TEST(Runner, NonConvergenceAndNumericalFailureExitCodes) {
  const auto dir = scratch("codes");
  const auto dmrg = write_config(dir / "d", {{"seed", 1},
                                             {"model", {{"type", "tfi"}, {"n", 10}, {"h", 1.0}}},
                                             {"dmrg", {{"max_bond", 16}, {"sweeps", 1}, {"energy_tol", 1e-14}}}});
  EXPECT_EQ(run({Subcommand::dmrg, dmrg, dir / "d" / "out", 1, std::nullopt}), kNotConverged);
  EXPECT_EQ(records(dir / "d" / "out")[0]["status"], "not_converged");

  const auto tebd = write_config(dir / "t", {{"seed", 1},
                                             {"model", {{"type", "tfi"}, {"n", 8}, {"h", 1.0}}},
                                             {"tebd", {{"step", 0.05}, {"total_time", 1.0}, {"max_bond", 1},
                                                       {"initial", "up"}, {"abort_weight", 1e-8}}}});
  EXPECT_EQ(run({Subcommand::tebd, tebd, dir / "t" / "out", 1, std::nullopt}), kNumericalFailure);
  EXPECT_TRUE(records(dir / "t" / "out")[0]["results"]["aborted"].get<bool>());
}

TEST(Runner, ThermalAndTebdAgreeWithOracle) {
  const auto dir = scratch("thermal");
  const auto th = write_config(dir / "th", {{"seed", 1},
                                            {"model", {{"type", "tfi"}, {"n", 6}, {"h", 1.0}}},
                                            {"thermal", {{"beta", 1.0}, {"step", 0.01}, {"max_bond", 32}}},
                                            {"observables", {"sx"}}});
  ASSERT_EQ(run({Subcommand::thermal, th, dir / "th" / "run", 1, std::nullopt}), kOk);
  ASSERT_EQ(run({Subcommand::oracle, th, dir / "th" / "oracle", 1, std::nullopt}), kOk);
  const auto a = records(dir / "th" / "run")[0]["results"], b = records(dir / "th" / "oracle")[0]["results"];
  EXPECT_LT(std::abs(a["energy"].get<double>() / b["energy"].get<double>() - 1.0), 1e-4);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(a["observables"]["sx"][k].get<double>(), b["observables"]["sx"][k].get<double>(), 1e-4);

  const auto te = write_config(dir / "te", {{"seed", 1},
                                            {"model", {{"type", "tfi"}, {"n", 6}, {"h", 1.0}}},
                                            {"tebd", {{"step", 0.005}, {"total_time", 1.0}, {"initial", "up"}}},
                                            {"observables", {"sz"}}});
  ASSERT_EQ(run({Subcommand::tebd, te, dir / "te" / "run", 1, std::nullopt}), kOk);
  ASSERT_EQ(run({Subcommand::oracle, te, dir / "te" / "oracle", 1, std::nullopt}), kOk);
  const auto c = records(dir / "te" / "run")[0]["results"], d = records(dir / "te" / "oracle")[0]["results"];
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(c["observables"]["sz"][k].get<double>(), d["observables"]["sz"][k].get<double>(), 1e-5);
  EXPECT_TRUE(fs::exists(dir / "te" / "run" / "run-0.tsv"));
}

TEST(Tool, ExitCodes) {
  const auto dir = scratch("tool");
  const auto good = write_config(dir / "g", trg_config());
  const auto bad = write_config(dir / "b", {{"seed", 1}, {"model", {{"type", "ising2d"}}}});
  auto code = [](const std::string& args) {
    const int raw = std::system((std::string(TNET_TOOL) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(code("trg --config " + good.string() + " --out " + (dir / "o1").string() + " --threads 2"), 0);
  EXPECT_TRUE(fs::exists(dir / "o1" / "data.tsv"));
  EXPECT_EQ(code("trg --config " + bad.string() + " --out " + (dir / "o2").string()), 2);
  EXPECT_EQ(code("trg --out " + (dir / "o3").string()), 2);
  EXPECT_EQ(code("frobnicate --config " + good.string()), 2);
  EXPECT_EQ(code("trg --config " + good.string() + " --threads 0 --out " + (dir / "o4").string()), 2);
  EXPECT_EQ(code("trg --config " + good.string() + " --checkpoint x --out " + (dir / "o5").string()), 2);
  EXPECT_EQ(code("--help"), 0);
}
