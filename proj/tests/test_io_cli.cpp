#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "wavecollapse/cli.hpp"
#include "wavecollapse/errors.hpp"
#include "wavecollapse/io.hpp"

using namespace wavecollapse;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            (std::string("wavecollapse_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  fs::path path_;
};

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "wavecollapse");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(Json, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Json, WriterProducesValidJson) {
  JsonWriter w;
  w.begin_object();
  w.field("name", "quote \" back\\slash\nline");
  w.field("n", std::int64_t{-3});
  w.field("seed", std::uint64_t{18446744073709551615ULL});
  w.field("x", 0.1);
  w.field("nan", std::numeric_limits<double>::quiet_NaN());
  w.field("ok", true);
  w.key("list").begin_array();
  w.value(1).value(2.5).begin_object().field("a", 1).end_object();
  w.end_array();
  w.key("empty").begin_array().end_array();
  w.key("timing").begin_object(true).field("t1", 0.5).field("t2", 1.5).end_object();
  w.end_object();
  const std::string text = w.str();
  ASSERT_EQ(text.back(), '\n');
  const json j = json::parse(text);
  EXPECT_EQ(j["name"], "quote \" back\\slash\nline");
  EXPECT_EQ(j["n"], -3);
  EXPECT_EQ(j["seed"].get<std::uint64_t>(), 18446744073709551615ULL);
  EXPECT_EQ(j["x"].get<double>(), 0.1);
  EXPECT_TRUE(j["nan"].is_null());
  EXPECT_EQ(j["ok"], true);
  EXPECT_EQ(j["list"].size(), 3u);
  EXPECT_EQ(j["list"][2]["a"], 1);
  EXPECT_TRUE(j["empty"].empty());
  EXPECT_NE(text.find(R"("timing": {"t1": 0.5, "t2": 1.5})"), std::string::npos) << text;
}

TEST(Json, KeyOrderIsStable) {
  JsonWriter w;
  w.begin_object().field("z", 1).field("a", 2).end_object();
  const std::string text = w.str();
  EXPECT_LT(text.find("\"z\""), text.find("\"a\""));
}

TEST(Json, ValueWithoutKeyRejected) {
  JsonWriter w;
  w.begin_object();
  EXPECT_THROW(w.value(1), Error);
}

TEST(WavefunctionCsv, RoundTrip) {
  const Grid g(-1.0, 1.0, 257);
  const Wavefunction psi = init_random_superposition(g, 4, 0.5);
  std::stringstream ss;
  write_wavefunction_csv(ss, psi);
  const Wavefunction back = read_wavefunction_csv(ss, 0.5);
  ASSERT_EQ(back.size(), psi.size());
  EXPECT_EQ(back.grid().x_min(), -1.0);
  EXPECT_EQ(back.grid().x_max(), 1.0);
  EXPECT_EQ(back.hbar(), 0.5);
  for (std::size_t i = 0; i < psi.size(); ++i) ASSERT_EQ(back[i], psi[i]);
}

TEST(WavefunctionCsv, RejectsBadInput) {
  std::stringstream bad_header("x,real,imag\n0,1,0\n");
  EXPECT_EQ(code_of([&] { read_wavefunction_csv(bad_header); }), ErrorCode::kIo);
  std::stringstream bad_number("x,re,im\n0,1,zero\n");
  EXPECT_EQ(code_of([&] { read_wavefunction_csv(bad_number); }), ErrorCode::kIo);
  std::string rows = "x,re,im\n";
  for (int i = 0; i < 20; ++i) rows += std::to_string(i * i) + ",1,0\n";
  std::stringstream uneven(rows);
  EXPECT_EQ(code_of([&] { read_wavefunction_csv(uneven); }), ErrorCode::kIo);
}

TEST(Reports, TrajectoryJson) {
  const Wavefunction psi0 = init_gaussian(Grid(-kPi / 8, kPi / 8, 1025), 0.0, 0.02, 0.0);
  const TrajectoryRecord rec = run_trajectory(psi0, 40, 1.0, 12);
  const json j = json::parse(trajectory_json(rec));
  EXPECT_EQ(j["seed"].get<std::uint64_t>(), 12u);
  EXPECT_EQ(j["N"], 40);
  EXPECT_EQ(j["n_a"].get<std::int64_t>() + j["n_b"].get<std::int64_t>(), 40);
  EXPECT_EQ(j["outcomes"], rec.outcome_string());
  EXPECT_EQ(j["x_est"].get<double>(), rec.x_est);
  EXPECT_EQ(j["log_prob"].get<double>(), rec.log_prob);
  EXPECT_FALSE(j["tuning_violated"].get<bool>());
}

TEST(Reports, EnsembleJsonAndHistogram) {
  SimConfig c;
  c.grid_points = 1025;
  c.n_photons = 400;
  c.trajectories = 50;
  const EnsembleStats stats = run_ensemble(c);
  const json j = json::parse(ensemble_json(stats, &c));
  EXPECT_EQ(j["config"]["n_photons"], 400);
  EXPECT_EQ(j["config"]["psi0"], "gaussian");
  ASSERT_TRUE(j["comparisons"].is_array());
  EXPECT_FALSE(j["comparisons"].empty());
  for (const auto& row : j["comparisons"]) {
    EXPECT_TRUE(row.contains("name"));
    EXPECT_TRUE(row.contains("passed"));
  }
  EXPECT_EQ(j["passed"].get<bool>(), all_passed(stats.comparisons));

  std::istringstream csv(histogram_csv(stats));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "bin_center,count,predicted_probability");
  std::int64_t total = 0;
  double p_total = 0.0;
  while (std::getline(csv, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    total += std::stoll(line.substr(c1 + 1, c2 - c1 - 1));
    p_total += std::stod(line.substr(c2 + 1));
  }
  EXPECT_EQ(total, 50);
  EXPECT_NEAR(p_total, 1.0, 1e-9);
}

TEST(Reports, OperatorsCsv) {
  const std::string text = operators_csv(Grid(-kPi / 8, kPi / 8, 17), 1.0);
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "x,abs2_m_a,abs2_m_b,arg_m_a,arg_m_b");
  int rows = 0;
  bool saw_centre = false;
  while (std::getline(is, line)) {
    ++rows;
    if (line.rfind("0,", 0) == 0) {
      saw_centre = true;
      EXPECT_EQ(line, "0,0.5,0.5,0.78539816339744828,0.78539816339744828");
    }
  }
  EXPECT_EQ(rows, 17);
  EXPECT_TRUE(saw_centre);
}

TEST(Settings, Parse) {
  const Settings s = parse_settings("# comment\nk = 2  # trailing\n\nn_photons=50\n  psi0 = two-lobe\n");
  EXPECT_EQ(s.at("k"), "2");
  EXPECT_EQ(s.at("n-photons"), "50");
  EXPECT_EQ(s.at("psi0"), "two-lobe");
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(code_of([] { parse_settings("k 2\n"); }), ErrorCode::kInvalidConfig);
}

TEST(Settings, MissingValueNamesKey) {
  try {
    config_from_settings(parse_settings("k =\n"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
    EXPECT_NE(std::string(e.what()).find("k: missing value"), std::string::npos) << e.what();
  }
}

TEST(Settings, UnknownKey) {
  EXPECT_EQ(code_of([] { config_from_settings({{"colour", "blue"}}); }),
            ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { config_from_settings({{"k", "one"}}); }), ErrorCode::kInvalidConfig);
}

TEST(Settings, Defaults) {
  const SimConfig c = config_from_settings({});
  EXPECT_EQ(c.k, 1.0);
  EXPECT_EQ(c.n_photons, 10000);
  EXPECT_EQ(c.grid_points, 4097u);
  EXPECT_EQ(c.x_max, kPi / 8);
  EXPECT_EQ(c.sigma0, 0.02);
  EXPECT_EQ(c.trajectories, 1000);
  EXPECT_EQ(c.seed, 42u);
}

TEST(Settings, TwoLobeDefaultsThenOverrides) {
  const SimConfig lobes = config_from_settings({{"psi0", "two-lobe"}});
  EXPECT_EQ(lobes.x0, 0.03);
  EXPECT_EQ(lobes.sigma0, 0.005);
  const SimConfig custom = config_from_settings({{"psi0", "two-lobe"}, {"sigma0", "0.004"}});
  EXPECT_EQ(custom.sigma0, 0.004);
  EXPECT_EQ(custom.x0, 0.03);
}

TEST(Settings, SymmetricBoundAndBranch) {
  const SimConfig c = config_from_settings({{"x-max", "0.5"}});
  EXPECT_EQ(c.x_min, -0.5);
  EXPECT_EQ(code_of([] { config_from_settings({{"x-max", "1.0"}}); }),
            ErrorCode::kBranchViolation);
}

TEST(Cli, SingleRunIsReproducible) {
  TempDir a;
  TempDir b_dir;
  const fs::path b = b_dir.path() / "second";
  const std::vector<std::string> common = {"--mode", "single", "--n-photons", "500",
                                           "--grid-points", "1025"};
  auto args_a = common;
  args_a.insert(args_a.end(), {"--out-dir", a.str()});
  auto args_b = common;
  args_b.insert(args_b.end(), {"--out-dir", b.string()});
  const CliResult ra = cli(args_a);
  const CliResult rb = cli(args_b);
  ASSERT_EQ(ra.code, kExitOk) << ra.err;
  ASSERT_EQ(rb.code, kExitOk) << rb.err;
  EXPECT_EQ(slurp(a.path() / "trajectory.json"), slurp(b / "trajectory.json"));
  EXPECT_EQ(slurp(a.path() / "final_state.csv"), slurp(b / "final_state.csv"));
  const json j = json::parse(slurp(a.path() / "trajectory.json"));
  EXPECT_EQ(j["N"], 500);
}

TEST(Cli, FlagsOverrideConfigFile) {
  TempDir dir;
  const fs::path cfg = dir.path() / "run.cfg";
  write_text_file(cfg.string(), "mode = single\nn_photons = 300\ngrid_points = 1025\nseed = 7\n");
  const CliResult r = cli({"--config", cfg.string(), "--n-photons", "200", "--out-dir", dir.str()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json j = json::parse(slurp(dir.path() / "trajectory.json"));
  EXPECT_EQ(j["N"], 200);
}

TEST(Cli, EnsembleIndependentOfThreads) {
  TempDir one;
  TempDir three;
  const std::vector<std::string> common = {"--mode", "ensemble", "--n-photons", "400",
                                           "--trajectories", "40", "--grid-points", "1025"};
  auto a = common;
  a.insert(a.end(), {"--threads", "1", "--out-dir", one.str()});
  auto b = common;
  b.insert(b.end(), {"--threads", "3", "--out-dir", three.str()});
  ASSERT_EQ(cli(a).code, kExitOk);
  ASSERT_EQ(cli(b).code, kExitOk);
  EXPECT_EQ(slurp(one.path() / "ensemble.json"), slurp(three.path() / "ensemble.json"));
  EXPECT_EQ(slurp(one.path() / "histogram.csv"), slurp(three.path() / "histogram.csv"));
}

TEST(Cli, DumpOperators) {
  TempDir dir;
  const CliResult r = cli({"--mode", "dump-operators", "--out-dir", dir.str()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string text = slurp(dir.path() / "operators.csv");
  EXPECT_NE(text.find("\n0,0.5,0.5,"), std::string::npos);
}

TEST(Cli, ErrorsAreJsonWithExitCodes) {
  TempDir dir;
  const CliResult missing = cli({"--k", "", "--out-dir", dir.str()});
  EXPECT_EQ(missing.code, kExitUsage);
  const json j = json::parse(missing.err);
  EXPECT_EQ(j["error"], "invalid-config");
  EXPECT_NE(j["message"].get<std::string>().find("k: missing value"), std::string::npos);

  EXPECT_EQ(cli({"--mode", "nonsense", "--out-dir", dir.str()}).code, kExitUsage);
  EXPECT_EQ(cli({"--x-max", "1.0", "--out-dir", dir.str()}).code, kExitUsage);
  EXPECT_EQ(cli({"--no-such-flag"}).code, kExitUsage);
  EXPECT_EQ(cli({"--config", (dir.path() / "absent.cfg").string()}).code, kExitRuntime);
}
