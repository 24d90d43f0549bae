#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spherecover/cli.hpp"

namespace fs = std::filesystem;
using spherecover::cli::run_cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "spherecover");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> rows;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#' && line.rfind("replication_index", 0) != 0) {
      rows.push_back(line);
    }
  }
  return rows;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("spherecover_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST(CliHelp, MatchesGolden) {
  const auto golden = fs::path(SPHERECOVER_GOLDEN_DIR) / "help.txt";
  ASSERT_TRUE(fs::exists(golden));
  EXPECT_EQ(spherecover::cli::help_text(), slurp(golden));
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, slurp(golden));
}

TEST_F(CliTest, SimulateSingleCap) {
  const auto r = run({"simulate", "--d", "2", "--N", "1", "--R", "10", "--output", path("v.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = slurp(path("v.csv"));
  EXPECT_EQ(text.rfind("# schema_version=1\nreplication_index,v_value,evaluator_kind,mc_points\n", 0),
            0u);
  const auto rows = data_lines(text);
  ASSERT_EQ(rows.size(), 10u);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k], std::to_string(k) + ",1,exact,0");
  }
}

TEST_F(CliTest, BoundsRate) {
  const auto r = run({"bounds", "--d", "3", "--N", "10000", "--c1", "0.5", "--C1", "1.5",
                      "--output", path("b.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(path("b.json")));
  EXPECT_EQ(j.at("schema_version"), 1);
  EXPECT_EQ(j.at("command"), "bounds");
  EXPECT_NEAR(j.at("results").at("rate_bound").get<double>(),
              72.0 * std::exp(1.5) * 0.5 * 64.0 / 100.0, 1e-10);
}

TEST_F(CliTest, CltWritesValuesAndReport) {
  const auto r = run({"clt", "--d", "2", "--N", "1000", "--R", "100000", "--seed", "7",
                      "--threads", "8", "--output", path("clt.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(data_lines(slurp(path("clt.csv"))).size(), 100000u);
  const auto j = nlohmann::json::parse(slurp(path("clt.csv.report.json")));
  const auto& clt = j.at("results").at("clt");
  EXPECT_GE(clt.at("empirical_dK").get<double>(), 0.0);
  EXPECT_NEAR(clt.at("dkw_radius").get<double>(), 0.004295, 1e-6);
  EXPECT_TRUE(clt.at("theoretical_bound").is_number());
}

TEST_F(CliTest, JsonValuesFormat) {
  const auto r = run({"simulate", "--d", "2", "--N", "5", "--R", "20", "--format", "json",
                      "--output", path("v.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(path("v.json")));
  EXPECT_EQ(j.at("values").size(), 20u);
}

TEST_F(CliTest, InvalidInputsExitWithOne) {
  EXPECT_EQ(run({"simulate", "--d", "1", "--N", "10"}).code, 1);
  EXPECT_EQ(run({"simulate", "--d", "3", "--N", "10", "--evaluator", "exact"}).code, 1);
  EXPECT_EQ(run({"simulate", "--bogus"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"simulate", "--N", "0"}).code, 1);
  const auto r = run({"simulate", "--N", "3", "--R", "2", "--output",
                      path("missing_dir/out.csv")});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(fs::exists(path("missing_dir")));
}

TEST_F(CliTest, ReplayReproducesAndDetectsTampering) {
  const auto r = run({"mean-variance", "--d", "3", "--N", "20", "--R", "200", "--M", "500",
                      "--threads", "3", "--report", path("mv.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ok = run({"--replay", path("mv.json")});
  EXPECT_EQ(ok.code, 0) << ok.err;

  auto j = nlohmann::json::parse(slurp(path("mv.json")));
  j["results"]["mean"] = 0.123;
  std::ofstream(path("bad.json")) << j.dump(2);
  EXPECT_EQ(run({"--replay", path("bad.json")}).code, 1);
  std::ofstream(path("garbage.json")) << "{not json";
  EXPECT_EQ(run({"--replay", path("garbage.json")}).code, 1);
}

TEST_F(CliTest, ThreadCountDoesNotChangeOutput) {
  std::vector<std::string> texts;
  for (const char* t : {"1", "4", "8"}) {
    const auto out = path(std::string("t") + t + ".csv");
    ASSERT_EQ(run({"simulate", "--d", "3", "--N", "50", "--R", "500", "--M", "1000",
                   "--seed", "123", "--threads", t, "--output", out})
                  .code,
              0);
    texts.push_back(slurp(out));
  }
  EXPECT_EQ(texts[0], texts[1]);
  EXPECT_EQ(texts[0], texts[2]);
}

TEST(CliConfig, ThreadsFromEnvironment) {
  spherecover::cli::RunConfig c;
  ::setenv("SPHERECOVER_THREADS", "3", 1);
  EXPECT_EQ(c.resolved_threads(), 3u);
  c.threads = 5;
  EXPECT_EQ(c.resolved_threads(), 5u);
  ::unsetenv("SPHERECOVER_THREADS");
}

TEST(CliConfig, JsonRoundTrip) {
  spherecover::cli::RunConfig c;
  c.d = 4;
  c.N = 77;
  c.seed = 99;
  c.evaluator = "mc";
  const auto back = spherecover::cli::RunConfig::from_json("simulate", c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.subcommand, "simulate");
}

TEST_F(CliTest, VerifyLemmasSmallBudget) {
  const auto r = run({"verify-lemmas", "--d", "2", "--N", "32", "--R", "2000",
                      "--lemma-trials", "500", "--delta-trials", "2000", "--pair-trials",
                      "20000", "--output", path("v.json")});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  const auto j = nlohmann::json::parse(slurp(path("v.json")));
  EXPECT_TRUE(j.at("results").at("all_passed").get<bool>());
}

TEST(AtomicWrite, LeavesNoTemporaryFiles) {
  const auto dir = fs::temp_directory_path() / ("spherecover_aw_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  spherecover::atomic_write(dir / "a.txt", "hello");
  spherecover::atomic_write(dir / "a.txt", "world");
  EXPECT_EQ(slurp(dir / "a.txt"), "world");
  EXPECT_EQ(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}), 1);
  fs::remove_all(dir);
}
