#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "rmwsnap/report.hpp"

namespace rmwsnap {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path kScenarios = RMWSNAP_SCENARIO_DIR;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string scenario(const char* name) { return (kScenarios / name).string(); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rmwsnap-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& leaf) const { return (dir_ / leaf).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }
  static void spit(const std::string& p, const std::string& text) { std::ofstream(p) << text; }

  fs::path dir_;
};

TEST_F(Cli, ExploreCleanScenario) {
  auto r = cli({"explore", scenario("n2_basic.yaml"), "--mode", "exhaustive", "--out", path("r.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  auto j = json::parse(slurp(path("r.json")));
  EXPECT_EQ(j["command"], "explore");
  EXPECT_TRUE(j["complete"].get<bool>());
  EXPECT_EQ(j["violations"], 0);
  EXPECT_TRUE(j["counterexamples"].empty());
  EXPECT_NE(r.out.find("complete=yes"), std::string::npos);
}

TEST_F(Cli, ExploreMutantEmbedsCounterexamples) {
  auto r = cli({"explore", scenario("mutant_drop_help.yaml"), "--out", path("r.json"), "--save-schedules",
                path("cx")});
  EXPECT_EQ(r.code, 1);
  auto j = json::parse(slurp(path("r.json")));
  ASSERT_FALSE(j["counterexamples"].empty());
  EXPECT_TRUE(j["counterexamples"][0].contains("schedule"));
  EXPECT_TRUE(fs::exists(path("cx/counterexample-1.json")));

  // both the report and the saved file replay to a violation
  EXPECT_EQ(cli({"replay", path("r.json")}).code, 1);
  EXPECT_EQ(cli({"replay", path("cx/counterexample-1.json")}).code, 1);
}

TEST_F(Cli, ThirdCollectMutantInvisibleWithTwoProcesses) {
  auto r = cli({"explore", scenario("n2_basic.yaml"), "--mutant", "drop-third-collect"});
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST_F(Cli, MissingScenarioFile) {
  auto r = cli({"explore", path("nope.yaml")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nope.yaml"), std::string::npos);
}

TEST_F(Cli, BadScenarioFieldNamesLineAndField) {
  spit(path("bad.yaml"), "version: 1\nname: bad\nmemory: [counter]\nprocesses:\n  - ops: [scan]\nexplore:\n  modes: random\n");
  auto r = cli({"explore", path("bad.yaml")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad.yaml:7"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("modes"), std::string::npos) << r.err;
}

TEST_F(Cli, UnknownFlagsAndValues) {
  EXPECT_EQ(cli({"explore", scenario("n2_basic.yaml"), "--frobnicate"}).code, 2);
  EXPECT_EQ(cli({"explore", scenario("n2_basic.yaml"), "--variant", "conc-xx"}).code, 2);
  EXPECT_EQ(cli({"explore", scenario("n2_basic.yaml"), "--mode", "sideways"}).code, 2);
  EXPECT_EQ(cli({"explore", scenario("n2_basic.yaml"), "--collect-order", "up"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
}

TEST_F(Cli, Stress) {
  auto r = cli({"stress", scenario("n8_mixed.yaml"), "--ops", "2000", "--seed", "1", "--out", path("s.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  auto j = json::parse(slurp(path("s.json")));
  EXPECT_EQ(j["operations"], 2000);
  EXPECT_EQ(j["violations"], 0);
}

TEST_F(Cli, StressRejectsZeroThreads) {
  EXPECT_EQ(cli({"stress", scenario("n8_mixed.yaml"), "--threads", "0"}).code, 2);
  EXPECT_EQ(cli({"stress", scenario("n8_mixed.yaml"), "--scan-ratio", "1.5"}).code, 2);
}

TEST_F(Cli, ShippedThirdCollectCounterexample) {
  auto shipped = (kScenarios / "counterexamples" / "drop_third_collect.json").string();
  auto r = cli({"replay", shipped, "--scenario", scenario("mutant_third_collect.yaml"), "--history-out",
                path("h.txt")});
  EXPECT_EQ(r.code, 1) << r.err;
  EXPECT_NE(r.out.find("expected=linearizability"), std::string::npos) << r.out;
  EXPECT_FALSE(slurp(path("h.txt")).empty());

  // the adversary regenerates it byte for byte
  EXPECT_EQ(cli({"adversary", "hide-aba", scenario("mutant_third_collect.yaml"), "--save-schedule", path("again.json")})
                .code,
            1);
  EXPECT_EQ(slurp(path("again.json")), slurp(shipped));
}

TEST_F(Cli, ReplayCleanSchedule) {
  auto r = cli({"adversary", "hide-aba", scenario("mutant_third_collect.yaml"), "--mutant", "none",
                "--save-schedule", path("clean.json"), "--out", path("a.json")});
  EXPECT_EQ(r.code, 0) << r.out;
  auto j = json::parse(slurp(path("a.json")));
  EXPECT_EQ(j["schedule"]["expect"], "");
  EXPECT_TRUE(j["counterexamples"].empty());
  EXPECT_EQ(cli({"replay", path("clean.json")}).code, 0);
}

TEST_F(Cli, ReplayRejectsTamperedSchedules) {
  auto shipped = slurp((kScenarios / "counterexamples" / "drop_third_collect.json").string());
  auto j = json::parse(shipped);

  auto edited = j;
  edited["scenario"] = edited["scenario"].get<std::string>() + "# edited\n";
  spit(path("digest.json"), edited.dump());
  EXPECT_EQ(cli({"replay", path("digest.json")}).code, 2);

  spit(path("truncated.json"), shipped.substr(0, shipped.size() / 2));
  EXPECT_EQ(cli({"replay", path("truncated.json")}).code, 2);

  auto impossible = j;
  impossible["choices"].push_back("x9");
  spit(path("choice.json"), impossible.dump());
  EXPECT_EQ(cli({"replay", path("choice.json")}).code, 2);

  EXPECT_EQ(cli({"replay", path("missing.json")}).code, 2);
}

TEST_F(Cli, ReplayConfigurationIsBound) {
  auto shipped = (kScenarios / "counterexamples" / "drop_third_collect.json").string();
  EXPECT_EQ(cli({"replay", shipped, "--collect-order", "desc"}).code, 2);
  EXPECT_EQ(cli({"replay", shipped, "--mutant", "none"}).code, 2);
  EXPECT_EQ(cli({"replay", shipped, "--scenario", scenario("n2_basic.yaml")}).code, 2);
  // restating the recorded configuration is fine
  EXPECT_EQ(cli({"replay", shipped, "--collect-order", "asc", "--mutant", "drop-third-collect"}).code, 1);
}

TEST_F(Cli, AdversaryRejectsUnknownPolicy) {
  auto r = cli({"adversary", "polite", scenario("n2_basic.yaml")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("hide-aba"), std::string::npos);
}

TEST_F(Cli, BenchGrid) {
  auto r = cli({"bench", "--n", "2,4", "--m", "2,4", "--runs", "4", "--out", path("b.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("fitted c = "), std::string::npos);
  auto j = json::parse(slurp(path("b.json")));
  EXPECT_EQ(j["cells"].size(), 4u);
  EXPECT_GT(j["fitted_c"].get<double>(), 0.0);
}

TEST_F(Cli, BenchSingleCell) {
  auto r = cli({"bench", "--n", "1", "--m", "1", "--quiescent", "--variant", "solo-lf", "--out", path("b.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  auto j = json::parse(slurp(path("b.json")));
  ASSERT_EQ(j["cells"].size(), 1u);
  EXPECT_EQ(j["cells"][0]["max_steps"], 3);
  EXPECT_EQ(cli({"bench", "--n", "2,x"}).code, 2);
}

TEST_F(Cli, SoloWaitFreeQuiescentLoopsAtMostTwice) {
  auto r = cli({"bench", "--n", "1,2,4", "--m", "1,3", "--quiescent", "--variant", "solo-wf", "--out", path("b.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  for (const auto& c : json::parse(slurp(path("b.json")))["cells"]) EXPECT_LE(c["max_iterations"].get<int>(), 2);
}

TEST_F(Cli, VersionAndHelp) {
  EXPECT_EQ(cli({"--version"}).out, std::string(kToolVersion) + "\n");
  auto help = cli({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("explore"), std::string::npos);
}

}  // namespace
}  // namespace rmwsnap
