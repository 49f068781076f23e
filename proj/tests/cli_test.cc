// Runs the aex binary end to end.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("aex_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  CliRun run(const std::string& args, const std::string& env = "") const {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = env + " '" + std::string(AEX_CLI_PATH) + "' " + args + " > '" + out.string() + "' 2> '" +
                            err.string() + "'";
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  // Linear dataset plus a perfect model 1, both in the temp directory.
  void make_linear_setup() {
    ASSERT_EQ(run("gen-data --kind linear --rows 400 --anomalies 8 --seed 3 --out " + path("d.csv").string()).code, 0);
    ASSERT_EQ(run("train --perfect 1 --out " + path("m.json").string()).code, 0);
  }

  fs::path dir_;
};

TEST_F(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("explain --bogus").code, 1);
  EXPECT_EQ(run("gen-data --kind weird").code, 1);
}

TEST_F(CliTest, MissingModelIsIoError) {
  make_linear_setup();
  const CliRun r = run("detect --model " + path("nope.json").string() + " --data " + path("d.csv").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("model file '" + path("nope.json").string() + "' does not exist"), std::string::npos) << r.err;
}

TEST_F(CliTest, DetectFindsInjectedAnomalies) {
  make_linear_setup();
  const CliRun r = run("detect --model " + path("m.json").string() + " --data " + path("d.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc.at("schema"), "aex.anomalies");
  EXPECT_EQ(doc.at("n_rows"), 400);
  // Perfect model: normal rows score exactly zero, so every flagged row is
  // an injected one (a replacement can coincide with the true sum, hence <=).
  EXPECT_GE(doc.at("anomalies").size(), 6u);
  EXPECT_LE(doc.at("anomalies").size(), 8u);
  const CliRun csv = run("detect --format csv --model " + path("m.json").string() + " --data " + path("d.csv").string());
  EXPECT_EQ(csv.out.rfind("row,score\n", 0), 0u);
}

TEST_F(CliTest, ExplainIsDeterministicAndRenders) {
  make_linear_setup();
  const std::string base = "explain --model " + path("m.json").string() + " --data " + path("d.csv").string() +
                           " --selection top2 --seed 5 --quiet --out ";
  ASSERT_EQ(run(base + path("a.json").string() + " --html " + path("a.html").string()).code, 0);
  ASSERT_EQ(run(base + path("b.json").string() + " --html " + path("b.html").string()).code, 0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  EXPECT_EQ(slurp(path("a.html")), slurp(path("b.html")));

  const json doc = json::parse(slurp(path("a.json")));
  EXPECT_EQ(doc.at("schema"), "aex.explanation");
  ASSERT_FALSE(doc.at("explanations").empty());
  for (const auto& e : doc.at("explanations")) {
    auto set = e.at("explanatory_set").at("features").get<std::vector<std::size_t>>();
    std::sort(set.begin(), set.end());
    EXPECT_TRUE(set == (std::vector<std::size_t>{0, 1, 4}) || set == (std::vector<std::size_t>{2, 3, 5}));
  }

  const CliRun term = run("render --in " + path("a.json").string());
  ASSERT_EQ(term.code, 0) << term.err;
  EXPECT_NE(term.out.find("Contributing 1"), std::string::npos);
  const CliRun html = run("render --format html --in " + path("a.json").string());
  EXPECT_EQ(html.out.rfind("<!DOCTYPE html>", 0), 0u);
}

TEST_F(CliTest, SeedFromEnvironment) {
  make_linear_setup();
  const std::string cmd = "explain --method lime --model " + path("m.json").string() + " --data " +
                          path("d.csv").string() + " --rows 0,1 --quiet --out ";
  ASSERT_EQ(run(cmd + path("env.json").string(), "AEX_SEED=17").code, 0);
  ASSERT_EQ(run(cmd + path("flag.json").string() + " --seed 17").code, 0);
  EXPECT_EQ(slurp(path("env.json")), slurp(path("flag.json")));
  const json doc = json::parse(slurp(path("env.json")));
  EXPECT_EQ(doc.at("method"), "lime");
  EXPECT_EQ(doc.at("seed"), 17);
  EXPECT_EQ(doc.at("explanations").size(), 2u);
}

TEST_F(CliTest, TotalErrorDocument) {
  make_linear_setup();
  const CliRun r = run("explain --total-error --seed 1 --model " + path("m.json").string() + " --data " +
                    path("d.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc.at("schema"), "aex.total_error");
  for (const auto& item : doc.at("attributions")) {
    EXPECT_EQ(item.at("attribution").at("target"), "TOTAL");
    EXPECT_EQ(item.at("attribution").at("phi").size(), 6u);
  }
}

TEST_F(CliTest, TrainDetectOnTrainedModel) {
  ASSERT_EQ(run("gen-data --kind linear --rows 3000 --anomalies 30 --seed 8 --out " + path("d.csv").string()).code, 0);
  const std::string train = "train --data " + path("d.csv").string() + " --epochs 5 --seed 2 --out ";
  ASSERT_EQ(run(train + path("m1.json").string()).code, 0);
  ASSERT_EQ(run(train + path("m2.json").string()).code, 0);
  json m1 = json::parse(slurp(path("m1.json"))), m2 = json::parse(slurp(path("m2.json")));
  EXPECT_EQ(m1.at("norm_stats"), "m1.norm.json");
  m1.erase("norm_stats");
  m2.erase("norm_stats");
  EXPECT_EQ(m1.dump(), m2.dump());
  EXPECT_EQ(slurp(path("m1.norm.json")), slurp(path("m2.norm.json")));
  const CliRun r = run("detect --model " + path("m1.json").string() + " --data " + path("d.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(json::parse(r.out).at("anomalies").empty());
}

TEST_F(CliTest, BadInputsAreValidationErrors) {
  make_linear_setup();
  EXPECT_EQ(run("explain --model " + path("m.json").string() + " --data " + path("d.csv").string() +
                " --error-percent 1.5")
                .code,
            1);
  EXPECT_EQ(run("explain --model " + path("m.json").string() + " --data " + path("d.csv").string() + " --rows 9999")
                .code,
            1);
  std::ofstream(path("bad.csv")) << "a,b\n1\n";
  EXPECT_EQ(run("detect --model " + path("m.json").string() + " --data " + path("bad.csv").string()).code, 2);
}

TEST_F(CliTest, EvalCommandsAreDeterministic) {
  const std::string cor = "eval-correctness --rows 1000 --anomalies 20 --background-size 50 --seed 4 --out ";
  ASSERT_EQ(run(cor + path("c1.json").string()).code, 0);
  ASSERT_EQ(run(cor + path("c2.json").string()).code, 0);
  EXPECT_EQ(slurp(path("c1.json")), slurp(path("c2.json")));
  EXPECT_EQ(json::parse(slurp(path("c1.json"))).at("fraction"), 1.0);

  const std::string eff = "eval-effectiveness --rows 800 --max-anomalies 5 --background-size 30 --epochs 3 --seed 4 --out ";
  ASSERT_EQ(run(eff + path("e1.json").string()).code, 0);
  ASSERT_EQ(run(eff + path("e2.json").string()).code, 0);
  EXPECT_EQ(slurp(path("e1.json")), slurp(path("e2.json")));
}

}  // namespace
