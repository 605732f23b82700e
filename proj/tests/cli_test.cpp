#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "attrilens/core/data_dir.hpp"
#include "attrilens/core/text.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(ATTRILENS_CLI_PATH) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  while (const auto n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  const auto s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("attrilens_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, DescriptorRows) {
  auto r = run("descriptors O --ids MolWt");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("MolWt,18.015\n"), std::string::npos) << r.out;
  r = run("descriptors c1ccccc1 --ids TPSA,NumAromaticRings");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("TPSA,0.0\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("NumAromaticRings,1.0\n"), std::string::npos) << r.out;
  EXPECT_EQ(run("descriptors CCO --ids Foo").code, 2);
  EXPECT_EQ(run("descriptors CCO --ids BertzCT").code, 2);
  EXPECT_EQ(run("descriptors C1CC").code, 2);
}

TEST_F(CliTest, DescriptorsAllListsEveryImplementedDescriptor) {
  const auto r = run("--format json descriptors CCO --all");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j.at(0).at("descriptors").size(), 25u);
}

TEST_F(CliTest, ScoreInputErrors) {
  std::ofstream(path("empty.jsonl")).close();
  auto r = run("score " + path("empty.jsonl"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("EmptyDataset"), std::string::npos) << r.out;

  std::ifstream fixtures(attrilens::data_dir() / "fixtures" / "case_studies.jsonl");
  std::string first;
  std::getline(fixtures, first);
  std::ofstream(path("bad.jsonl")) << first << "\n{\"id\": 3,\n";
  r = run("score " + path("bad.jsonl"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("bad.jsonl:2"), std::string::npos) << r.out;

  EXPECT_EQ(run("score " + path("missing.jsonl")).code, 2);
  r = run("score " + (attrilens::data_dir() / "fixtures" / "case_studies.jsonl").string() + " --table nosuch");
  EXPECT_EQ(r.code, 3);
}

TEST_F(CliTest, ScoreFixtureSummaryMatchesExpectedLines) {
  const auto fixtures = attrilens::data_dir() / "fixtures" / "case_studies.jsonl";
  const auto r = run("--format json score " + fixtures.string() + " --out " + path("scores.jsonl"));
  ASSERT_EQ(r.code, 0) << r.out;
  std::map<std::string, double> expected;
  std::size_t n = 0;
  std::ifstream in(fixtures);
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    const auto j = json::parse(line);
    for (const char* k : {"format", "correct", "count", "rational"}) {
      expected[k] += std::stod(j.at("expected").at(k).get<std::string>());
    }
    ++n;
  }
  std::istringstream lines(r.out);
  json summary;
  std::size_t rows = 0;
  for (std::string line; std::getline(lines, line);) {
    const auto j = json::parse(line);
    if (j.contains("summary")) summary = j.at("summary");
    else ++rows;
  }
  EXPECT_EQ(rows, n);
  ASSERT_FALSE(summary.is_null());
  EXPECT_EQ(summary.at("n").get<std::size_t>(), n);
  for (const char* k : {"format", "correct", "count"}) {
    EXPECT_DOUBLE_EQ(summary.at(std::string("mean_") + k).get<double>(), expected[k] / static_cast<double>(n)) << k;
  }
  // printed rational values are truncated to two digits
  EXPECT_NEAR(summary.at("mean_rational").get<double>(), expected["rational"] / static_cast<double>(n),
              0.01 / static_cast<double>(n));
  EXPECT_TRUE(fs::exists(path("scores.jsonl.manifest.json")));
}

TEST_F(CliTest, PromptContainsSmilesAndTarget) {
  const auto r = run("prompt --smiles CCO --target BBBP");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("CCO"), std::string::npos);
  EXPECT_NE(r.out.find("BBBP"), std::string::npos);
  EXPECT_EQ(run("prompt --task ranking --smiles CCO --target BBBP").code, 2);
}

TEST_F(CliTest, SplitBundledBace) {
  const auto data = (attrilens::data_dir() / "datasets" / "bace_standin.csv").string();
  const auto r = run("--format json split " + data + " --preset bace --out-dir " + dir_.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = json::parse(r.out);
  const long train = j["sizes"]["train"], valid = j["sizes"]["valid"], test = j["sizes"]["test"];
  EXPECT_EQ(train + valid + test, 1513);
  EXPECT_LE(std::abs(train - 1210), 232);
  EXPECT_LE(std::abs(valid - 151), 232);
  EXPECT_LE(std::abs(test - 152), 232);
  EXPECT_EQ(line_count(path("train.csv")), static_cast<std::size_t>(train) + 1);
  EXPECT_EQ(line_count(path("valid.csv")), static_cast<std::size_t>(valid) + 1);
  EXPECT_EQ(line_count(path("test.csv")), static_cast<std::size_t>(test) + 1);
  const auto manifest = json::parse(slurp(path("split.manifest.json")));
  EXPECT_EQ(manifest.at("command"), "split");
  EXPECT_EQ(manifest.at("outputs").size(), 3u);

  EXPECT_EQ(run("split " + data + " --preset nope").code, 3);
  EXPECT_EQ(run("split " + data + " --preset custom --smiles-col nope --label-col Class").code, 2);
}

TEST_F(CliTest, TrainSimDefaultReproducesBundledCorpus) {
  const auto r = run("train-sim --out " + path("curves.csv") + " --emit-corpus " + path("corpus.jsonl"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(line_count(path("curves.csv")), 1001u);
  EXPECT_EQ(slurp(path("corpus.jsonl")), slurp(attrilens::data_dir() / "corpora" / "toy_bbbp_grpo.jsonl"));

  auto manifest = json::parse(slurp(path("curves.csv.manifest.json")));
  EXPECT_EQ(manifest.at("command"), "train-sim");
  EXPECT_EQ(manifest.at("seed"), 0);
  EXPECT_EQ(manifest.at("config").at("steps"), 1000);
}

TEST_F(CliTest, TrainSimIsDeterministicForSeed) {
  const std::string args = " --steps 40 --seed 5 --algorithm dapo";
  ASSERT_EQ(run("train-sim --out " + path("a.csv") + args).code, 0);
  ASSERT_EQ(run("train-sim --out " + path("b.csv") + args).code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  auto ma = json::parse(slurp(path("a.csv.manifest.json")));
  auto mb = json::parse(slurp(path("b.csv.manifest.json")));
  for (auto* m : {&ma, &mb}) {
    m->erase("wall_time_s");
    m->erase("outputs");
  }
  EXPECT_EQ(ma, mb);
}

TEST_F(CliTest, TrainSimConfigErrors) {
  EXPECT_EQ(run("train-sim --steps 0 --out " + path("c.csv")).code, 3);
  EXPECT_EQ(run("train-sim --algorithm ppo --out " + path("c.csv")).code, 3);
  std::ofstream(path("cfg.txt")) << "steps = 10\nwarmup = 3\n";
  EXPECT_EQ(run("train-sim --config " + path("cfg.txt") + " --out " + path("c.csv")).code, 3);
  EXPECT_EQ(run("train-sim --config " + path("nope.txt")).code, 2);
  EXPECT_EQ(run("train-sim --bogus-flag 1").code, 2);
}

TEST_F(CliTest, DtreeReportsAuc) {
  const auto r = run("--format json dtree --trees 50 --null-repeats 1 --out " + path("metrics.json") + " --model-out " +
                     path("forest.txt"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = json::parse(slurp(path("metrics.json")));
  ASSERT_TRUE(j.contains("auc"));
  EXPECT_GE(j["auc"].get<double>(), 0.0);
  EXPECT_LE(j["auc"].get<double>(), 1.0);
  EXPECT_EQ(j["features"].size(), 10u);
  EXPECT_EQ(j["null_aucs"].size(), 1u);
  EXPECT_EQ(slurp(path("forest.txt")).rfind("attrilens-forest 1", 0), 0u);
  EXPECT_EQ(run("dtree --features Foo").code, 2);
}

TEST(CliUsage, MissingSubcommandIsInputError) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("--version").code, 0);
}
