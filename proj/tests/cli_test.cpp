// Copyright 2026 The JudgeKit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "judgekit/cli.hpp"

#include <functional>
#include <set>

#include "cli_pipeline.hpp"
#include "gtest/gtest.h"
#include "test_support.hpp"

namespace judgekit::cli {
namespace {

using testing::invoke;
using testing::slurp;
using testing::TempDir;
namespace fs = std::filesystem;

ErrorKind parse_error(const std::vector<std::string>& args) {
  try {
    parse_args(args);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kIo;
}

TEST(ParseArgs, Examples) {
  const auto cmd = parse_args({"judge", "--scores", "s.tsv", "--strategy", "direct", "--out",
                               "q.txt"});
  EXPECT_EQ(cmd.verb, "judge");
  EXPECT_EQ(cmd.options, (std::map<std::string, std::string>{
                             {"scores", "s.tsv"}, {"strategy", "direct"}, {"out", "q.txt"}}));
  EXPECT_EQ(parse_error({"judge", "--scores", "s", "--strategy", "threshold", "--out", "q"}),
            ErrorKind::kMissingRequired);
  EXPECT_EQ(parse_error({"frobnicate"}), ErrorKind::kUnknownVerb);
}

TEST(ParseArgs, Forms) {
  const auto cmd = parse_args({"eval", "--run=r", "--qrels", "q", "--metric=map@100",
                               "--per-topic"});
  EXPECT_EQ(cmd.get("run"), "r");
  EXPECT_EQ(cmd.get("metric"), "map@100");
  EXPECT_TRUE(cmd.has("per-topic"));
  EXPECT_EQ(parse_error({"eval", "--run", "r", "--qrels", "q", "--metric", "m", "--bogus", "1"}),
            ErrorKind::kUnknownOption);
  EXPECT_EQ(parse_error({"eval", "stray"}), ErrorKind::kUnknownOption);
  EXPECT_EQ(parse_error({"eval", "--run"}), ErrorKind::kMissingRequired);
  EXPECT_EQ(parse_error({"eval", "--run", "r"}), ErrorKind::kMissingRequired);
  EXPECT_EQ(parse_error({}), ErrorKind::kMissingRequired);
  EXPECT_EQ(parse_error({"sweep", "--scores", "s", "--gold", "g", "--out", "o", "--objective",
                         "tau"}),
            ErrorKind::kMissingRequired);
  EXPECT_EQ(parse_error({"judge", "--scores", "s", "--strategy", "threshold", "--transfer", "t",
                         "--out", "q"}),
            ErrorKind::kMissingRequired);
  EXPECT_EQ(parse_error({"agree", "--pred", "p", "--gold", "g", "--missing", "maybe"}),
            ErrorKind::kInvalidArgument);
}

TEST(Run, UsageErrorsExitTwo) {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"frobnicate"}, {"eval"}, {"eval", "--nope", "x"}, {},
        {"judge", "--scores", "s", "--strategy", "threshold", "--out", "q"}}) {
    const auto r = invoke(args);
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("usage: judgekit"), std::string::npos);
    EXPECT_TRUE(r.out.empty());
  }
}

TEST(Run, HelpAndVersionNeedNoInputs) {
  auto r = invoke({"--version"});
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, std::string(kVersion) + "\n");
  r = invoke({"--help"});
  EXPECT_EQ(r.status, 0);
  for (const auto& v : verbs()) EXPECT_NE(r.out.find("  " + v.name), std::string::npos);
  r = invoke({"bias", "--help"});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("--out-dir"), std::string::npos);
}

TEST(Config, MergesWithFlagPrecedence) {
  TempDir dir("config");
  std::ofstream(dir / "flat.json") << R"({"run": "r1", "qrels": "q1", "metric": "map@100",
                                         "per-topic": true, "rel-level": 2})";
  auto cmd = parse_args({"eval", "--config", dir / "flat.json", "--run", "override"});
  EXPECT_EQ(cmd.get("run"), "override");
  EXPECT_EQ(cmd.get("qrels"), "q1");
  EXPECT_EQ(cmd.get("rel-level"), "2");
  EXPECT_TRUE(cmd.has("per-topic"));

  std::ofstream(dir / "nested.json") << R"({"eval": {"run": "r2", "qrels": "q2", "metric": "p@5"},
                                           "agree": {"pred": "ignored"}})";
  cmd = parse_args({"eval", "--config=" + (dir / "nested.json")});
  EXPECT_EQ(cmd.get("run"), "r2");
  EXPECT_EQ(cmd.get("metric"), "p@5");

  std::ofstream(dir / "bad.json") << R"({"run": "r", "qrels": "q", "metric": "m", "colour": 1})";
  EXPECT_EQ(parse_error({"eval", "--config", dir / "bad.json"}), ErrorKind::kUnknownOption);
  EXPECT_EQ(invoke({"eval", "--config", dir / "missing.json"}).status, 2);
}

TEST(Agree, IdenticalFilesGiveKappaOne) {
  TempDir dir("agree");
  std::ofstream(dir / "q.txt") << "q1 0 d1 1\nq1 0 d2 0\nq2 0 d1 0\nq2 0 d3 1\n";
  const auto r = invoke({"agree", "--pred", dir / "q.txt", "--gold", dir / "q.txt"});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "judge\tdataset\tkappa\tn\ttp\tfp\tfn\ttn\njudge\t-\t1.0000\t4\t2\t0\t0\t2\n");
}

TEST(Agree, DegenerateIsDomainError) {
  TempDir dir("degenerate");
  std::ofstream(dir / "q.txt") << "q1 0 d1 1\nq1 0 d2 1\n";
  auto r = invoke({"agree", "--pred", dir / "q.txt", "--gold", dir / "q.txt", "--out",
                   dir / "out.tsv"});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("single class"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "out.tsv"));
  r = invoke({"agree", "--pred", dir / "q.txt", "--gold", dir / "q.txt", "--degenerate", "one"});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("\t1.0000\t"), std::string::npos);
}

TEST(Eval, ParityFixtureMatchesOracle) {
  const auto r = invoke({"eval", "--run", testing::data_path("parity.run"), "--qrels",
                         testing::data_path("parity.qrels"), "--metric",
                         "map@100,mrr@10,ndcg@10,p@10,recall@100", "--per-topic"});
  ASSERT_EQ(r.status, 0) << r.err;
  std::map<std::pair<std::string, std::string>, double> got;
  std::istringstream lines(r.out);
  std::string metric, topic, value;
  while (lines >> metric >> topic >> value) got[{metric, topic}] = std::stod(value);

  std::map<std::string, std::pair<double, int>> sums;
  std::size_t compared = 0;
  for (const auto& row : testing::load_parity_expected()) {
    if (row.rel_level != 1) continue;
    auto it = got.find({row.metric, row.topic});
    if (it == got.end()) {
      // Only topics without relevant documents are left out; trec_eval
      // scores those 0.
      EXPECT_EQ(row.value, 0.0) << row.metric << " " << row.topic;
      continue;
    }
    EXPECT_NEAR(it->second, row.value, 1e-4) << row.metric << " " << row.topic;
    sums[row.metric].first += row.value;
    sums[row.metric].second += 1;
    ++compared;
  }
  EXPECT_EQ(compared, 5u * 49u);
  for (const auto& [m, s] : sums) {
    EXPECT_NEAR(got.at({m, "all"}), s.first / s.second, 1e-4) << m;
    EXPECT_EQ(got.at({m, "num_q"}), s.second);
  }
}

TEST(Errors, FileAndLineContext) {
  TempDir dir("context");
  std::ofstream(dir / "bad.qrels") << "q1 0 d1 1\nq1 0 d2\n";
  const auto r = invoke({"convert", "--qrels", dir / "bad.qrels", "--out", dir / "out.qrels"});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("bad.qrels:2"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "out.qrels"));
}

TEST(Errors, NoPartialOutputs) {
  TempDir dir("partial");
  // Second record lacks a token, so the direct strategy fails after the first.
  std::ofstream(dir / "s.tsv") << "q1\td1\t0.9\ttrue\t0.9\nq1\td2\t0.2\t-\t-\n";
  std::ofstream(dir / "q.out") << "previous contents\n";
  const auto r = invoke({"judge", "--scores", dir / "s.tsv", "--strategy", "direct", "--out",
                         dir / "q.out"});
  EXPECT_EQ(r.status, 1);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(slurp(dir.path() / "q.out"), "previous contents\n");
  EXPECT_FALSE(fs::exists(dir.path() / "q.out.tmp"));

  // bias with a judge outside the catalog writes nothing at all.
  testing::write_bias_fixture(dir.path() / "fx");
  std::ofstream(dir.path() / "fx/judges/stranger.qrels") << "t1 0 p00 1\n";
  const auto b = invoke({"bias", "--catalog", dir / "fx/catalog.json", "--runs", dir / "fx/runs",
                         "--judges", dir / "fx/judges", "--human", dir / "fx/human.qrels",
                         "--out-dir", dir / "bias"});
  EXPECT_EQ(b.status, 1);
  EXPECT_NE(b.err.find("stranger"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir.path() / "bias" / "scatter.csv"));
}

TEST(Bias, WritesOutputs) {
  TempDir dir("bias");
  testing::write_bias_fixture(dir.path());
  const auto r = invoke({"bias", "--catalog", dir / "catalog.json", "--runs", dir / "runs",
                         "--judges", dir / "judges", "--human", dir / "human.qrels", "--out-dir",
                         dir / "out"});
  ASSERT_EQ(r.status, 0) << r.err;
  for (const char* name : {"scatter.csv", "report.json", "matrix.json", "report.txt"}) {
    EXPECT_TRUE(fs::exists(dir.path() / "out" / name)) << name;
  }
  const std::string csv = slurp(dir.path() / "out" / "scatter.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 3);
  const auto report = nlohmann::json::parse(slurp(dir.path() / "out" / "report.json"));
  EXPECT_EQ(report.at("self_preference").at(1).at("delta_rank"), 2.0);
  EXPECT_EQ(r.out, slurp(dir.path() / "out" / "report.txt"));
}

TEST(Pipeline, EveryVerbSucceedsAndIsDeterministic) {
  TempDir dir("pipeline");
  testing::write_pipeline_inputs(dir.path() / "in");
  const auto first = testing::run_pipeline(dir.path() / "in", dir.path() / "a");
  const auto second = testing::run_pipeline(dir.path() / "in", dir.path() / "b");
  std::set<std::string> verbs_seen;
  for (const auto& [name, a] : first) {
    const auto& b = second.at(name);
    ASSERT_EQ(a.invocation.status, 0) << name << ": " << a.invocation.err;
    EXPECT_EQ(a.invocation.out, b.invocation.out) << name;
    EXPECT_EQ(a.files, b.files) << name;
    for (const auto& [file, content] : a.files) EXPECT_FALSE(content.empty()) << file;
    verbs_seen.insert(name.substr(0, name.find('-')));
  }
  std::set<std::string> all;
  for (const auto& v : verbs()) all.insert(v.name);
  EXPECT_EQ(verbs_seen, all);

  const auto thresholds = nlohmann::json::parse(first.at("transfer").files.at("thresholds.json"));
  EXPECT_EQ(thresholds.size(), 5u);
  const auto sweep = nlohmann::json::parse(first.at("sweep-19").files.at("sweeps/19.sweep.json"));
  EXPECT_EQ(sweep.at("curve").size(), 101u);
  EXPECT_EQ(thresholds.at("20"), sweep.at("selected"));
}

TEST(Pipeline, ThreadCountDoesNotChangeOutputs) {
  TempDir dir("threads");
  testing::write_pipeline_inputs(dir.path() / "in");
  ::setenv("JUDGEKIT_THREADS", "1", 1);
  const auto serial = testing::run_pipeline(dir.path() / "in", dir.path() / "a");
  ::setenv("JUDGEKIT_THREADS", "7", 1);
  const auto parallel = testing::run_pipeline(dir.path() / "in", dir.path() / "b");
  ::unsetenv("JUDGEKIT_THREADS");
  for (const auto& [name, a] : serial) {
    EXPECT_EQ(a.invocation.out, parallel.at(name).invocation.out) << name;
    EXPECT_EQ(a.files, parallel.at(name).files) << name;
  }
}

}  // namespace
}  // namespace judgekit::cli
