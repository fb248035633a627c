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

#include "judgekit/judge_adapt.hpp"

#include <functional>
#include <random>
#include <set>

#include "gtest/gtest.h"
#include "test_support.hpp"

namespace judgekit {
namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kIo;
}

ScoreRecord with_token(const char* token) {
  ScoreRecord r;
  r.token = token;
  return r;
}

ScoreRecord with_score(double s) {
  ScoreRecord r;
  r.score = s;
  return r;
}

TEST(JudgeDirect, Examples) {
  ScoreTable t;
  t.insert(TopicId("q1"), DocId("d1"), with_token("true"));
  t.insert(TopicId("q1"), DocId("d2"), with_token("false"));
  const auto labels = judge_direct(t);
  EXPECT_TRUE(*labels.find(TopicId("q1"), DocId("d1")));
  EXPECT_FALSE(*labels.find(TopicId("q1"), DocId("d2")));
  EXPECT_EQ(labels.size(), 2u);

  ScoreTable bad;
  bad.insert(TopicId("q1"), DocId("d1"), with_token("maybe"));
  EXPECT_EQ(kind_of([&] { judge_direct(bad); }), ErrorKind::kUnknownToken);

  ScoreTable missing;
  missing.insert(TopicId("q1"), DocId("d1"), with_score(0.3));
  EXPECT_EQ(kind_of([&] { judge_direct(missing); }), ErrorKind::kMissingToken);
}

TEST(JudgeDirect, CustomMapAndIgnoresScores) {
  const auto map = TokenMap::from_json(nlohmann::json{{"yes", 1}, {"no", 0}, {"Yes", 1}});
  ScoreTable a, b;
  auto r = with_token("Yes");
  a.insert(TopicId("q"), DocId("d"), r);
  r.score = -4.0;
  r.prob = 0.01;
  b.insert(TopicId("q"), DocId("d"), r);
  EXPECT_EQ(judge_direct(a, map), judge_direct(b, map));
  EXPECT_TRUE(*judge_direct(b, map).find(TopicId("q"), DocId("d")));
  EXPECT_THROW(TokenMap::from_json(nlohmann::json{{"x", 2}}), Error);
  EXPECT_THROW(TokenMap::from_json(nlohmann::json::object()), Error);
}

TEST(JudgeThreshold, Examples) {
  ScoreTable t;
  t.insert(TopicId("q1"), DocId("a"), with_score(0.5));
  t.insert(TopicId("q1"), DocId("b"), with_score(0.49));
  const auto labels = judge_threshold(t, Threshold(0.5));
  EXPECT_TRUE(*labels.find(TopicId("q1"), DocId("a")));
  EXPECT_FALSE(*labels.find(TopicId("q1"), DocId("b")));

  const auto all = judge_threshold(t, Threshold(0.1));
  all.for_each([](const TopicId&, const DocId&, bool l) { EXPECT_TRUE(l); });

  ScoreTable missing;
  missing.insert(TopicId("q1"), DocId("d1"), with_token("true"));
  EXPECT_EQ(kind_of([&] { judge_threshold(missing, Threshold(0.5)); }), ErrorKind::kMissingScore);
  EXPECT_THROW(Threshold(std::nan("")), Error);
}

ScoreTable random_scores(std::mt19937_64& rng, int pairs) {
  ScoreTable t;
  std::uniform_int_distribution<int> cents(0, 100);
  for (int i = 0; i < pairs; ++i) {
    t.insert(TopicId("q" + std::to_string(i % 7)), DocId("d" + std::to_string(i)),
             with_score(cents(rng) / 100.0));
  }
  return t;
}

TEST(JudgeThreshold, MonotoneOverGrid) {
  std::mt19937_64 rng(21);
  const auto grid = ThresholdGrid::probability();
  for (int trial = 0; trial < 20; ++trial) {
    const auto scores = random_scores(rng, 200);
    std::size_t previous = scores.size() + 1;
    BinaryQrels prev_labels;
    for (double theta : grid.candidates()) {
      const auto labels = judge_threshold(scores, Threshold(theta));
      std::size_t positives = 0;
      labels.for_each([&](const TopicId& t, const DocId& d, bool l) {
        if (!l) return;
        ++positives;
        if (!prev_labels.empty()) {
          ASSERT_TRUE(*prev_labels.find(t, d));
        }
      });
      ASSERT_LE(positives, previous);
      previous = positives;
      prev_labels = labels;
    }
  }
}

TEST(JudgeThreshold, InvariantUnderIncreasingTransform) {
  std::mt19937_64 rng(22);
  const auto scores = random_scores(rng, 300);
  const auto g = [](double x) { return std::exp(4.0 * x) - 2.0; };
  ScoreTable mapped;
  scores.for_each([&](const TopicId& t, const DocId& d, const ScoreRecord& r) {
    mapped.insert(t, d, with_score(g(*r.score)));
  });
  for (double theta : {0.0, 0.13, 0.5, 0.77, 1.0}) {
    EXPECT_EQ(judge_threshold(scores, Threshold(theta)),
              judge_threshold(mapped, Threshold(g(theta))));
  }
}

TEST(ThresholdGrid, Presets) {
  const auto prob = ThresholdGrid::probability();
  EXPECT_EQ(prob.size(), 101u);
  EXPECT_EQ(prob.candidates().front(), 0.0);
  EXPECT_EQ(prob.candidates().back(), 1.0);
  const auto wide = ThresholdGrid::unbounded();
  EXPECT_EQ(wide.size(), 161u);
  EXPECT_EQ(wide.candidates().front(), -8.0);
  EXPECT_EQ(wide.candidates().back(), 8.0);
}

TEST(ThresholdGrid, Parse) {
  EXPECT_EQ(ThresholdGrid::parse("0:1:0.25").candidates(),
            (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(ThresholdGrid::parse("0.1,0.4,2").candidates(), (std::vector<double>{0.1, 0.4, 2.0}));
  EXPECT_EQ(ThresholdGrid::parse("prob").size(), 101u);
  EXPECT_EQ(kind_of([] { ThresholdGrid::parse(""); }), ErrorKind::kEmptyGrid);
  EXPECT_EQ(kind_of([] { ThresholdGrid(std::vector<double>{}); }), ErrorKind::kEmptyGrid);
  EXPECT_EQ(kind_of([] { ThresholdGrid::parse("0.5,0.5"); }), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([] { ThresholdGrid::parse("0:1"); }), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([] { ThresholdGrid::parse("a,b"); }), ErrorKind::kInvalidArgument);
}

std::pair<ScoreTable, BinaryQrels> separable(int pairs) {
  ScoreTable scores;
  BinaryQrels gold;
  for (int i = 0; i < pairs; ++i) {
    const bool rel = i % 3 == 0;
    const TopicId t("q" + std::to_string(i % 4));
    const DocId d("d" + std::to_string(i));
    gold.insert(t, d, rel);
    scores.insert(t, d, with_score(rel ? 0.9 : 0.1));
  }
  return {scores, gold};
}

TEST(Sweep, Example) {
  const auto [scores, gold] = separable(30);
  const auto r = sweep(scores, gold, ThresholdGrid({0.0, 0.5, 1.0}), SweepObjective::kappa());
  ASSERT_EQ(r.curve.size(), 3u);
  EXPECT_EQ(r.curve[0], std::make_pair(0.0, 0.0));
  EXPECT_EQ(r.curve[1], std::make_pair(0.5, 1.0));
  EXPECT_EQ(r.curve[2], std::make_pair(1.0, 0.0));
  EXPECT_EQ(r.selected, Threshold(0.5));
}

TEST(Sweep, FlatCurveSelectsSmallestTheta) {
  const auto [scores, gold] = separable(30);
  const auto r = sweep(scores, gold, ThresholdGrid({0.2, 0.3, 0.4}), SweepObjective::kappa());
  for (const auto& [theta, v] : r.curve) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(r.selected, Threshold(0.2));
}

TEST(Sweep, Errors) {
  const auto [scores, gold] = separable(30);
  auto extra = gold;
  extra.insert(TopicId("q9"), DocId("zz"), true);
  EXPECT_EQ(kind_of([&] {
              sweep(scores, extra, ThresholdGrid::probability(), SweepObjective::kappa());
            }),
            ErrorKind::kMissingPrediction);
  SweepOptions lenient;
  lenient.missing = MissingPolicy::kAsZero;
  EXPECT_NO_THROW(sweep(scores, extra, ThresholdGrid::probability(), SweepObjective::kappa(),
                        nullptr, lenient));
  EXPECT_EQ(kind_of([&] {
              sweep(scores, gold, ThresholdGrid::probability(),
                    SweepObjective::tau(MetricSpec::parse("map@100")));
            }),
            ErrorKind::kInvalidArgument);
  // theta 0 labels every pair 1; with all-relevant gold both raters are
  // single-class.
  BinaryQrels all_rel;
  scores.for_each([&](const TopicId& t, const DocId& d, const ScoreRecord&) {
    all_rel.insert(t, d, true);
  });
  EXPECT_EQ(kind_of([&] {
              sweep(scores, all_rel, ThresholdGrid({0.0}), SweepObjective::kappa());
            }),
            ErrorKind::kDegenerateMarginals);
}

// Selection must equal an independent scan of the brute-force curve.
TEST(Sweep, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> grid_size(1, 40);
  std::uniform_int_distribution<int> cents(-10, 110);
  for (int instance = 0; instance < 100; ++instance) {
    const auto gold = testing::random_binary_qrels(rng, 4, 30, 0.35);
    const auto scores = testing::noisy_scores(rng, gold, 0.25);
    std::set<double> points;
    const int g = grid_size(rng);
    while (static_cast<int>(points.size()) < g) points.insert(cents(rng) / 100.0);
    const ThresholdGrid grid(std::vector<double>(points.begin(), points.end()));

    SweepOptions options;
    options.degenerate = DegeneratePolicy::kOne;
    options.threads = 1 + instance % 4;
    const auto r = sweep(scores, gold, grid, SweepObjective::kappa(), nullptr, options);

    std::vector<double> expected;
    for (double theta : grid.candidates()) {
      double tp = 0, fp = 0, fn = 0, tn = 0;
      gold.for_each([&](const TopicId& t, const DocId& d, bool truth) {
        const bool guess = *scores.find(t, d)->score >= theta;
        (guess ? (truth ? tp : fp) : (truth ? fn : tn)) += 1;
      });
      expected.push_back(tp + fn == 0 || fp + tn == 0 || tp + fp == 0 || fn + tn == 0
                             ? 0.0
                             : testing::oracle_kappa(tp, fp, fn, tn));
    }
    const double best = *std::max_element(expected.begin(), expected.end());
    std::size_t first = 0;
    while (expected[first] < best - 1e-12) ++first;
    ASSERT_EQ(r.selected.theta, grid.candidates()[first]) << "instance " << instance;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      ASSERT_EQ(r.curve[i].first, grid.candidates()[i]);
      ASSERT_NEAR(r.curve[i].second, expected[i], 1e-12);
    }
  }
}

TEST(Sweep, ParallelCurveIsBitIdentical) {
  std::mt19937_64 rng(24);
  const auto gold = testing::random_binary_qrels(rng, 10, 50);
  const auto scores = testing::noisy_scores(rng, gold, 0.3);
  SweepOptions serial, parallel;
  parallel.threads = 8;
  const auto a = sweep(scores, gold, ThresholdGrid::probability(), SweepObjective::kappa(),
                       nullptr, serial);
  const auto b = sweep(scores, gold, ThresholdGrid::probability(), SweepObjective::kappa(),
                       nullptr, parallel);
  EXPECT_EQ(a.curve, b.curve);
  EXPECT_EQ(a.selected, b.selected);
}

TEST(Sweep, TauObjective) {
  const auto [scores, gold] = separable(40);
  // Three systems with distinct quality under gold.
  std::map<std::string, judgekit::Run> runs;
  for (int s = 0; s < 3; ++s) {
    judgekit::Run run("sys" + std::to_string(s));
    for (int i = 0; i < 40; ++i) {
      const bool rel = i % 3 == 0;
      // sys0 ranks relevant docs first on every topic, sys1 on half, sys2 never.
      const int topic = i % 4;
      const bool promote = s == 0 || (s == 1 && topic < 2);
      const double score = (rel ? (promote ? 1.0 : -1.0) : 0.0) + (i % 5) * 0.1;
      run.add(TopicId("q" + std::to_string(topic)), DocId("d" + std::to_string(i)), score);
    }
    runs.emplace(run.tag(), run);
  }
  const auto r = sweep(scores, gold, ThresholdGrid({0.0, 0.5, 1.0}),
                       SweepObjective::tau(MetricSpec::parse("map@100")), &runs);
  EXPECT_EQ(r.curve[1].second, 1.0);
  // theta 1.0 labels nothing relevant: every system scores 0, recorded as 0.
  EXPECT_EQ(r.curve[2].second, 0.0);
  EXPECT_EQ(r.selected, Threshold(0.5));
  std::map<std::string, judgekit::Run> one = {*runs.begin()};
  EXPECT_EQ(kind_of([&] {
              sweep(scores, gold, ThresholdGrid({0.5}),
                    SweepObjective::tau(MetricSpec::parse("map@100")), &one);
            }),
            ErrorKind::kInvalidArgument);
}

TEST(Transfer, DefaultPreset) {
  const auto plan = TransferPlan::trecdl_default();
  EXPECT_EQ(plan.assignments(), (std::map<std::string, std::string>{
                                    {"20", "19"}, {"19", "20"}, {"22", "21"}, {"21", "22"},
                                    {"23", "22"}}));
  EXPECT_EQ(TransferPlan::preset("trecdl-paper"), plan);
  EXPECT_FALSE(TransferPlan::preset("nope"));
}

SweepResult selected_at(double theta) {
  SweepResult r;
  r.curve = {{theta, 0.5}};
  r.selected = Threshold(theta);
  return r;
}

TEST(Transfer, Apply) {
  const std::map<std::string, SweepResult> sources = {
      {"19", selected_at(0.4)}, {"20", selected_at(0.6)},
      {"21", selected_at(0.3)}, {"22", selected_at(0.7)}};
  const auto out = apply_transfer(TransferPlan::trecdl_default(), sources);
  EXPECT_EQ(out, (std::map<std::string, Threshold>{{"20", Threshold(0.4)},
                                                   {"19", Threshold(0.6)},
                                                   {"22", Threshold(0.3)},
                                                   {"21", Threshold(0.7)},
                                                   {"23", Threshold(0.7)}}));
  EXPECT_TRUE(apply_transfer(TransferPlan(), sources).empty());
  EXPECT_EQ(kind_of([&] {
              apply_transfer(TransferPlan(std::map<std::string, std::string>{{"x", "missing"}}), sources);
            }),
            ErrorKind::kMissingSource);
}

TEST(Transfer, JsonRoundTrip) {
  const auto plan = TransferPlan::trecdl_default();
  EXPECT_EQ(TransferPlan::from_json(plan.to_json()), plan);
  EXPECT_THROW(TransferPlan::from_json(nlohmann::json{{"a", 1}}), Error);

  const auto [scores, gold] = separable(12);
  const auto r = sweep(scores, gold, ThresholdGrid::probability(), SweepObjective::kappa());
  const auto back = sweep_result_from_json(nlohmann::json::parse(to_json(r).dump()));
  EXPECT_EQ(back.curve, r.curve);
  EXPECT_EQ(back.selected, r.selected);
  EXPECT_THROW(sweep_result_from_json(nlohmann::json{{"curve", 3}}), Error);
}

}  // namespace
}  // namespace judgekit
