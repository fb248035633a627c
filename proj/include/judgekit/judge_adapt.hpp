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

// Turns scorer output into binary judgments.
//
// Two strategies are supported: direct generation, which reads the token the
// scorer generated ("true"/"false" by default), and score thresholding, which
// labels a pair relevant iff score >= theta. `sweep` picks theta on a grid
// against gold judgments and `apply_transfer` carries the chosen thresholds
// from one dataset to another.

#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "judgekit/agreement.hpp"
#include "judgekit/metrics.hpp"
#include "judgekit/parallel.hpp"
#include "judgekit/trec_io.hpp"
#include "judgekit/types.hpp"

namespace judgekit {

/// Generated token -> binary label.
class TokenMap {
 public:
  TokenMap() : entries_{{"false", false}, {"true", true}} {}
  explicit TokenMap(std::map<std::string, bool> entries)
      : entries_(std::move(entries)) {
    if (entries_.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "token map is empty");
    }
  }

  /// {"token": 0|1, ...}
  static TokenMap from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
      throw Error(ErrorKind::kInvalidArgument, "token map must be a JSON object");
    }
    std::map<std::string, bool> entries;
    for (const auto& [token, label] : j.items()) {
      if (!label.is_number_integer() || (label != 0 && label != 1)) {
        throw Error(ErrorKind::kInvalidArgument,
                    "token '" + token + "' must map to 0 or 1");
      }
      entries.emplace(token, label == 1);
    }
    return TokenMap(std::move(entries));
  }

  std::optional<bool> find(const std::string& token) const {
    auto it = entries_.find(token);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  const std::map<std::string, bool>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, bool> entries_;
};

struct Threshold {
  double theta = 0.0;

  Threshold() = default;
  explicit Threshold(double t) : theta(t) {
    if (!std::isfinite(t)) {
      throw Error(ErrorKind::kInvalidArgument, "threshold must be finite");
    }
  }

  friend bool operator==(const Threshold&, const Threshold&) = default;
};

/// Strictly increasing, non-empty list of candidate thresholds.
class ThresholdGrid {
 public:
  explicit ThresholdGrid(std::vector<double> candidates)
      : candidates_(std::move(candidates)) {
    if (candidates_.empty()) {
      throw Error(ErrorKind::kEmptyGrid, "threshold grid is empty");
    }
    for (std::size_t i = 0; i < candidates_.size(); ++i) {
      if (!std::isfinite(candidates_[i])) {
        throw Error(ErrorKind::kInvalidArgument, "grid values must be finite");
      }
      if (i > 0 && !(candidates_[i - 1] < candidates_[i])) {
        throw Error(ErrorKind::kInvalidArgument,
                    "grid must be strictly increasing");
      }
    }
  }

  /// 0.00, 0.01, ..., 1.00 for probability-valued scorers.
  static ThresholdGrid probability() {
    std::vector<double> v;
    for (int i = 0; i <= 100; ++i) v.push_back(i / 100.0);
    return ThresholdGrid(std::move(v));
  }

  /// -8.0, -7.9, ..., 8.0 for unbounded scorers.
  static ThresholdGrid unbounded() {
    std::vector<double> v;
    for (int i = -80; i <= 80; ++i) v.push_back(i / 10.0);
    return ThresholdGrid(std::move(v));
  }

  /// Evenly spaced from lo to hi inclusive (hi is included when it lies on
  /// the lattice within 1e-9 of a step).
  static ThresholdGrid linspace(double lo, double hi, double step) {
    if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
      throw Error(ErrorKind::kInvalidArgument, "bad grid range");
    }
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> v;
    v.reserve(count);
    for (std::size_t i = 0; i < count; ++i) v.push_back(lo + static_cast<double>(i) * step);
    return ThresholdGrid(std::move(v));
  }

  /// "prob", "unbounded", "lo:hi:step" or a comma-separated list.
  static ThresholdGrid parse(std::string_view text) {
    if (text == "prob") return probability();
    if (text == "unbounded") return unbounded();
    auto number = [&](std::string_view part) {
      auto v = detail::parse_finite(part);
      if (!v) {
        throw Error(ErrorKind::kInvalidArgument,
                    "bad grid value '" + std::string(part) + "'");
      }
      return *v;
    };
    if (text.find(':') != std::string_view::npos) {
      std::vector<double> parts;
      std::size_t start = 0;
      while (true) {
        auto colon = text.find(':', start);
        parts.push_back(number(text.substr(start, colon - start)));
        if (colon == std::string_view::npos) break;
        start = colon + 1;
      }
      if (parts.size() != 3) {
        throw Error(ErrorKind::kInvalidArgument, "grid range must be lo:hi:step");
      }
      return linspace(parts[0], parts[1], parts[2]);
    }
    std::vector<double> v;
    std::size_t start = 0;
    while (!text.empty()) {
      auto comma = text.find(',', start);
      v.push_back(number(text.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return ThresholdGrid(std::move(v));
  }

  const std::vector<double>& candidates() const noexcept { return candidates_; }
  std::size_t size() const noexcept { return candidates_.size(); }

 private:
  std::vector<double> candidates_;
};

struct SweepObjective {
  enum class Kind { kKappa, kTau };

  Kind kind = Kind::kKappa;
  MetricSpec metric{MetricKind::kMap, 100};
  TauVariant variant = TauVariant::kB;

  static SweepObjective kappa() { return {}; }
  static SweepObjective tau(MetricSpec metric, TauVariant variant = TauVariant::kB) {
    SweepObjective o;
    o.kind = Kind::kTau;
    o.metric = metric;
    o.variant = variant;
    return o;
  }

  std::string name() const {
    return kind == Kind::kKappa ? "kappa" : "tau(" + metric.name() + ")";
  }
};

struct SweepOptions {
  MissingPolicy missing = MissingPolicy::kError;
  DegeneratePolicy degenerate = DegeneratePolicy::kError;
  unsigned threads = 1;
};

struct SweepResult {
  /// (theta, objective value) in grid order.
  std::vector<std::pair<double, double>> curve;
  Threshold selected;
};

/// label = token_map[token] for every record.
inline BinaryQrels judge_direct(const ScoreTable& scores,
                                const TokenMap& map = TokenMap()) {
  BinaryQrels out;
  scores.for_each([&](const TopicId& t, const DocId& d, const ScoreRecord& r) {
    if (!r.token) {
      throw Error(ErrorKind::kMissingToken,
                  to_string(PairKey{t, d}) + " has no generated token");
    }
    auto label = map.find(*r.token);
    if (!label) {
      throw Error(ErrorKind::kUnknownToken, to_string(PairKey{t, d}) +
                                                " generated unmapped token '" +
                                                *r.token + "'");
    }
    out.insert(t, d, *label);
  });
  return out;
}

/// label = 1 iff score >= theta (inclusive).
inline BinaryQrels judge_threshold(const ScoreTable& scores, Threshold theta) {
  BinaryQrels out;
  scores.for_each([&](const TopicId& t, const DocId& d, const ScoreRecord& r) {
    if (!r.score) {
      throw Error(ErrorKind::kMissingScore, to_string(PairKey{t, d}) + " has no score");
    }
    out.insert(t, d, *r.score >= theta.theta);
  });
  return out;
}

namespace detail {

inline void require_coverage(const ScoreTable& scores, const BinaryQrels& gold) {
  gold.for_each([&](const TopicId& t, const DocId& d, bool) {
    if (!scores.contains(t, d)) {
      throw Error(ErrorKind::kMissingPrediction,
                  "no score for gold pair " + to_string(PairKey{t, d}));
    }
  });
}

}  // namespace detail

/// Evaluates every grid threshold against `gold` and selects the smallest
/// theta attaining the maximum.
///
/// With the tau objective, each run is evaluated under gold and under the
/// thresholded labels and tau is taken between the two orderings. A grid
/// point whose predicted labels give every system the same value has no
/// ordering to correlate and scores 0.
inline SweepResult sweep(const ScoreTable& scores, const BinaryQrels& gold,
                         const ThresholdGrid& grid,
                         const SweepObjective& objective,
                         const std::map<std::string, Run>* runs = nullptr,
                         const SweepOptions& options = {}) {
  const bool wants_runs = objective.kind == SweepObjective::Kind::kTau;
  if (wants_runs != (runs != nullptr)) {
    throw Error(ErrorKind::kInvalidArgument,
                wants_runs ? "tau objective needs a run set"
                           : "runs are only used by the tau objective");
  }
  if (wants_runs && runs->size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "tau objective needs >= 2 runs");
  }
  if (options.missing == MissingPolicy::kError) detail::require_coverage(scores, gold);

  std::map<std::string, RunEvaluation> gold_evals;
  if (wants_runs) {
    for (const auto& [id, run] : *runs) {
      gold_evals.emplace(id, evaluate_run(run, gold, objective.metric));
    }
  }

  const auto& thetas = grid.candidates();
  std::vector<double> values(thetas.size());
  parallel_for(thetas.size(), options.threads, [&](std::size_t i) {
    const BinaryQrels pred = judge_threshold(scores, Threshold(thetas[i]));
    if (!wants_runs) {
      values[i] = cohen_kappa(confusion(pred, gold, MissingPolicy::kAsZero),
                              options.degenerate);
      return;
    }
    std::map<std::string, RunEvaluation> pred_evals;
    for (const auto& [id, run] : *runs) {
      pred_evals.emplace(id, evaluate_run(run, pred, objective.metric));
    }
    try {
      values[i] = kendall_tau(make_ordering_pair(gold_evals, pred_evals),
                              objective.variant);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kAllTied) throw;
      values[i] = 0.0;
    }
  });

  SweepResult result;
  std::size_t best = 0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    result.curve.emplace_back(thetas[i], values[i]);
    if (values[i] > values[best]) best = i;
  }
  result.selected = Threshold(thetas[best]);
  return result;
}

/// Maps target dataset -> source dataset whose selected threshold it uses.
class TransferPlan {
 public:
  TransferPlan() = default;
  explicit TransferPlan(std::map<std::string, std::string> assignments)
      : assignments_(std::move(assignments)) {}

  /// TREC-DL 19->20, 20->19, 21->22, 22->21, 22->23.
  static TransferPlan trecdl_default() {
    return TransferPlan({{"19", "20"}, {"20", "19"}, {"21", "22"},
                         {"22", "21"}, {"23", "22"}});
  }

  /// Named presets; currently only "trecdl-paper".
  static std::optional<TransferPlan> preset(std::string_view name) {
    if (name == "trecdl-paper") return trecdl_default();
    return std::nullopt;
  }

  static TransferPlan from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
      throw Error(ErrorKind::kInvalidArgument, "transfer plan must be a JSON object");
    }
    std::map<std::string, std::string> a;
    for (const auto& [target, source] : j.items()) {
      if (!source.is_string()) {
        throw Error(ErrorKind::kInvalidArgument,
                    "source for target '" + target + "' must be a string");
      }
      a.emplace(target, source.get<std::string>());
    }
    return TransferPlan(std::move(a));
  }

  nlohmann::json to_json() const { return nlohmann::json(assignments_); }

  const std::map<std::string, std::string>& assignments() const noexcept {
    return assignments_;
  }

  friend bool operator==(const TransferPlan&, const TransferPlan&) = default;

 private:
  std::map<std::string, std::string> assignments_;
};

/// Target t receives per_source[plan[t]].selected.
inline std::map<std::string, Threshold> apply_transfer(
    const TransferPlan& plan, const std::map<std::string, SweepResult>& per_source) {
  std::map<std::string, Threshold> out;
  for (const auto& [target, source] : plan.assignments()) {
    auto it = per_source.find(source);
    if (it == per_source.end()) {
      throw Error(ErrorKind::kMissingSource, "no sweep result for source dataset '" +
                                                 source + "' (target '" + target + "')");
    }
    out.emplace(target, it->second.selected);
  }
  return out;
}

inline nlohmann::json to_json(const SweepResult& r) {
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& [theta, value] : r.curve) curve.push_back({theta, value});
  return {{"curve", curve}, {"selected", r.selected.theta}};
}

inline SweepResult sweep_result_from_json(const nlohmann::json& j) {
  try {
    SweepResult r;
    for (const auto& point : j.at("curve")) {
      r.curve.emplace_back(point.at(0).get<double>(), point.at(1).get<double>());
    }
    r.selected = Threshold(j.at("selected").get<double>());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("bad sweep result: ") + e.what());
  }
}

}  // namespace judgekit
