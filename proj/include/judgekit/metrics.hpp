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

// trec_eval-compatible ranking metrics.
//
// Conventions (all match trec_eval's map_cut / recip_rank / ndcg_cut / P /
// recall measures):
//   * a document is relevant iff its grade >= the relevance level (default 1);
//     unjudged documents are non-relevant;
//   * AP divides by the total number of relevant documents R, not min(R, K);
//   * nDCG uses linear gain (gain = grade) and the 1/log2(rank + 1) discount,
//     with the ideal ranking built from every judged grade of the topic;
//   * P@K always divides by K.
// Topics without relevant documents are not evaluable and drop out of means.

#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "judgekit/types.hpp"

namespace judgekit {

enum class MetricKind { kMap, kMrr, kPrecision, kRecall, kNdcg, kJudged };

struct MetricSpec {
  MetricKind kind = MetricKind::kMap;
  int depth = 100;

  MetricSpec() = default;
  MetricSpec(MetricKind k, int d) : kind(k), depth(d) {
    if (depth < 1) {
      throw Error(ErrorKind::kInvalidArgument, "metric depth must be >= 1");
    }
  }

  /// Accepts `map@100`, `mrr@10`, `ndcg@10`, `p@K`, `recall@K`, `judged@K`
  /// in any letter case.
  static MetricSpec parse(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    auto at = lower.find('@');
    if (at == std::string::npos) {
      throw Error(ErrorKind::kInvalidArgument,
                  "metric '" + std::string(text) + "' lacks an @depth suffix");
    }
    std::string_view name = std::string_view(lower).substr(0, at);
    std::string_view depth_text = std::string_view(lower).substr(at + 1);
    int depth = 0;
    auto [ptr, ec] = std::from_chars(
        depth_text.data(), depth_text.data() + depth_text.size(), depth);
    if (ec != std::errc() || ptr != depth_text.data() + depth_text.size() ||
        depth < 1) {
      throw Error(ErrorKind::kInvalidArgument,
                  "metric '" + std::string(text) + "' has an invalid depth");
    }
    static const std::map<std::string_view, MetricKind> kNames = {
        {"map", MetricKind::kMap},       {"mrr", MetricKind::kMrr},
        {"p", MetricKind::kPrecision},   {"recall", MetricKind::kRecall},
        {"ndcg", MetricKind::kNdcg},     {"judged", MetricKind::kJudged}};
    auto it = kNames.find(name);
    if (it == kNames.end()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "unknown metric '" + std::string(text) + "'");
    }
    return MetricSpec(it->second, depth);
  }

  std::string name() const {
    const char* base = "";
    switch (kind) {
      case MetricKind::kMap: base = "map"; break;
      case MetricKind::kMrr: base = "mrr"; break;
      case MetricKind::kPrecision: base = "p"; break;
      case MetricKind::kRecall: base = "recall"; break;
      case MetricKind::kNdcg: base = "ndcg"; break;
      case MetricKind::kJudged: base = "judged"; break;
    }
    return std::string(base) + "@" + std::to_string(depth);
  }

  friend bool operator==(const MetricSpec&, const MetricSpec&) = default;
};

/// Per-topic values plus their mean over evaluable topics.
struct RunEvaluation {
  MetricSpec metric;
  std::map<TopicId, double> per_topic;
  double mean = 0.0;
  std::size_t evaluable_topics = 0;

  /// NoEvaluableTopics: mean is reported as 0.
  bool no_evaluable_topics() const noexcept { return evaluable_topics == 0; }
};

inline const DocId& doc_of(const DocId& d) { return d; }
inline const DocId& doc_of(const RankedDoc& d) { return d.doc; }

/// Orders (doc, score) entries by score descending, ties by doc id
/// descending. Doc ids must be unique.
inline std::vector<DocId> canonical_sort(std::vector<RankedDoc> entries) {
  std::sort(entries.begin(), entries.end(), canonical_before);
  std::vector<DocId> out;
  out.reserve(entries.size());
  for (auto& e : entries) out.push_back(std::move(e.doc));
  return out;
}

namespace detail {

template <typename Label>
Grade grade_in(const std::map<DocId, Label>* judged, const DocId& doc) {
  if (judged == nullptr) return 0;
  auto it = judged->find(doc);
  return it == judged->end() ? 0 : grade_of(it->second);
}

template <typename Ranked>
std::size_t cut(const Ranked& ranked, int depth) {
  return std::min<std::size_t>(std::size(ranked), static_cast<std::size_t>(depth));
}

inline void require_relevant(std::size_t relevant) {
  if (relevant == 0) {
    throw Error(ErrorKind::kNoRelevant, "topic has no relevant documents");
  }
}

}  // namespace detail

/// Number of judged documents with grade >= rel_level.
template <typename Label>
std::size_t count_relevant(const std::map<DocId, Label>* judged,
                           Grade rel_level = 1) {
  if (judged == nullptr) return 0;
  std::size_t n = 0;
  for (const auto& [doc, label] : *judged) {
    if (grade_of(label) >= rel_level) ++n;
  }
  return n;
}

/// AP@K = (1/R) * sum over relevant ranks i <= K of precision@i.
template <typename Ranked, typename Label>
double average_precision(const Ranked& ranked,
                         const std::map<DocId, Label>* judged, int depth,
                         Grade rel_level = 1) {
  const std::size_t relevant = count_relevant(judged, rel_level);
  detail::require_relevant(relevant);
  const std::size_t n = detail::cut(ranked, depth);
  double sum = 0.0;
  std::size_t hits = 0;
  auto it = std::begin(ranked);
  for (std::size_t i = 0; i < n; ++i, ++it) {
    if (detail::grade_in(judged, doc_of(*it)) >= rel_level) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(relevant);
}

template <typename Ranked, typename Label>
double reciprocal_rank(const Ranked& ranked,
                       const std::map<DocId, Label>* judged, int depth,
                       Grade rel_level = 1) {
  detail::require_relevant(count_relevant(judged, rel_level));
  const std::size_t n = detail::cut(ranked, depth);
  auto it = std::begin(ranked);
  for (std::size_t i = 0; i < n; ++i, ++it) {
    if (detail::grade_in(judged, doc_of(*it)) >= rel_level) {
      return 1.0 / static_cast<double>(i + 1);
    }
  }
  return 0.0;
}

template <typename Ranked, typename Label>
double precision_at(const Ranked& ranked, const std::map<DocId, Label>* judged,
                    int depth, Grade rel_level = 1) {
  detail::require_relevant(count_relevant(judged, rel_level));
  const std::size_t n = detail::cut(ranked, depth);
  std::size_t hits = 0;
  auto it = std::begin(ranked);
  for (std::size_t i = 0; i < n; ++i, ++it) {
    if (detail::grade_in(judged, doc_of(*it)) >= rel_level) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(depth);
}

template <typename Ranked, typename Label>
double recall_at(const Ranked& ranked, const std::map<DocId, Label>* judged,
                 int depth, Grade rel_level = 1) {
  const std::size_t relevant = count_relevant(judged, rel_level);
  detail::require_relevant(relevant);
  const std::size_t n = detail::cut(ranked, depth);
  std::size_t hits = 0;
  auto it = std::begin(ranked);
  for (std::size_t i = 0; i < n; ++i, ++it) {
    if (detail::grade_in(judged, doc_of(*it)) >= rel_level) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(relevant);
}

/// nDCG@K with linear gain. Needs at least one judged grade > 0.
template <typename Ranked, typename Label>
double ndcg(const Ranked& ranked, const std::map<DocId, Label>* judged,
            int depth) {
  std::vector<Grade> ideal;
  if (judged != nullptr) {
    for (const auto& [doc, label] : *judged) {
      if (grade_of(label) > 0) ideal.push_back(grade_of(label));
    }
  }
  detail::require_relevant(ideal.size());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());

  auto discount = [](std::size_t i) { return std::log2(static_cast<double>(i) + 2.0); };
  double dcg = 0.0;
  const std::size_t n = detail::cut(ranked, depth);
  auto it = std::begin(ranked);
  for (std::size_t i = 0; i < n; ++i, ++it) {
    const Grade g = detail::grade_in(judged, doc_of(*it));
    if (g > 0) dcg += static_cast<double>(g) / discount(i);
  }
  double idcg = 0.0;
  const std::size_t m = detail::cut(ideal, depth);
  for (std::size_t i = 0; i < m; ++i) {
    idcg += static_cast<double>(ideal[i]) / discount(i);
  }
  return dcg / idcg;
}

/// Fraction of the top min(K, len) documents present in the judged pool,
/// whatever their grade.
template <typename Ranked, typename Label>
double judged_at_k(const Ranked& ranked, const std::map<DocId, Label>* pool,
                   int depth) {
  const std::size_t n = detail::cut(ranked, depth);
  if (n == 0) {
    throw Error(ErrorKind::kInvalidArgument, "judged@K needs a non-empty ranking");
  }
  std::size_t judged = 0;
  auto it = std::begin(ranked);
  for (std::size_t i = 0; i < n; ++i, ++it) {
    if (pool != nullptr && pool->count(doc_of(*it)) > 0) ++judged;
  }
  return static_cast<double>(judged) / static_cast<double>(n);
}

/// Value of `spec` for one ranked list, or nullopt when the topic is not
/// evaluable for that metric.
template <typename Ranked, typename Label>
std::optional<double> evaluate_topic(const Ranked& ranked,
                                     const std::map<DocId, Label>* judged,
                                     const MetricSpec& spec,
                                     Grade rel_level = 1) {
  const int k = spec.depth;
  switch (spec.kind) {
    case MetricKind::kJudged:
      if (std::size(ranked) == 0) return std::nullopt;
      return judged_at_k(ranked, judged, k);
    case MetricKind::kNdcg: {
      bool any = false;
      if (judged != nullptr) {
        for (const auto& [doc, label] : *judged) any = any || grade_of(label) > 0;
      }
      if (!any) return std::nullopt;
      return ndcg(ranked, judged, k);
    }
    default:
      break;
  }
  if (count_relevant(judged, rel_level) == 0) return std::nullopt;
  switch (spec.kind) {
    case MetricKind::kMap: return average_precision(ranked, judged, k, rel_level);
    case MetricKind::kMrr: return reciprocal_rank(ranked, judged, k, rel_level);
    case MetricKind::kPrecision: return precision_at(ranked, judged, k, rel_level);
    case MetricKind::kRecall: return recall_at(ranked, judged, k, rel_level);
    default: return std::nullopt;
  }
}

/// Evaluates a run against graded or binary qrels.
///
/// For Judged@K the evaluable topics are the run's topics. For every other
/// metric a topic is evaluable iff it has a relevant document in `qrels`;
/// such topics missing from the run score 0. The mean is taken over
/// evaluable topics (0 when there are none).
template <typename Label>
RunEvaluation evaluate_run(const Run& run, const TopicDocMap<Label>& qrels,
                           const MetricSpec& spec, Grade rel_level = 1) {
  if (run.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "run has no documents");
  }
  RunEvaluation result;
  result.metric = spec;
  static const std::vector<RankedDoc> kEmpty;

  auto visit = [&](const TopicId& topic) {
    const std::vector<RankedDoc>* ranked = run.topic(topic);
    auto value = evaluate_topic(ranked ? *ranked : kEmpty, qrels.topic(topic),
                                spec, rel_level);
    if (value) result.per_topic.emplace(topic, *value);
  };

  for (const auto& [topic, docs] : run.topics()) visit(topic);
  if (spec.kind != MetricKind::kJudged) {
    for (const auto& [topic, docs] : qrels.topics()) {
      if (run.topic(topic) == nullptr) visit(topic);
    }
  }

  result.evaluable_topics = result.per_topic.size();
  if (result.evaluable_topics > 0) {
    double sum = 0.0;
    for (const auto& [topic, value] : result.per_topic) sum += value;
    result.mean = sum / static_cast<double>(result.evaluable_topics);
  }
  return result;
}

}  // namespace judgekit
