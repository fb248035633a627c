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

// Core value types shared by every judgekit module: identifiers, the
// (topic, doc) keyed judgment containers, runs and score tables.

#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace judgekit {

enum class ErrorKind {
  // trec_io
  kMalformedLine,
  kDuplicatePair,
  kDuplicateDoc,
  kInconsistentTag,
  kMissingSignal,
  kProbOutOfRange,
  kInvalidId,
  // judge_adapt
  kMissingToken,
  kUnknownToken,
  kMissingScore,
  kEmptyGrid,
  kMissingSource,
  // metrics
  kNoRelevant,
  kNoEvaluableTopics,
  // agreement
  kMissingPrediction,
  kDegenerateMarginals,
  kAllTied,
  kMetricMismatch,
  // bias_analysis
  kUnknownJudge,
  kUnknownSystem,
  // generic
  kInvalidArgument,
  kIo,
  // cli usage
  kUnknownVerb,
  kUnknownOption,
  kMissingRequired,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMalformedLine: return "MalformedLine";
    case ErrorKind::kDuplicatePair: return "DuplicatePair";
    case ErrorKind::kDuplicateDoc: return "DuplicateDoc";
    case ErrorKind::kInconsistentTag: return "InconsistentTag";
    case ErrorKind::kMissingSignal: return "MissingSignal";
    case ErrorKind::kProbOutOfRange: return "ProbOutOfRange";
    case ErrorKind::kInvalidId: return "InvalidId";
    case ErrorKind::kMissingToken: return "MissingToken";
    case ErrorKind::kUnknownToken: return "UnknownToken";
    case ErrorKind::kMissingScore: return "MissingScore";
    case ErrorKind::kEmptyGrid: return "EmptyGrid";
    case ErrorKind::kMissingSource: return "MissingSource";
    case ErrorKind::kNoRelevant: return "NoRelevant";
    case ErrorKind::kNoEvaluableTopics: return "NoEvaluableTopics";
    case ErrorKind::kMissingPrediction: return "MissingPrediction";
    case ErrorKind::kDegenerateMarginals: return "DegenerateMarginals";
    case ErrorKind::kAllTied: return "AllTied";
    case ErrorKind::kMetricMismatch: return "MetricMismatch";
    case ErrorKind::kUnknownJudge: return "UnknownJudge";
    case ErrorKind::kUnknownSystem: return "UnknownSystem";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kIo: return "Io";
    case ErrorKind::kUnknownVerb: return "UnknownVerb";
    case ErrorKind::kUnknownOption: return "UnknownOption";
    case ErrorKind::kMissingRequired: return "MissingRequired";
  }
  return "Unknown";
}

/// Usage errors map to exit status 2 in the CLI, everything else to 1.
inline bool is_usage_error(ErrorKind kind) {
  return kind == ErrorKind::kUnknownVerb ||
         kind == ErrorKind::kUnknownOption ||
         kind == ErrorKind::kMissingRequired;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

}  // namespace detail

/// Whitespace-free, non-empty identifier. The tag keeps topic and document
/// identifiers from being mixed up.
template <typename Tag>
class Token {
 public:
  Token() = delete;
  explicit Token(std::string value) : value_(std::move(value)) {
    if (value_.empty()) {
      throw Error(ErrorKind::kInvalidId,
                  std::string(Tag::kName) + " must be non-empty");
    }
    if (std::any_of(value_.begin(), value_.end(), detail::is_space)) {
      throw Error(ErrorKind::kInvalidId, std::string(Tag::kName) + " '" +
                                             value_ +
                                             "' contains whitespace");
    }
  }
  explicit Token(std::string_view value) : Token(std::string(value)) {}
  explicit Token(const char* value) : Token(std::string(value)) {}

  const std::string& str() const noexcept { return value_; }

  friend bool operator==(const Token&, const Token&) = default;
  friend std::strong_ordering operator<=>(const Token& a, const Token& b) {
    return a.value_.compare(b.value_) <=> 0;
  }

 private:
  std::string value_;
};

struct TopicTag {
  static constexpr const char* kName = "topic id";
};
struct DocTag {
  static constexpr const char* kName = "doc id";
};

using TopicId = Token<TopicTag>;
using DocId = Token<DocTag>;

struct PairKey {
  TopicId topic;
  DocId doc;

  friend bool operator==(const PairKey&, const PairKey&) = default;
  friend auto operator<=>(const PairKey&, const PairKey&) = default;
};

inline std::string to_string(const PairKey& key) {
  return "(" + key.topic.str() + ", " + key.doc.str() + ")";
}

/// Ordered (topic -> doc -> value) container. Iteration order is the
/// lexicographic (topic, doc) order, which every writer relies on.
template <typename Value>
class TopicDocMap {
 public:
  using DocMap = std::map<DocId, Value>;
  using TopicMap = std::map<TopicId, DocMap>;

  /// Returns false if the pair was already present (the value is untouched).
  bool insert(const TopicId& topic, const DocId& doc, Value value) {
    auto [it, inserted] = topics_[topic].try_emplace(doc, std::move(value));
    if (inserted) ++size_;
    return inserted;
  }

  void insert_or_assign(const TopicId& topic, const DocId& doc, Value value) {
    auto [it, inserted] = topics_[topic].insert_or_assign(doc, std::move(value));
    if (inserted) ++size_;
  }

  const Value* find(const TopicId& topic, const DocId& doc) const {
    auto t = topics_.find(topic);
    if (t == topics_.end()) return nullptr;
    auto d = t->second.find(doc);
    return d == t->second.end() ? nullptr : &d->second;
  }
  const Value* find(const PairKey& key) const { return find(key.topic, key.doc); }

  bool contains(const TopicId& topic, const DocId& doc) const {
    return find(topic, doc) != nullptr;
  }

  /// Judgments for one topic, or nullptr when the topic is absent.
  const DocMap* topic(const TopicId& topic) const {
    auto t = topics_.find(topic);
    return t == topics_.end() ? nullptr : &t->second;
  }

  const TopicMap& topics() const noexcept { return topics_; }
  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  /// Visits every entry in (topic, doc) order.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [topic, docs] : topics_) {
      for (const auto& [doc, value] : docs) fn(topic, doc, value);
    }
  }

  friend bool operator==(const TopicDocMap& a, const TopicDocMap& b) {
    return a.size_ == b.size_ && a.topics_ == b.topics_;
  }

 private:
  TopicMap topics_;
  std::size_t size_ = 0;
};

using Grade = std::int64_t;
using GradedQrels = TopicDocMap<Grade>;
/// Labels are 0/1 by construction.
using BinaryQrels = TopicDocMap<bool>;

inline Grade grade_of(Grade g) { return g; }
inline Grade grade_of(bool label) { return label ? 1 : 0; }

struct RankedDoc {
  DocId doc;
  double score;

  friend bool operator==(const RankedDoc&, const RankedDoc&) = default;
};

/// trec_eval ordering: score descending, then doc id descending.
inline bool canonical_before(const RankedDoc& a, const RankedDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return b.doc < a.doc;
}

/// One system's ranked output. Each topic list holds unique documents with
/// finite scores and is kept in canonical order.
class Run {
 public:
  Run() = default;
  explicit Run(std::string tag) : tag_(std::move(tag)) {}

  const std::string& tag() const noexcept { return tag_; }
  void set_tag(std::string tag) { tag_ = std::move(tag); }

  /// Adds a document; throws DuplicateDoc or InvalidArgument (non-finite).
  void add(const TopicId& topic, DocId doc, double score) {
    if (!std::isfinite(score)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "non-finite score for " + topic.str() + "/" + doc.str());
    }
    auto& docs = topics_[topic];
    auto& seen = seen_[topic];
    if (!seen.insert(doc).second) {
      throw Error(ErrorKind::kDuplicateDoc,
                  "doc " + doc.str() + " appears twice in topic " + topic.str());
    }
    RankedDoc entry{std::move(doc), score};
    docs.insert(std::upper_bound(docs.begin(), docs.end(), entry,
                                 canonical_before),
                std::move(entry));
  }

  const std::map<TopicId, std::vector<RankedDoc>>& topics() const noexcept {
    return topics_;
  }

  const std::vector<RankedDoc>* topic(const TopicId& topic) const {
    auto it = topics_.find(topic);
    return it == topics_.end() ? nullptr : &it->second;
  }

  bool empty() const noexcept { return topics_.empty(); }

  std::size_t size() const noexcept {
    std::size_t n = 0;
    for (const auto& [t, docs] : topics_) n += docs.size();
    return n;
  }

  friend bool operator==(const Run& a, const Run& b) {
    return a.tag_ == b.tag_ && a.topics_ == b.topics_;
  }

 private:
  std::string tag_;
  std::map<TopicId, std::vector<RankedDoc>> topics_;
  std::map<TopicId, std::set<DocId>> seen_;
};

/// Raw output of a pointwise scorer for one (topic, doc) pair. At least one
/// of score and token is present; prob lies in [0, 1].
struct ScoreRecord {
  std::optional<double> score;
  std::optional<std::string> token;
  std::optional<double> prob;

  friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

using ScoreTable = TopicDocMap<ScoreRecord>;

}  // namespace judgekit
