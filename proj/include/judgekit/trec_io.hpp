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

// Readers and writers for the on-disk formats:
//
//   qrels        topic iteration doc grade
//   run          topic Q0 doc rank score tag
//   score table  topic<TAB>doc<TAB>score<TAB>token<TAB>prob   ("-" = absent)
//
// LF and CRLF line endings are accepted; writers emit LF. Blank lines are
// skipped. Errors carry "<source>:<line>" context.

#pragma once

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "judgekit/types.hpp"

namespace judgekit {

enum class DuplicatePolicy {
  kError,     // conflicting duplicates are rejected
  kLastWins,  // the later line overwrites the earlier one
};

namespace detail {

inline std::string location(std::string_view source, std::size_t line) {
  return std::string(source.empty() ? "<input>" : source) + ":" +
         std::to_string(line);
}

inline std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

inline bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), is_space);
}

/// Reads one line, dropping a trailing CR.
inline bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

inline std::optional<Grade> parse_grade(std::string_view text) {
  Grade value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 0) {
    return std::nullopt;
  }
  return value;
}

inline std::optional<double> parse_finite(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() ||
      !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

/// Shortest decimal that round-trips to the same double.
inline std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

template <typename Fn>
void for_each_line(std::istream& in, std::string_view source, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (read_line(in, line)) {
    ++number;
    if (is_blank(line)) continue;
    try {
      fn(std::string_view(line), number);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kInvalidId) {
        throw Error(ErrorKind::kMalformedLine,
                    location(source, number) + ": " + e.what());
      }
      throw;
    }
  }
}

}  // namespace detail

/// Parses TREC qrels. The iteration column is ignored. Repeating a pair
/// with the same grade is harmless; a differing grade raises DuplicatePair
/// unless `policy` is kLastWins.
inline GradedQrels parse_qrels(std::istream& in,
                               DuplicatePolicy policy = DuplicatePolicy::kError,
                               std::string_view source = {}) {
  GradedQrels qrels;
  detail::for_each_line(in, source, [&](std::string_view line, std::size_t n) {
    auto fields = detail::split_whitespace(line);
    if (fields.size() != 4) {
      throw Error(ErrorKind::kMalformedLine,
                  detail::location(source, n) + ": expected 4 fields, got " +
                      std::to_string(fields.size()));
    }
    auto grade = detail::parse_grade(fields[3]);
    if (!grade) {
      throw Error(ErrorKind::kMalformedLine,
                  detail::location(source, n) + ": grade '" +
                      std::string(fields[3]) + "' is not a non-negative integer");
    }
    TopicId topic(fields[0]);
    DocId doc(fields[2]);
    if (const Grade* existing = qrels.find(topic, doc)) {
      if (*existing == *grade) return;
      if (policy == DuplicatePolicy::kError) {
        throw Error(ErrorKind::kDuplicatePair,
                    detail::location(source, n) + ": " +
                        to_string(PairKey{topic, doc}) + " judged " +
                        std::to_string(*existing) + " and " +
                        std::to_string(*grade));
      }
    }
    qrels.insert_or_assign(topic, doc, *grade);
  });
  return qrels;
}

/// Parses a TREC run. Documents are ordered by score (descending) with ties
/// broken by doc id descending; the rank column is ignored.
inline Run parse_run(std::istream& in, std::string_view source = {}) {
  Run run;
  bool have_tag = false;
  detail::for_each_line(in, source, [&](std::string_view line, std::size_t n) {
    auto fields = detail::split_whitespace(line);
    if (fields.size() != 6) {
      throw Error(ErrorKind::kMalformedLine,
                  detail::location(source, n) + ": expected 6 fields, got " +
                      std::to_string(fields.size()));
    }
    auto score = detail::parse_finite(fields[4]);
    if (!score) {
      throw Error(ErrorKind::kMalformedLine,
                  detail::location(source, n) + ": score '" +
                      std::string(fields[4]) + "' is not a finite real");
    }
    if (!have_tag) {
      run.set_tag(std::string(fields[5]));
      have_tag = true;
    } else if (run.tag() != fields[5]) {
      throw Error(ErrorKind::kInconsistentTag,
                  detail::location(source, n) + ": tag '" +
                      std::string(fields[5]) + "' differs from '" + run.tag() +
                      "'");
    }
    try {
      run.add(TopicId(fields[0]), DocId(fields[2]), *score);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kDuplicateDoc) {
        throw Error(ErrorKind::kDuplicateDoc,
                    detail::location(source, n) + ": doc " +
                        std::string(fields[2]) + " repeated in topic " +
                        std::string(fields[0]));
      }
      throw;
    }
  });
  return run;
}

/// Parses the score-table TSV (no header).
inline ScoreTable parse_scores(std::istream& in, std::string_view source = {}) {
  ScoreTable table;
  detail::for_each_line(in, source, [&](std::string_view line, std::size_t n) {
    auto fields = detail::split_tabs(line);
    if (fields.size() != 5) {
      throw Error(ErrorKind::kMalformedLine,
                  detail::location(source, n) + ": expected 5 tab-separated "
                                                "fields, got " +
                      std::to_string(fields.size()));
    }
    constexpr std::string_view kAbsent = "-";
    ScoreRecord record;
    if (fields[2] != kAbsent) {
      record.score = detail::parse_finite(fields[2]);
      if (!record.score) {
        throw Error(ErrorKind::kMalformedLine,
                    detail::location(source, n) + ": score '" +
                        std::string(fields[2]) + "' is not a finite real");
      }
    }
    if (fields[3] != kAbsent) {
      if (fields[3].empty() ||
          std::any_of(fields[3].begin(), fields[3].end(), detail::is_space)) {
        throw Error(ErrorKind::kMalformedLine,
                    detail::location(source, n) + ": token must be a "
                                                  "non-empty word");
      }
      record.token = std::string(fields[3]);
    }
    if (fields[4] != kAbsent) {
      record.prob = detail::parse_finite(fields[4]);
      if (!record.prob) {
        throw Error(ErrorKind::kMalformedLine,
                    detail::location(source, n) + ": prob '" +
                        std::string(fields[4]) + "' is not a finite real");
      }
      if (*record.prob < 0.0 || *record.prob > 1.0) {
        throw Error(ErrorKind::kProbOutOfRange,
                    detail::location(source, n) + ": prob " +
                        std::string(fields[4]) + " outside [0, 1]");
      }
    }
    if (!record.score && !record.token) {
      throw Error(ErrorKind::kMissingSignal,
                  detail::location(source, n) +
                      ": record has neither score nor token");
    }
    TopicId topic(fields[0]);
    DocId doc(fields[1]);
    if (!table.insert(topic, doc, std::move(record))) {
      throw Error(ErrorKind::kDuplicatePair,
                  detail::location(source, n) + ": " +
                      to_string(PairKey{topic, doc}) + " scored twice");
    }
  });
  return table;
}

/// label = 1 iff grade >= cutoff. The key set is preserved.
inline BinaryQrels binarize(const GradedQrels& qrels, Grade cutoff = 2) {
  if (cutoff < 0) {
    throw Error(ErrorKind::kInvalidArgument, "cutoff must be non-negative");
  }
  BinaryQrels out;
  qrels.for_each([&](const TopicId& t, const DocId& d, Grade g) {
    out.insert(t, d, g >= cutoff);
  });
  return out;
}

inline GradedQrels to_graded(const BinaryQrels& qrels) {
  GradedQrels out;
  qrels.for_each([&](const TopicId& t, const DocId& d, bool label) {
    out.insert(t, d, label ? 1 : 0);
  });
  return out;
}

/// Emits `topic 0 doc label` lines in (topic, doc) order.
template <typename Label>
void write_qrels(std::ostream& out, const TopicDocMap<Label>& qrels) {
  qrels.for_each([&](const TopicId& t, const DocId& d, const Label& label) {
    out << t.str() << " 0 " << d.str() << ' ' << grade_of(label) << '\n';
  });
}

/// Emits the run in canonical order with ranks renumbered from 1.
inline void write_run(std::ostream& out, const Run& run) {
  const std::string tag = run.tag().empty() ? "judgekit" : run.tag();
  for (const auto& [topic, docs] : run.topics()) {
    std::size_t rank = 0;
    for (const auto& entry : docs) {
      out << topic.str() << " Q0 " << entry.doc.str() << ' ' << ++rank << ' '
          << detail::format_real(entry.score) << ' ' << tag << '\n';
    }
  }
}

inline void write_scores(std::ostream& out, const ScoreTable& table) {
  table.for_each([&](const TopicId& t, const DocId& d, const ScoreRecord& r) {
    out << t.str() << '\t' << d.str() << '\t'
        << (r.score ? detail::format_real(*r.score) : "-") << '\t'
        << (r.token ? *r.token : "-") << '\t'
        << (r.prob ? detail::format_real(*r.prob) : "-") << '\n';
  });
}

}  // namespace judgekit
