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

// Evaluation-bias analysis: every system run is scored under every judge's
// qrels and under the human qrels, and the resulting matrix is mined for
// self-preference (a judge favouring the system built on its own scorer),
// family-level value shifts, and over/under-estimation of a baseline.

#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "judgekit/metrics.hpp"
#include "judgekit/parallel.hpp"
#include "judgekit/types.hpp"

namespace judgekit {

/// Reserved row id for the human judgments.
inline constexpr const char* kHumanRow = "human";

struct SystemInfo {
  std::string family;
  std::string display;
};

struct JudgeInfo {
  std::optional<std::string> own_system;
  std::string family;
};

class SystemCatalog {
 public:
  SystemCatalog() = default;
  SystemCatalog(std::map<std::string, SystemInfo> systems,
                std::map<std::string, JudgeInfo> judges)
      : systems_(std::move(systems)), judges_(std::move(judges)) {
    for (const auto& [id, info] : systems_) {
      if (info.family.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "system '" + id + "' has no family");
      }
    }
    for (const auto& [id, info] : judges_) {
      if (id == kHumanRow) {
        throw Error(ErrorKind::kInvalidArgument, "judge id 'human' is reserved");
      }
      if (info.family.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "judge '" + id + "' has no family");
      }
      if (info.own_system && systems_.count(*info.own_system) == 0) {
        throw Error(ErrorKind::kUnknownSystem, "judge '" + id + "' owns unknown system '" +
                                                   *info.own_system + "'");
      }
    }
  }

  /// {"systems": {id: {"family": f, "display": d}},
  ///  "judges":  {id: {"family": f, "own_system": id}}}
  /// `display` defaults to the id; `own_system` may be omitted or null.
  static SystemCatalog from_json(const nlohmann::json& j) {
    try {
      std::map<std::string, SystemInfo> systems;
      for (const auto& [id, s] : j.at("systems").items()) {
        systems.emplace(id, SystemInfo{s.at("family").get<std::string>(),
                                       s.value("display", id)});
      }
      std::map<std::string, JudgeInfo> judges;
      for (const auto& [id, v] : j.at("judges").items()) {
        JudgeInfo info;
        info.family = v.at("family").get<std::string>();
        if (v.contains("own_system") && !v.at("own_system").is_null()) {
          info.own_system = v.at("own_system").get<std::string>();
        }
        judges.emplace(id, std::move(info));
      }
      return SystemCatalog(std::move(systems), std::move(judges));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kInvalidArgument, std::string("bad catalog: ") + e.what());
    }
  }

  const std::map<std::string, SystemInfo>& systems() const noexcept { return systems_; }
  const std::map<std::string, JudgeInfo>& judges() const noexcept { return judges_; }

 private:
  std::map<std::string, SystemInfo> systems_;
  std::map<std::string, JudgeInfo> judges_;
};

struct BiasCell {
  double value = 0.0;
  std::size_t evaluable_topics = 0;

  /// NoEvaluableTopics: value is 0.
  bool flagged() const noexcept { return evaluable_topics == 0; }
};

/// rows[judge or "human"][system].
struct BiasMatrix {
  MetricSpec metric;
  std::map<std::string, std::map<std::string, BiasCell>> rows;

  std::map<std::string, double> values(const std::string& row) const {
    std::map<std::string, double> out;
    for (const auto& [system, cell] : rows.at(row)) out.emplace(system, cell.value);
    return out;
  }
};

/// Scores every run under the human qrels and each judge's qrels.
inline BiasMatrix cross_evaluate(const std::map<std::string, Run>& runs,
                                 const std::map<std::string, BinaryQrels>& judge_qrels,
                                 const BinaryQrels& human_qrels, const MetricSpec& spec,
                                 unsigned threads = 1) {
  if (runs.empty()) throw Error(ErrorKind::kInvalidArgument, "no system runs");
  if (human_qrels.empty()) throw Error(ErrorKind::kInvalidArgument, "human qrels are empty");
  for (const auto& [id, q] : judge_qrels) {
    if (id == kHumanRow) {
      throw Error(ErrorKind::kInvalidArgument, "judge id 'human' is reserved");
    }
    if (q.empty()) throw Error(ErrorKind::kInvalidArgument, "qrels of judge '" + id + "' are empty");
  }
  const auto& first = runs.begin()->second.topics();
  for (const auto& [id, run] : runs) {
    bool same = run.topics().size() == first.size() &&
                std::equal(first.begin(), first.end(), run.topics().begin(),
                           [](const auto& a, const auto& b) { return a.first == b.first; });
    if (!same) {
      throw Error(ErrorKind::kInvalidArgument,
                  "run '" + id + "' covers a different topic set than '" +
                      runs.begin()->first + "'");
    }
  }

  std::vector<std::pair<std::string, const BinaryQrels*>> row_qrels;
  row_qrels.emplace_back(kHumanRow, &human_qrels);
  for (const auto& [id, q] : judge_qrels) row_qrels.emplace_back(id, &q);
  std::vector<const std::pair<const std::string, Run>*> systems;
  for (const auto& entry : runs) systems.push_back(&entry);

  std::vector<BiasCell> cells(row_qrels.size() * systems.size());
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    const auto& qrels = *row_qrels[i / systems.size()].second;
    const auto& run = systems[i % systems.size()]->second;
    RunEvaluation e = evaluate_run(run, qrels, spec);
    cells[i] = BiasCell{e.mean, e.evaluable_topics};
  });

  BiasMatrix m;
  m.metric = spec;
  for (std::size_t r = 0; r < row_qrels.size(); ++r) {
    auto& row = m.rows[row_qrels[r].first];
    for (std::size_t s = 0; s < systems.size(); ++s) {
      row.emplace(systems[s]->first, cells[r * systems.size() + s]);
    }
  }
  return m;
}

/// Rank 1 = largest value; exact ties share the average of their positions.
inline std::map<std::string, double> rank_systems(const std::map<std::string, double>& row) {
  if (row.empty()) throw Error(ErrorKind::kInvalidArgument, "cannot rank an empty row");
  std::vector<std::pair<double, std::string>> sorted;
  for (const auto& [id, v] : row) sorted.emplace_back(v, id);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  std::map<std::string, double> ranks;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1].first == sorted[i].first) ++j;
    // positions i+1 .. j+1 share their mean
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks.emplace(sorted[k].second, rank);
    i = j + 1;
  }
  return ranks;
}

struct SelfPreference {
  std::string judge;
  std::string own_system;
  double human_rank = 0.0;
  double judge_rank = 0.0;
  /// human_rank - judge_rank; positive = the judge ranks its own system higher.
  double delta_rank = 0.0;
  double human_value = 0.0;
  double judge_value = 0.0;
};

/// Mean shift of a judge family's values on a system family, vs human.
struct FamilyDelta {
  std::string judge_family;
  std::string system_family;
  double mean_value_delta = 0.0;
  /// Mean of (human rank - judge rank); positive = ranked higher by judges.
  double mean_rank_delta = 0.0;
  std::size_t cells = 0;
};

struct BaselineDelta {
  std::string judge;
  double human_value = 0.0;
  double judge_value = 0.0;
  double delta = 0.0;
};

struct BiasReport {
  MetricSpec metric;
  std::vector<SelfPreference> self_preference;
  std::vector<FamilyDelta> family;
  std::optional<std::string> baseline;
  std::vector<BaselineDelta> baseline_deltas;
};

namespace detail {

inline void check_matrix_against(const BiasMatrix& m, const SystemCatalog& catalog) {
  if (m.rows.count(kHumanRow) == 0) {
    throw Error(ErrorKind::kInvalidArgument, "bias matrix lacks the human row");
  }
  for (const auto& [judge, row] : m.rows) {
    if (judge != kHumanRow && catalog.judges().count(judge) == 0) {
      throw Error(ErrorKind::kUnknownJudge, "judge '" + judge + "' is not in the catalog");
    }
    for (const auto& [system, cell] : row) {
      if (catalog.systems().count(system) == 0) {
        throw Error(ErrorKind::kUnknownSystem, "system '" + system + "' is not in the catalog");
      }
    }
  }
}

}  // namespace detail

/// Own-system rank shifts per judge, plus family-level aggregates over every
/// (judge, system) cell. Judges without an own system only feed the latter.
inline std::pair<std::vector<SelfPreference>, std::vector<FamilyDelta>> self_preference(
    const BiasMatrix& m, const SystemCatalog& catalog) {
  detail::check_matrix_against(m, catalog);
  const auto human_values = m.values(kHumanRow);
  const auto human_ranks = rank_systems(human_values);

  std::vector<SelfPreference> prefs;
  struct Acc {
    double value = 0.0;
    double rank = 0.0;
    std::size_t n = 0;
  };
  std::map<std::pair<std::string, std::string>, Acc> acc;

  for (const auto& [judge, row] : m.rows) {
    if (judge == kHumanRow) continue;
    const JudgeInfo& info = catalog.judges().at(judge);
    const auto values = m.values(judge);
    const auto ranks = rank_systems(values);
    if (info.own_system) {
      const std::string& own = *info.own_system;
      if (values.count(own) == 0) {
        throw Error(ErrorKind::kUnknownSystem,
                    "own system '" + own + "' of judge '" + judge + "' has no run");
      }
      prefs.push_back(SelfPreference{judge, own, human_ranks.at(own), ranks.at(own),
                                     human_ranks.at(own) - ranks.at(own),
                                     human_values.at(own), values.at(own)});
    }
    for (const auto& [system, value] : values) {
      Acc& a = acc[{info.family, catalog.systems().at(system).family}];
      a.value += value - human_values.at(system);
      a.rank += human_ranks.at(system) - ranks.at(system);
      ++a.n;
    }
  }

  std::vector<FamilyDelta> family;
  for (const auto& [key, a] : acc) {
    family.push_back(FamilyDelta{key.first, key.second, a.value / static_cast<double>(a.n),
                                 a.rank / static_cast<double>(a.n), a.n});
  }
  return {std::move(prefs), std::move(family)};
}

/// delta(j) = rows[j][baseline] - rows["human"][baseline].
inline std::vector<BaselineDelta> baseline_overestimation(const BiasMatrix& m,
                                                          const std::string& baseline) {
  std::vector<BaselineDelta> out;
  auto human = m.rows.find(kHumanRow);
  if (human == m.rows.end()) {
    throw Error(ErrorKind::kInvalidArgument, "bias matrix lacks the human row");
  }
  auto base = human->second.find(baseline);
  if (base == human->second.end()) {
    throw Error(ErrorKind::kUnknownSystem, "baseline '" + baseline + "' not in matrix");
  }
  for (const auto& [judge, row] : m.rows) {
    if (judge == kHumanRow) continue;
    auto cell = row.find(baseline);
    if (cell == row.end()) {
      throw Error(ErrorKind::kUnknownSystem,
                  "baseline '" + baseline + "' missing from row '" + judge + "'");
    }
    out.push_back(BaselineDelta{judge, base->second.value, cell->second.value,
                                cell->second.value - base->second.value});
  }
  return out;
}

inline BiasReport build_report(const BiasMatrix& m, const SystemCatalog& catalog,
                               const std::optional<std::string>& baseline = std::nullopt) {
  BiasReport report;
  report.metric = m.metric;
  auto [prefs, family] = self_preference(m, catalog);
  report.self_preference = std::move(prefs);
  report.family = std::move(family);
  report.baseline = baseline;
  if (baseline) report.baseline_deltas = baseline_overestimation(m, *baseline);
  return report;
}

struct ScatterRow {
  std::string judge;
  std::string system;
  std::string family;
  double human_value = 0.0;
  double judge_value = 0.0;
  double human_rank = 0.0;
  double judge_rank = 0.0;
};

/// One row per (judge, system), sorted by judge then system.
inline std::vector<ScatterRow> scatter_data(const BiasMatrix& m, const SystemCatalog& catalog) {
  detail::check_matrix_against(m, catalog);
  const auto human_values = m.values(kHumanRow);
  const auto human_ranks = rank_systems(human_values);
  std::vector<ScatterRow> out;
  for (const auto& [judge, row] : m.rows) {
    if (judge == kHumanRow) continue;
    const auto values = m.values(judge);
    const auto ranks = rank_systems(values);
    for (const auto& [system, value] : values) {
      out.push_back(ScatterRow{judge, system, catalog.systems().at(system).family,
                               human_values.at(system), value, human_ranks.at(system),
                               ranks.at(system)});
    }
  }
  return out;
}

namespace detail {

inline std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace detail

inline void write_scatter_csv(std::ostream& out, const std::vector<ScatterRow>& rows) {
  out << "judge,system,family,human_value,judge_value,human_rank,judge_rank\n";
  for (const auto& r : rows) {
    out << r.judge << ',' << r.system << ',' << r.family << ',' << detail::fixed(r.human_value)
        << ',' << detail::fixed(r.judge_value) << ',' << detail::fixed(r.human_rank, 1) << ','
        << detail::fixed(r.judge_rank, 1) << '\n';
  }
}

inline nlohmann::json to_json(const BiasMatrix& m) {
  nlohmann::json rows = nlohmann::json::object();
  for (const auto& [judge, row] : m.rows) {
    for (const auto& [system, cell] : row) {
      rows[judge][system] = {{"value", cell.value},
                             {"evaluable_topics", cell.evaluable_topics},
                             {"no_evaluable_topics", cell.flagged()}};
    }
  }
  return {{"metric", m.metric.name()}, {"rows", rows}};
}

inline nlohmann::json to_json(const BiasReport& r) {
  nlohmann::json j;
  j["metric"] = r.metric.name();
  j["self_preference"] = nlohmann::json::array();
  for (const auto& p : r.self_preference) {
    j["self_preference"].push_back({{"judge", p.judge},
                                    {"own_system", p.own_system},
                                    {"human_rank", p.human_rank},
                                    {"judge_rank", p.judge_rank},
                                    {"delta_rank", p.delta_rank},
                                    {"human_value", p.human_value},
                                    {"judge_value", p.judge_value}});
  }
  j["family"] = nlohmann::json::array();
  for (const auto& f : r.family) {
    j["family"].push_back({{"judge_family", f.judge_family},
                           {"system_family", f.system_family},
                           {"mean_value_delta", f.mean_value_delta},
                           {"mean_rank_delta", f.mean_rank_delta},
                           {"cells", f.cells}});
  }
  j["baseline"] = r.baseline ? nlohmann::json(*r.baseline) : nlohmann::json();
  j["baseline_deltas"] = nlohmann::json::array();
  for (const auto& b : r.baseline_deltas) {
    j["baseline_deltas"].push_back({{"judge", b.judge},
                                    {"human_value", b.human_value},
                                    {"judge_value", b.judge_value},
                                    {"delta", b.delta}});
  }
  j["notes"] = {
      {"delta_rank", "human rank minus judge rank of the judge's own system; "
                     "positive means the judge ranks it higher than humans do"},
      {"mean_value_delta", "mean over cells of judge value minus human value"}};
  return j;
}

/// Plain-text rendering of the report.
inline void write_report_text(std::ostream& out, const BiasReport& r) {
  out << "metric: " << r.metric.name() << "\n\n";
  out << "self-preference (rank of own system; delta = human - judge)\n";
  out << "judge\town_system\thuman_rank\tjudge_rank\tdelta_rank\thuman_value\tjudge_value\n";
  for (const auto& p : r.self_preference) {
    out << p.judge << '\t' << p.own_system << '\t' << detail::fixed(p.human_rank, 1) << '\t'
        << detail::fixed(p.judge_rank, 1) << '\t' << detail::fixed(p.delta_rank, 1) << '\t'
        << detail::fixed(p.human_value) << '\t' << detail::fixed(p.judge_value) << '\n';
  }
  out << "\nfamily deltas (judge - human)\n";
  out << "judge_family\tsystem_family\tmean_value_delta\tmean_rank_delta\tcells\n";
  for (const auto& f : r.family) {
    out << f.judge_family << '\t' << f.system_family << '\t' << detail::fixed(f.mean_value_delta)
        << '\t' << detail::fixed(f.mean_rank_delta) << '\t' << f.cells << '\n';
  }
  if (r.baseline) {
    out << "\nbaseline " << *r.baseline << " (judge - human)\n";
    out << "judge\thuman_value\tjudge_value\tdelta\n";
    for (const auto& b : r.baseline_deltas) {
      out << b.judge << '\t' << detail::fixed(b.human_value) << '\t'
          << detail::fixed(b.judge_value) << '\t' << detail::fixed(b.delta) << '\n';
    }
  }
}

}  // namespace judgekit
