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

// Judge quality statistics: Cohen's kappa between predicted and gold binary
// labels, and Kendall's tau between the system orderings two sets of
// judgments induce.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "judgekit/metrics.hpp"
#include "judgekit/types.hpp"

namespace judgekit {

/// Prediction vs gold counts; positive = label 1.
struct ConfusionTable {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }

  friend bool operator==(const ConfusionTable&, const ConfusionTable&) = default;
};

enum class MissingPolicy {
  kError,   // a gold pair without a prediction is a MissingPrediction error
  kAsZero,  // absent predictions count as label 0
};

enum class DegeneratePolicy {
  kError,  // pe == 1 raises DegenerateMarginals
  kOne,    // pe == 1 yields 1.0 when po == 1, else 0.0
};

/// Counts over the gold key set. Predictions outside it are ignored.
inline ConfusionTable confusion(const BinaryQrels& pred, const BinaryQrels& gold,
                                MissingPolicy policy = MissingPolicy::kError) {
  ConfusionTable t;
  gold.for_each([&](const TopicId& topic, const DocId& doc, bool truth) {
    const bool* p = pred.find(topic, doc);
    if (p == nullptr && policy == MissingPolicy::kError) {
      throw Error(ErrorKind::kMissingPrediction,
                  "no prediction for " + to_string(PairKey{topic, doc}));
    }
    const bool guess = p != nullptr && *p;
    if (guess && truth) ++t.tp;
    else if (guess && !truth) ++t.fp;
    else if (!guess && truth) ++t.fn;
    else ++t.tn;
  });
  return t;
}

/// kappa = (po - pe) / (1 - pe).
inline double cohen_kappa(const ConfusionTable& t,
                          DegeneratePolicy policy = DegeneratePolicy::kError) {
  const std::uint64_t n = t.total();
  if (n == 0) {
    throw Error(ErrorKind::kInvalidArgument, "kappa of an empty confusion table");
  }
  const double total = static_cast<double>(n);
  const double po = static_cast<double>(t.tp + t.tn) / total;
  // pe == 1 exactly iff both raters put every item in the same single class;
  // decided on integer counts so rounding cannot hide it.
  const bool degenerate = (t.tp == n) || (t.tn == n);
  if (degenerate) {
    if (policy == DegeneratePolicy::kError) {
      throw Error(ErrorKind::kDegenerateMarginals,
                  "both raters use a single class; kappa is undefined");
    }
    return po == 1.0 ? 1.0 : 0.0;
  }
  const double gold_pos = static_cast<double>(t.tp + t.fn);
  const double pred_pos = static_cast<double>(t.tp + t.fp);
  const double gold_neg = static_cast<double>(t.fp + t.tn);
  const double pred_neg = static_cast<double>(t.fn + t.tn);
  const double pe = (gold_pos * pred_pos + gold_neg * pred_neg) / (total * total);
  return (po - pe) / (1.0 - pe);
}

/// Metric values of the same systems under two sets of judgments.
struct OrderingPair {
  std::vector<std::string> systems;
  std::vector<double> values_a;
  std::vector<double> values_b;
};

enum class TauVariant { kB, kA };

namespace detail {

/// Stable merge sort of `idx` by key, returning the number of inversions
/// (pairs moved past a strictly smaller key).
inline std::uint64_t sort_counting_swaps(std::vector<std::size_t>& idx,
                                         const std::vector<double>& key) {
  std::vector<std::size_t> buf(idx.size());
  std::uint64_t swaps = 0;
  for (std::size_t width = 1; width < idx.size(); width *= 2) {
    for (std::size_t lo = 0; lo < idx.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, idx.size());
      const std::size_t hi = std::min(lo + 2 * width, idx.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (key[idx[j]] < key[idx[i]]) {
          swaps += mid - i;
          buf[k++] = idx[j++];
        } else {
          buf[k++] = idx[i++];
        }
      }
      while (i < mid) buf[k++] = idx[i++];
      while (j < hi) buf[k++] = idx[j++];
    }
    std::swap(idx, buf);
  }
  return swaps;
}

/// Sum over runs of equal values (per `same`) of t*(t-1)/2, on a sorted index.
template <typename Same>
std::uint64_t tied_pairs(const std::vector<std::size_t>& idx, Same same) {
  std::uint64_t ties = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= idx.size(); ++i) {
    if (i < idx.size() && same(idx[i - 1], idx[i])) {
      ++run;
    } else {
      ties += run * (run - 1) / 2;
      run = 1;
    }
  }
  return ties;
}

}  // namespace detail

/// Kendall's tau-b (or tau-a) in O(n log n) via Knight's algorithm.
inline double kendall_tau(const OrderingPair& pair,
                          TauVariant variant = TauVariant::kB) {
  const auto& a = pair.values_a;
  const auto& b = pair.values_b;
  if (a.size() != b.size() ||
      (!pair.systems.empty() && pair.systems.size() != a.size())) {
    throw Error(ErrorKind::kInvalidArgument, "ordering lists differ in length");
  }
  if (a.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "tau needs at least two systems");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
      throw Error(ErrorKind::kInvalidArgument, "non-finite metric value");
    }
  }

  const std::uint64_t n = a.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    return a[i] != a[j] ? a[i] < a[j] : b[i] < b[j];
  });
  const std::uint64_t ties_a =
      detail::tied_pairs(idx, [&](std::size_t i, std::size_t j) { return a[i] == a[j]; });
  const std::uint64_t ties_joint = detail::tied_pairs(idx, [&](std::size_t i, std::size_t j) {
    return a[i] == a[j] && b[i] == b[j];
  });
  const std::uint64_t discordant = detail::sort_counting_swaps(idx, b);
  const std::uint64_t ties_b =
      detail::tied_pairs(idx, [&](std::size_t i, std::size_t j) { return b[i] == b[j]; });

  const std::uint64_t total = n * (n - 1) / 2;
  if (ties_a == total || ties_b == total) {
    throw Error(ErrorKind::kAllTied, "every system has the same metric value");
  }
  // C + D = total - ties_a - ties_b + ties_joint
  const double concordant_minus_discordant =
      static_cast<double>(total - ties_a - ties_b + ties_joint) -
      2.0 * static_cast<double>(discordant);
  if (variant == TauVariant::kA) {
    return concordant_minus_discordant / static_cast<double>(total);
  }
  const double denom = std::sqrt(static_cast<double>(total - ties_a) *
                                 static_cast<double>(total - ties_b));
  return std::clamp(concordant_minus_discordant / denom, -1.0, 1.0);
}

inline double kendall_tau_b(const OrderingPair& pair) {
  return kendall_tau(pair, TauVariant::kB);
}

/// Systems sorted by mean descending; equal means by id ascending.
inline std::vector<std::pair<std::string, double>> system_ordering(
    const std::vector<std::pair<std::string, RunEvaluation>>& evals) {
  std::vector<std::pair<std::string, double>> out;
  out.reserve(evals.size());
  for (const auto& [id, eval] : evals) {
    if (!(eval.metric == evals.front().second.metric)) {
      throw Error(ErrorKind::kMetricMismatch,
                  "system " + id + " evaluated with " + eval.metric.name() +
                      ", expected " + evals.front().second.metric.name());
    }
    out.emplace_back(id, eval.mean);
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second > y.second : x.first < y.first;
  });
  return out;
}

/// Pairs up the means of systems evaluated under two judgment sets. Both maps
/// must hold the same systems and metric.
inline OrderingPair make_ordering_pair(
    const std::map<std::string, RunEvaluation>& under_a,
    const std::map<std::string, RunEvaluation>& under_b) {
  OrderingPair pair;
  for (const auto& [id, eval_a] : under_a) {
    auto it = under_b.find(id);
    if (it == under_b.end()) {
      throw Error(ErrorKind::kUnknownSystem,
                  "system " + id + " missing from second evaluation");
    }
    if (!(eval_a.metric == it->second.metric)) {
      throw Error(ErrorKind::kMetricMismatch,
                  "system " + id + " evaluated with different metrics");
    }
    pair.systems.push_back(id);
    pair.values_a.push_back(eval_a.mean);
    pair.values_b.push_back(it->second.mean);
  }
  if (under_b.size() != under_a.size()) {
    throw Error(ErrorKind::kUnknownSystem, "evaluations cover different systems");
  }
  return pair;
}

}  // namespace judgekit
