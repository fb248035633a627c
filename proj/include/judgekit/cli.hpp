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

// Command-line front end. `parse_args` validates argv against a per-verb
// option table (merging an optional JSON config, command-line flags win) and
// `execute` runs the verb. Exit status: 0 success, 1 domain error, 2 usage
// error. File outputs are written to a temporary sibling and renamed into
// place once every output of the command has been computed.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "judgekit/agreement.hpp"
#include "judgekit/bias_analysis.hpp"
#include "judgekit/judge_adapt.hpp"
#include "judgekit/metrics.hpp"
#include "judgekit/parallel.hpp"
#include "judgekit/trec_io.hpp"
#include "judgekit/types.hpp"

namespace judgekit::cli {

inline constexpr const char* kVersion = "judgekit 0.1.0";

struct OptionSpec {
  std::string name;
  bool takes_value = true;
  bool required = false;
  std::string help;
};

struct VerbSpec {
  std::string name;
  std::string summary;
  std::vector<OptionSpec> options;

  const OptionSpec* find(std::string_view option) const {
    for (const auto& o : options) {
      if (o.name == option) return &o;
    }
    return nullptr;
  }
};

inline const std::vector<VerbSpec>& verbs() {
  static const std::vector<VerbSpec> kVerbs = {
      {"judge",
       "turn a score table into binary qrels",
       {{"scores", true, true, "score-table TSV"},
        {"strategy", true, true, "direct | threshold"},
        {"theta", true, false, "threshold (threshold strategy)"},
        {"transfer", true, false, "thresholds JSON written by `transfer`"},
        {"dataset", true, false, "target dataset id to look up in --transfer"},
        {"token-map", true, false, "JSON object token -> 0|1 (direct strategy)"},
        {"out", true, true, "output qrels"}}},
      {"sweep",
       "evaluate a threshold grid against gold qrels",
       {{"scores", true, true, "score-table TSV"},
        {"gold", true, true, "gold qrels"},
        {"gold-cutoff", true, false, "grade >= cutoff is relevant (default 1)"},
        {"grid", true, false, "prob | unbounded | lo:hi:step | v1,v2,... (default prob)"},
        {"objective", true, false, "kappa | tau (default kappa)"},
        {"metric", true, false, "metric for the tau objective (default map@100)"},
        {"runs", true, false, "directory of <system>.run files (tau objective)"},
        {"tau-variant", true, false, "b | a (default b)"},
        {"missing", true, false, "error | zero (default error)"},
        {"degenerate", true, false, "error | one (default error)"},
        {"out", true, true, "sweep result JSON"}}},
      {"transfer",
       "assign each target dataset the threshold selected on its source",
       {{"sweeps", true, true, "directory of <dataset>.sweep.json files"},
        {"plan", true, false, "preset name or JSON {target: source} (default trecdl-paper)"},
        {"out", true, true, "thresholds JSON {target: theta}"}}},
      {"eval",
       "evaluate a run with trec_eval-compatible metrics",
       {{"run", true, true, "TREC run"},
        {"qrels", true, true, "qrels"},
        {"metric", true, true, "comma-separated metrics, e.g. map@100,mrr@10"},
        {"rel-level", true, false, "minimum relevant grade (default 1)"},
        {"per-topic", false, false, "also print per-topic values"},
        {"out", true, false, "write to this file instead of stdout"}}},
      {"agree",
       "Cohen's kappa between predicted and gold qrels",
       {{"pred", true, true, "predicted binary qrels"},
        {"gold", true, true, "gold qrels"},
        {"gold-cutoff", true, false, "grade >= cutoff is relevant (default 1)"},
        {"missing", true, false, "error | zero (default error)"},
        {"degenerate", true, false, "error | one (default error)"},
        {"judge", true, false, "judge name in the report (default judge)"},
        {"dataset", true, false, "dataset name in the report (default -)"},
        {"out", true, false, "write to this file instead of stdout"}}},
      {"rankcorr",
       "Kendall's tau between system orderings under gold and predicted qrels",
       {{"runs", true, true, "directory of <system>.run files"},
        {"pred", true, true, "predicted binary qrels"},
        {"gold", true, true, "gold qrels"},
        {"gold-cutoff", true, false, "grade >= cutoff is relevant (default 1)"},
        {"metric", true, false, "metric (default map@100)"},
        {"tau-variant", true, false, "b | a (default b)"},
        {"judge", true, false, "judge name in the report (default judge)"},
        {"dataset", true, false, "dataset name in the report (default -)"},
        {"out", true, false, "write to this file instead of stdout"}}},
      {"bias",
       "cross-evaluate systems under every judge and report bias statistics",
       {{"catalog", true, true, "catalog JSON"},
        {"runs", true, true, "directory of <system>.run files"},
        {"judges", true, true, "directory of <judge>.qrels files"},
        {"human", true, true, "human qrels"},
        {"human-cutoff", true, false, "grade >= cutoff is relevant (default 1)"},
        {"metric", true, false, "metric (default map@100)"},
        {"baseline", true, false, "system id whose over/under-estimation to report"},
        {"out-dir", true, true, "directory for scatter.csv, report.json, matrix.json, report.txt"}}},
      {"convert",
       "binarize graded qrels",
       {{"qrels", true, true, "graded qrels"},
        {"cutoff", true, false, "grade >= cutoff becomes 1 (default 2)"},
        {"out", true, true, "binary qrels"}}},
  };
  return kVerbs;
}

inline const VerbSpec* find_verb(std::string_view name) {
  for (const auto& v : verbs()) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

struct Command {
  std::string verb;
  std::map<std::string, std::string> options;
  bool help = false;
  bool version = false;

  bool has(const std::string& key) const { return options.count(key) > 0; }
  const std::string& get(const std::string& key) const { return options.at(key); }
  std::string get_or(const std::string& key, const std::string& fallback) const {
    auto it = options.find(key);
    return it == options.end() ? fallback : it->second;
  }
};

inline std::string usage(const VerbSpec* verb = nullptr) {
  std::ostringstream out;
  if (verb == nullptr) {
    out << "usage: judgekit <verb> [options]\n\nverbs:\n";
    for (const auto& v : verbs()) out << "  " << v.name << std::string(10 - v.name.size(), ' ')
                                      << v.summary << '\n';
    out << "\nglobal options:\n"
           "  --config FILE   JSON file supplying any option (flags override it)\n"
           "  --help          show help (after a verb: help for that verb)\n"
           "  --version       print the version\n"
           "\nJUDGEKIT_THREADS caps the number of worker threads.\n";
    return out.str();
  }
  out << "usage: judgekit " << verb->name << " [options]\n" << verb->summary << "\n\noptions:\n";
  for (const auto& o : verb->options) {
    std::string flag = "--" + o.name + (o.takes_value ? " VALUE" : "");
    out << "  " << flag << std::string(flag.size() < 24 ? 24 - flag.size() : 1, ' ') << o.help
        << (o.required ? " [required]" : "") << '\n';
  }
  out << "  --config FILE           JSON config\n";
  return out.str();
}

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kInvalidArgument, path.string() + ": " + e.what());
  }
}

inline std::string json_scalar(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return judgekit::detail::format_real(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  throw Error(ErrorKind::kInvalidArgument, "config value for '" + key + "' must be a scalar");
}

/// Config keys may be flat or nested under the verb name; sections named
/// after other verbs are ignored.
inline void merge_config(Command& cmd, const VerbSpec& verb, const std::string& path) {
  const nlohmann::json config = read_json(path);
  if (!config.is_object()) {
    throw Error(ErrorKind::kInvalidArgument, path + ": config must be a JSON object");
  }
  auto apply = [&](const std::string& key, const nlohmann::json& value) {
    const OptionSpec* spec = verb.find(key);
    if (spec == nullptr) {
      throw Error(ErrorKind::kUnknownOption,
                  "config " + path + ": unknown option '" + key + "' for " + verb.name);
    }
    if (cmd.has(key)) return;
    if (!spec->takes_value) {
      if (!value.is_boolean()) {
        throw Error(ErrorKind::kInvalidArgument, "config flag '" + key + "' must be boolean");
      }
      if (value.get<bool>()) cmd.options[key] = "true";
      return;
    }
    cmd.options[key] = json_scalar(value, key);
  };
  for (const auto& [key, value] : config.items()) {
    if (key == verb.name && value.is_object()) {
      for (const auto& [k, v] : value.items()) apply(k, v);
    } else if (find_verb(key) != nullptr && value.is_object()) {
      continue;
    } else {
      apply(key, value);
    }
  }
}

inline void require(const Command& cmd, const std::string& key, const std::string& why) {
  if (!cmd.has(key)) {
    throw Error(ErrorKind::kMissingRequired, "--" + key + " is required " + why);
  }
}

inline void check_choice(const Command& cmd, const std::string& key,
                         std::initializer_list<std::string_view> choices) {
  if (!cmd.has(key)) return;
  for (auto c : choices) {
    if (cmd.get(key) == c) return;
  }
  std::string list;
  for (auto c : choices) list += (list.empty() ? "" : " | ") + std::string(c);
  throw Error(ErrorKind::kInvalidArgument,
              "--" + key + " must be one of " + list + ", got '" + cmd.get(key) + "'");
}

}  // namespace detail

/// Validates argv (without the program name) into a Command.
inline Command parse_args(const std::vector<std::string>& args) {
  Command cmd;
  if (args.empty()) {
    throw Error(ErrorKind::kMissingRequired, "no verb given (see --help)");
  }
  if (args[0] == "--help" || args[0] == "-h") {
    cmd.help = true;
    return cmd;
  }
  if (args[0] == "--version") {
    cmd.version = true;
    return cmd;
  }
  const VerbSpec* verb = find_verb(args[0]);
  if (verb == nullptr) {
    throw Error(ErrorKind::kUnknownVerb, "unknown verb '" + args[0] + "' (see --help)");
  }
  cmd.verb = verb->name;

  std::optional<std::string> config;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& arg = args[i];
    if (arg == "--help" || arg == "-h") {
      cmd.help = true;
      return cmd;
    }
    if (arg == "--version") {
      cmd.version = true;
      return cmd;
    }
    if (arg.rfind("--", 0) != 0 || arg.size() == 2) {
      throw Error(ErrorKind::kUnknownOption, "unexpected argument '" + arg + "'");
    }
    std::string name = arg.substr(2);
    std::optional<std::string> inline_value;
    if (auto eq = name.find('='); eq != std::string::npos) {
      inline_value = name.substr(eq + 1);
      name = name.substr(0, eq);
    }
    const bool is_config = name == "config";
    const OptionSpec* spec = verb->find(name);
    if (spec == nullptr && !is_config) {
      throw Error(ErrorKind::kUnknownOption,
                  "unknown option '--" + name + "' for " + verb->name);
    }
    std::string value = "true";
    if (is_config || spec->takes_value) {
      if (inline_value) {
        value = *inline_value;
      } else if (i + 1 < args.size()) {
        value = args[++i];
      } else {
        throw Error(ErrorKind::kMissingRequired, "--" + name + " needs a value");
      }
    } else if (inline_value) {
      throw Error(ErrorKind::kUnknownOption, "--" + name + " takes no value");
    }
    if (is_config) {
      config = value;
    } else {
      cmd.options[name] = value;
    }
  }
  if (config) detail::merge_config(cmd, *verb, *config);

  for (const auto& o : verb->options) {
    if (o.required) detail::require(cmd, o.name, "for " + verb->name);
  }
  if (cmd.verb == "judge") {
    detail::check_choice(cmd, "strategy", {"direct", "threshold"});
    if (cmd.get("strategy") == "threshold") {
      if (!cmd.has("theta") && !cmd.has("transfer")) {
        throw Error(ErrorKind::kMissingRequired,
                    "--strategy threshold needs --theta or --transfer");
      }
      if (cmd.has("transfer")) detail::require(cmd, "dataset", "with --transfer");
    }
  }
  if (cmd.verb == "sweep") {
    detail::check_choice(cmd, "objective", {"kappa", "tau"});
    if (cmd.get_or("objective", "kappa") == "tau") {
      detail::require(cmd, "runs", "for the tau objective");
    }
  }
  detail::check_choice(cmd, "missing", {"error", "zero"});
  detail::check_choice(cmd, "degenerate", {"error", "one"});
  detail::check_choice(cmd, "tau-variant", {"b", "a"});
  return cmd;
}

namespace detail {

/// Buffered outputs, committed together after the command succeeds.
class OutputSet {
 public:
  void add(std::filesystem::path path, std::string content) {
    files_.emplace_back(std::move(path), std::move(content));
  }

  /// Writes each file to "<path>.tmp" and renames it over the target.
  void commit() const {
    for (const auto& [path, content] : files_) {
      std::filesystem::path tmp = path;
      tmp += ".tmp";
      {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) {
          std::filesystem::remove(tmp);
          throw Error(ErrorKind::kIo, "failed writing " + tmp.string());
        }
      }
      std::error_code ec;
      std::filesystem::rename(tmp, path, ec);
      if (ec) {
        std::filesystem::remove(tmp);
        throw Error(ErrorKind::kIo, "cannot move " + tmp.string() + " to " + path.string());
      }
    }
  }

 private:
  std::vector<std::pair<std::filesystem::path, std::string>> files_;
};

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  return in;
}

inline GradedQrels load_qrels(const std::string& path) {
  auto in = open_input(path);
  return parse_qrels(in, DuplicatePolicy::kError, path);
}

inline Run load_run(const std::string& path) {
  auto in = open_input(path);
  return parse_run(in, path);
}

inline ScoreTable load_scores(const std::string& path) {
  auto in = open_input(path);
  return parse_scores(in, path);
}

inline Grade parse_grade_option(const Command& cmd, const std::string& key, Grade fallback) {
  if (!cmd.has(key)) return fallback;
  auto g = judgekit::detail::parse_grade(cmd.get(key));
  if (!g) {
    throw Error(ErrorKind::kInvalidArgument, "--" + key + " must be a non-negative integer");
  }
  return *g;
}

inline double parse_real_option(const Command& cmd, const std::string& key) {
  auto v = judgekit::detail::parse_finite(cmd.get(key));
  if (!v) throw Error(ErrorKind::kInvalidArgument, "--" + key + " must be a finite real");
  return *v;
}

/// Files in `dir` ending in `suffix`, keyed by the name without the suffix.
inline std::map<std::string, std::filesystem::path> list_dir(const std::string& dir,
                                                             const std::string& suffix) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorKind::kIo, dir + " is not a directory");
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      out.emplace(name.substr(0, name.size() - suffix.size()), entry.path());
    }
  }
  if (out.empty()) throw Error(ErrorKind::kIo, "no *" + suffix + " files in " + dir);
  return out;
}

inline std::map<std::string, Run> load_runs(const std::string& dir) {
  std::map<std::string, Run> runs;
  for (const auto& [id, path] : list_dir(dir, ".run")) runs.emplace(id, load_run(path.string()));
  return runs;
}

inline MissingPolicy missing_policy(const Command& cmd) {
  return cmd.get_or("missing", "error") == "zero" ? MissingPolicy::kAsZero : MissingPolicy::kError;
}

inline DegeneratePolicy degenerate_policy(const Command& cmd) {
  return cmd.get_or("degenerate", "error") == "one" ? DegeneratePolicy::kOne
                                                    : DegeneratePolicy::kError;
}

inline TauVariant tau_variant(const Command& cmd) {
  return cmd.get_or("tau-variant", "b") == "a" ? TauVariant::kA : TauVariant::kB;
}

inline std::string fixed4(double v) { return judgekit::detail::fixed(v, 4); }

inline void emit(const Command& cmd, OutputSet& files, std::ostream& out, const std::string& text) {
  if (cmd.has("out")) {
    files.add(cmd.get("out"), text);
  } else {
    out << text;
  }
}

inline void run_judge(const Command& cmd, OutputSet& files, std::ostream& out) {
  const ScoreTable scores = load_scores(cmd.get("scores"));
  BinaryQrels qrels;
  if (cmd.get("strategy") == "direct") {
    TokenMap map;
    if (cmd.has("token-map")) map = TokenMap::from_json(read_json(cmd.get("token-map")));
    qrels = judge_direct(scores, map);
  } else {
    Threshold theta;
    if (cmd.has("theta")) {
      theta = Threshold(parse_real_option(cmd, "theta"));
    } else {
      const auto thresholds = read_json(cmd.get("transfer"));
      const std::string& dataset = cmd.get("dataset");
      if (!thresholds.is_object() || !thresholds.contains(dataset) ||
          !thresholds.at(dataset).is_number()) {
        throw Error(ErrorKind::kMissingSource,
                    cmd.get("transfer") + " has no threshold for dataset '" + dataset + "'");
      }
      theta = Threshold(thresholds.at(dataset).get<double>());
    }
    qrels = judge_threshold(scores, theta);
  }
  std::ostringstream text;
  write_qrels(text, qrels);
  files.add(cmd.get("out"), text.str());
  std::size_t positives = 0;
  qrels.for_each([&](const TopicId&, const DocId&, bool l) { positives += l ? 1 : 0; });
  out << "judged\t" << qrels.size() << "\trelevant\t" << positives << '\n';
}

inline void run_sweep(const Command& cmd, OutputSet& files, std::ostream& out) {
  const ScoreTable scores = load_scores(cmd.get("scores"));
  const BinaryQrels gold = binarize(load_qrels(cmd.get("gold")), parse_grade_option(cmd, "gold-cutoff", 1));
  const ThresholdGrid grid = ThresholdGrid::parse(cmd.get_or("grid", "prob"));
  SweepObjective objective = SweepObjective::kappa();
  std::optional<std::map<std::string, Run>> runs;
  if (cmd.get_or("objective", "kappa") == "tau") {
    objective = SweepObjective::tau(MetricSpec::parse(cmd.get_or("metric", "map@100")),
                                    tau_variant(cmd));
    runs = load_runs(cmd.get("runs"));
  }
  SweepOptions options;
  options.missing = missing_policy(cmd);
  options.degenerate = degenerate_policy(cmd);
  options.threads = default_threads();
  const SweepResult result = sweep(scores, gold, grid, objective, runs ? &*runs : nullptr, options);

  nlohmann::json j = to_json(result);
  j["objective"] = objective.name();
  files.add(cmd.get("out"), j.dump(2) + "\n");
  out << "theta\t" << objective.name() << '\n';
  for (const auto& [theta, value] : result.curve) {
    out << judgekit::detail::format_real(theta) << '\t' << fixed4(value) << '\n';
  }
  out << "selected\t" << judgekit::detail::format_real(result.selected.theta) << '\n';
}

inline void run_transfer(const Command& cmd, OutputSet& files, std::ostream& out) {
  const std::string plan_ref = cmd.get_or("plan", "trecdl-paper");
  TransferPlan plan;
  if (auto preset = TransferPlan::preset(plan_ref)) {
    plan = *preset;
  } else {
    plan = TransferPlan::from_json(read_json(plan_ref));
  }
  std::map<std::string, SweepResult> per_source;
  for (const auto& [dataset, path] : list_dir(cmd.get("sweeps"), ".sweep.json")) {
    per_source.emplace(dataset, sweep_result_from_json(read_json(path)));
  }
  const auto thresholds = apply_transfer(plan, per_source);
  nlohmann::json j = nlohmann::json::object();
  out << "target\tsource\ttheta\n";
  for (const auto& [target, theta] : thresholds) {
    j[target] = theta.theta;
    out << target << '\t' << plan.assignments().at(target) << '\t'
        << judgekit::detail::format_real(theta.theta) << '\n';
  }
  files.add(cmd.get("out"), j.dump(2) + "\n");
}

inline std::vector<MetricSpec> parse_metric_list(const std::string& text) {
  std::vector<MetricSpec> specs;
  std::size_t start = 0;
  while (true) {
    auto comma = text.find(',', start);
    specs.push_back(MetricSpec::parse(std::string_view(text).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return specs;
}

inline void run_eval(const Command& cmd, OutputSet& files, std::ostream& out, std::ostream& err) {
  const Run run = load_run(cmd.get("run"));
  const GradedQrels qrels = load_qrels(cmd.get("qrels"));
  const Grade rel_level = parse_grade_option(cmd, "rel-level", 1);
  std::ostringstream text;
  for (const MetricSpec& spec : parse_metric_list(cmd.get("metric"))) {
    const RunEvaluation e = evaluate_run(run, qrels, spec, rel_level);
    if (cmd.has("per-topic")) {
      for (const auto& [topic, value] : e.per_topic) {
        text << spec.name() << '\t' << topic.str() << '\t' << fixed4(value) << '\n';
      }
    }
    text << spec.name() << "\tall\t" << fixed4(e.mean) << '\n';
    text << spec.name() << "\tnum_q\t" << e.evaluable_topics << '\n';
    if (e.no_evaluable_topics()) {
      err << "warning: " << spec.name() << ": no evaluable topics, mean reported as 0\n";
    }
  }
  emit(cmd, files, out, text.str());
}

inline void run_agree(const Command& cmd, OutputSet& files, std::ostream& out) {
  const BinaryQrels pred = binarize(load_qrels(cmd.get("pred")), 1);
  const BinaryQrels gold = binarize(load_qrels(cmd.get("gold")), parse_grade_option(cmd, "gold-cutoff", 1));
  const ConfusionTable t = confusion(pred, gold, missing_policy(cmd));
  const double kappa = cohen_kappa(t, degenerate_policy(cmd));
  std::ostringstream text;
  text << "judge\tdataset\tkappa\tn\ttp\tfp\tfn\ttn\n"
       << cmd.get_or("judge", "judge") << '\t' << cmd.get_or("dataset", "-") << '\t'
       << fixed4(kappa) << '\t' << t.total() << '\t' << t.tp << '\t' << t.fp << '\t' << t.fn
       << '\t' << t.tn << '\n';
  emit(cmd, files, out, text.str());
}

inline void run_rankcorr(const Command& cmd, OutputSet& files, std::ostream& out) {
  const auto runs = load_runs(cmd.get("runs"));
  const BinaryQrels pred = binarize(load_qrels(cmd.get("pred")), 1);
  const BinaryQrels gold = binarize(load_qrels(cmd.get("gold")), parse_grade_option(cmd, "gold-cutoff", 1));
  const MetricSpec spec = MetricSpec::parse(cmd.get_or("metric", "map@100"));
  std::map<std::string, RunEvaluation> under_gold, under_pred;
  for (const auto& [id, run] : runs) {
    under_gold.emplace(id, evaluate_run(run, gold, spec));
    under_pred.emplace(id, evaluate_run(run, pred, spec));
  }
  const double tau = kendall_tau(make_ordering_pair(under_gold, under_pred), tau_variant(cmd));
  std::ostringstream text;
  text << "judge\tdataset\tmetric\ttau\tn_systems\n"
       << cmd.get_or("judge", "judge") << '\t' << cmd.get_or("dataset", "-") << '\t'
       << spec.name() << '\t' << fixed4(tau) << '\t' << runs.size() << '\n';
  emit(cmd, files, out, text.str());
}

inline void run_bias(const Command& cmd, OutputSet& files, std::ostream& out) {
  const SystemCatalog catalog = SystemCatalog::from_json(read_json(cmd.get("catalog")));
  const auto runs = load_runs(cmd.get("runs"));
  std::map<std::string, BinaryQrels> judges;
  for (const auto& [id, path] : list_dir(cmd.get("judges"), ".qrels")) {
    judges.emplace(id, binarize(load_qrels(path.string()), 1));
  }
  const BinaryQrels human =
      binarize(load_qrels(cmd.get("human")), parse_grade_option(cmd, "human-cutoff", 1));
  const MetricSpec spec = MetricSpec::parse(cmd.get_or("metric", "map@100"));
  std::optional<std::string> baseline;
  if (cmd.has("baseline")) baseline = cmd.get("baseline");

  const BiasMatrix matrix = cross_evaluate(runs, judges, human, spec, default_threads());
  const BiasReport report = build_report(matrix, catalog, baseline);

  const std::filesystem::path dir = cmd.get("out-dir");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::kIo, "cannot create " + dir.string());
  }
  std::ostringstream csv, text;
  write_scatter_csv(csv, scatter_data(matrix, catalog));
  write_report_text(text, report);
  files.add(dir / "scatter.csv", csv.str());
  files.add(dir / "report.json", to_json(report).dump(2) + "\n");
  files.add(dir / "matrix.json", to_json(matrix).dump(2) + "\n");
  files.add(dir / "report.txt", text.str());
  out << text.str();
}

inline void run_convert(const Command& cmd, OutputSet& files, std::ostream& out) {
  const BinaryQrels qrels =
      binarize(load_qrels(cmd.get("qrels")), parse_grade_option(cmd, "cutoff", 2));
  std::ostringstream text;
  write_qrels(text, qrels);
  files.add(cmd.get("out"), text.str());
  out << "pairs\t" << qrels.size() << '\n';
}

}  // namespace detail

/// Runs a parsed command; returns the process exit status.
inline int execute(const Command& cmd, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  if (cmd.version) {
    out << kVersion << '\n';
    return 0;
  }
  if (cmd.help) {
    out << usage(cmd.verb.empty() ? nullptr : find_verb(cmd.verb));
    return 0;
  }
  try {
    detail::OutputSet files;
    std::ostringstream buffered;
    if (cmd.verb == "judge") detail::run_judge(cmd, files, buffered);
    else if (cmd.verb == "sweep") detail::run_sweep(cmd, files, buffered);
    else if (cmd.verb == "transfer") detail::run_transfer(cmd, files, buffered);
    else if (cmd.verb == "eval") detail::run_eval(cmd, files, buffered, err);
    else if (cmd.verb == "agree") detail::run_agree(cmd, files, buffered);
    else if (cmd.verb == "rankcorr") detail::run_rankcorr(cmd, files, buffered);
    else if (cmd.verb == "bias") detail::run_bias(cmd, files, buffered);
    else if (cmd.verb == "convert") detail::run_convert(cmd, files, buffered);
    else throw Error(ErrorKind::kUnknownVerb, "unknown verb '" + cmd.verb + "'");
    files.commit();
    out << buffered.str();
    return 0;
  } catch (const Error& e) {
    err << "judgekit " << cmd.verb << ": " << e.what() << '\n';
    return is_usage_error(e.kind()) ? 2 : 1;
  } catch (const std::exception& e) {
    err << "judgekit " << cmd.verb << ": " << e.what() << '\n';
    return 1;
  }
}

/// Entry point shared by the judgekit binary and the tests.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  Command cmd;
  try {
    cmd = parse_args(args);
  } catch (const std::exception& e) {
    // Anything rejected while reading the command line is a usage error.
    err << "judgekit: " << e.what() << "\n\n" << usage();
    return 2;
  }
  return execute(cmd, out, err);
}

}  // namespace judgekit::cli
