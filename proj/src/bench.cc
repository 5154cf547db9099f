// Copyright 2026 The ABA Authors
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

#include "aba/bench.h"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "aba/dataset_io.h"
#include "aba/encoder.h"
#include "aba/error.h"
#include "aba/rng.h"

namespace aba {
namespace fs = std::filesystem;

namespace {

std::string Hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

std::uint64_t Fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<const Scenario*> IdScenarios(const std::vector<Scenario>& suite, Task task) {
  std::vector<const Scenario*> out;
  for (const Scenario& s : suite) {
    if (s.task == task && s.ood_kind == OodKind::kNone) out.push_back(&s);
  }
  if (out.empty()) throw ValidationError("suite has no in-distribution scenario for " + TaskName(task));
  return out;
}

std::string Fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string Pad(const std::string& s, size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

int MethodOrder(const std::string& name) {
  static const std::vector<std::string> order = {"vanilla", "policy-embed", "visual-embed", "aba"};
  const auto it = std::find(order.begin(), order.end(), name);
  return it == order.end() ? static_cast<int>(order.size()) : static_cast<int>(it - order.begin());
}

}  // namespace

int DefaultDemosPerMode(Task task) { return task == Task::kSweepSort ? 50 : 100; }

Dataset GenerateDataset(const std::vector<Scenario>& suite, Task task, int demos_per_mode,
                        std::uint64_t seed) {
  if (demos_per_mode < 1) throw ValidationError("demos-per-mode must be >= 1");
  const std::vector<const Scenario*> id = IdScenarios(suite, task);
  Dataset d;
  d.task = TaskName(task);
  d.plan_length = kPlanLength;
  d.grid_width = id.front()->grid_width;
  d.grid_height = id.front()->grid_height;
  d.labels = id.front()->training_labels;
  std::vector<Scenario> id_copies;
  for (const Scenario* s : id) id_copies.push_back(*s);
  d.config_hash = Hex64(Fnv1a("aba-dataset/" + std::to_string(kDatasetFormatVersion) + "|" +
                              d.task + "|" + std::to_string(demos_per_mode) + "|" +
                              std::to_string(seed) + "|" + ScenarioSuiteToText(id_copies)));
  for (size_t si = 0; si < id.size(); ++si) {
    for (int i = 0; i < demos_per_mode; ++i) {
      const std::uint64_t demo_seed = DeriveSeed(seed, {si, static_cast<std::uint64_t>(i)});
      try {
        d.trajectories.push_back(ScriptedDemonstrator(*id[si], 0, demo_seed));
      } catch (const Error& e) {
        throw RuntimeFailure("demonstration " + std::to_string(i) + " of " +
                             id[si]->environment_id + " (seed " + std::to_string(demo_seed) +
                             ") failed: " + e.what());
      }
    }
  }
  return d;
}

std::vector<Embedding> HeldOutEmbeddings(const std::vector<Scenario>& suite,
                                         const PolicyModel& policy, int per_mode,
                                         std::uint64_t seed, double action_noise) {
  const Task task = ParseTask(policy.dataset().task);
  std::vector<Embedding> out;
  DemoOptions options;
  options.action_noise = action_noise;
  const std::vector<const Scenario*> id = IdScenarios(suite, task);
  for (size_t si = 0; si < id.size(); ++si) {
    for (int i = 0; i < per_mode; ++i) {
      const Trajectory t = ScriptedDemonstrator(
          *id[si], 0, DeriveSeed(seed, {0x686f6c64, si, static_cast<std::uint64_t>(i)}), options);
      for (size_t k = 0; k < t.pairs.size(); ++k) {
        out.push_back(EncodeAt(t, static_cast<int>(k), policy.encoder()));
      }
    }
  }
  return out;
}

std::string Workspace::DatasetPath(Task task) const {
  return (fs::path(root_) / "datasets" / TaskName(task) / "train.dslog").string();
}
std::string Workspace::PolicyPath(Task task) const {
  return (fs::path(root_) / "models" / (TaskName(task) + ".pmod")).string();
}
std::string Workspace::IndexPath(Task task) const {
  return (fs::path(root_) / "models" / (TaskName(task) + ".idx")).string();
}
std::string Workspace::ScenarioPath(Task task) const {
  return (fs::path(root_) / "scenarios" / (TaskName(task) + ".cfg")).string();
}
std::string Workspace::RunDir(const std::string& bench_id) const {
  return (fs::path(root_) / "runs" / bench_id).string();
}

std::vector<Scenario> Workspace::Suite(Task task) const {
  const std::string path = ScenarioPath(task);
  if (!fs::exists(path)) return MakeBenchmarkSuite(task);
  std::vector<Scenario> suite = LoadScenarioSuite(path);
  for (const Scenario& s : suite) {
    if (s.task != task) {
      throw ValidationError("scenario '" + s.environment_id + "' in " + path +
                            " belongs to another task");
    }
  }
  return suite;
}

GenDataResult GenData(const Workspace& ws, Task task, int demos_per_mode, std::uint64_t seed) {
  const Dataset d = GenerateDataset(ws.Suite(task), task, demos_per_mode, seed);
  GenDataResult r;
  r.path = ws.DatasetPath(task);
  std::error_code ec;
  fs::create_directories(fs::path(r.path).parent_path(), ec);
  SaveDataset(d, r.path);
  r.trajectories = static_cast<int>(d.trajectories.size());
  r.pairs = d.pair_count();
  r.config_hash = d.config_hash;
  return r;
}

FitResult Fit(const Workspace& ws, Task task, const PolicyParams& params) {
  const std::string dataset_path = ws.DatasetPath(task);
  if (!fs::exists(dataset_path)) {
    throw RuntimeFailure("no dataset at '" + dataset_path + "'; run gen-data first");
  }
  auto dataset = std::make_shared<const Dataset>(LoadDataset(dataset_path));
  const PolicyModel model = FitPolicy(dataset, DefaultEncoderConfig(*dataset), params);
  FitResult r;
  r.path = ws.PolicyPath(task);
  SavePolicyFile(DescribePolicy(model, fs::relative(dataset_path, ws.root()).string()), r.path);
  r.pairs = model.size();
  r.dimension = model.dimension();
  r.tau_w = model.params().tau_w;
  return r;
}

namespace {

std::shared_ptr<const PolicyModel> LoadPolicy(const Workspace& ws, Task task) {
  const std::string policy_path = ws.PolicyPath(task);
  if (!fs::exists(policy_path)) {
    throw RuntimeFailure("no policy at '" + policy_path + "'; run fit first");
  }
  const PolicyFile file = LoadPolicyFile(policy_path);
  fs::path dataset_path = file.dataset_path;
  if (dataset_path.is_relative()) dataset_path = fs::path(ws.root()) / dataset_path;
  if (!fs::exists(dataset_path)) {
    throw RuntimeFailure("policy dataset '" + dataset_path.string() + "' is missing");
  }
  auto dataset = std::make_shared<const Dataset>(LoadDataset(dataset_path.string()));
  return std::make_shared<const PolicyModel>(RestorePolicy(file, dataset));
}

}  // namespace

CalibrateResult CalibrateTask(const Workspace& ws, Task task, double percentile,
                              std::uint64_t seed) {
  if (!(percentile >= 0.0 && percentile <= 0.5)) {
    throw ValidationError("percentile must lie in [0, 0.5]");
  }
  const auto policy = LoadPolicy(ws, task);
  IdIndex index = BuildIdIndex(*policy);
  const std::vector<Embedding> held = HeldOutEmbeddings(ws.Suite(task), *policy, 15, seed);
  CalibrateResult r;
  r.threshold = Calibrate(index, held, percentile);
  r.held_out = static_cast<int>(held.size());
  r.path = ws.IndexPath(task);
  IndexFile f;
  f.dataset_hash = policy->dataset().config_hash;
  f.threshold = r.threshold;
  f.percentile = percentile;
  f.held_out_size = r.held_out;
  SaveIndexFile(f, r.path);
  return r;
}

RuntimeModels LoadModels(const Workspace& ws, Task task) {
  RuntimeModels m;
  m.policy = LoadPolicy(ws, task);
  const std::string index_path = ws.IndexPath(task);
  if (!fs::exists(index_path)) {
    throw RuntimeFailure("no calibrated index at '" + index_path + "'; run calibrate first");
  }
  const IndexFile f = LoadIndexFile(index_path);
  if (f.dataset_hash != m.policy->dataset().config_hash) {
    throw ValidationError("index was calibrated for dataset " + f.dataset_hash + ", policy uses " +
                          m.policy->dataset().config_hash);
  }
  auto index = std::make_shared<IdIndex>(BuildIdIndex(*m.policy));
  index->SetCalibration(f.threshold, f.percentile, f.held_out_size);
  m.index = index;
  m.corpus = std::make_shared<const RetrievalCorpus>(m.policy->shared_dataset());
  return m;
}

std::vector<BenchCondition> RolloutTargets(const std::vector<Scenario>& suite) {
  std::vector<BenchCondition> out;
  for (const Scenario& s : suite) {
    for (size_t i = 0; i < s.objects.size(); ++i) {
      BenchCondition c;
      c.scenario = &s;
      c.object_index = static_cast<int>(i);
      c.name = s.objects.size() > 1 ? s.environment_id + "/" + s.objects[i].spec.label_name
                                    : s.environment_id;
      out.push_back(c);
    }
  }
  return out;
}

std::vector<BenchCondition> BenchConditions(const std::vector<Scenario>& suite) {
  std::vector<BenchCondition> out;
  for (const Scenario& s : suite) {
    if (s.objects.empty()) continue;
    BenchCondition c;
    c.scenario = &s;
    c.name = s.environment_id;
    out.push_back(c);
  }
  return out;
}

std::uint64_t RolloutSeed(std::uint64_t bench_seed, int rollout) {
  return DeriveSeed(bench_seed, {0x726f6c6c, static_cast<std::uint64_t>(rollout)});
}

std::vector<RolloutRecord> RunBenchRecords(const std::vector<Scenario>& suite,
                                           const RuntimeModels& models,
                                           const BenchOptions& options) {
  if (options.rollouts < 1) throw ValidationError("rollouts must be >= 1");
  if (options.methods.empty()) throw ValidationError("no methods selected");
  std::vector<RolloutRecord> records;
  for (const BenchCondition& c : BenchConditions(suite)) {
    for (Method method : options.methods) {
      for (int r = 0; r < options.rollouts; ++r) {
        const std::uint64_t seed = RolloutSeed(options.seed, r);
        const int object = r % static_cast<int>(c.scenario->objects.size());
        InterventionConfig cfg = options.intervention;
        cfg.method = method;
        ScriptedExpert expert(c.scenario->objects[object].expert_script);
        RolloutRecord rec;
        try {
          rec = Rollout(*c.scenario, object, models, &expert, cfg, seed);
          rec.condition = c.name;
        } catch (const std::exception& e) {
          rec = RolloutRecord();
          rec.task = TaskName(c.scenario->task);
          rec.scenario = c.scenario->environment_id;
          rec.object = c.scenario->objects[object].spec.label_name;
          rec.condition = c.name;
          rec.ood_kind = OodKindName(c.scenario->ood_kind);
          rec.method = MethodName(method);
          rec.seed = seed;
          rec.horizon = c.scenario->horizon;
          rec.error = e.what();
          rec.success = false;
        }
        if (options.progress) options.progress(rec);
        records.push_back(std::move(rec));
      }
    }
  }
  return records;
}

std::string BenchId(Task task, const BenchOptions& options) {
  std::string id = TaskName(task) + "-s" + std::to_string(options.seed) + "-n" +
                   std::to_string(options.rollouts);
  const std::vector<Method> all = BenchOptions().methods;
  if (options.methods != all) {
    for (Method m : options.methods) id += "-" + MethodName(m);
  }
  return id;
}

double PearsonCorrelation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("correlation of unequal samples");
  const size_t n = x.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

std::vector<PrecisionRow> PrecisionAnalysis(const std::vector<RolloutRecord>& baseline,
                                            const std::vector<RolloutRecord>& aba, int m) {
  if (m < 1) throw ValidationError("precision needs M >= 1");
  std::map<std::pair<std::string, std::uint64_t>, const RolloutRecord*> by_key;
  for (const RolloutRecord& r : aba) by_key[{r.condition, r.seed}] = &r;
  std::vector<PrecisionRow> rows;
  for (const RolloutRecord& b : baseline) {
    const std::string name = b.condition + "/" + b.method + "/seed " + std::to_string(b.seed);
    const auto it = by_key.find({b.condition, b.seed});
    if (it == by_key.end()) {
      throw ValidationError("rollout " + name + " has no aba rollout with the same seed");
    }
    const RolloutRecord& a = *it->second;
    std::map<int, const DecisionEntry*> aba_at;
    for (const DecisionEntry& e : a.entries) aba_at[e.timestep] = &e;
    const int aba_end = a.entries.empty() ? 0 : a.entries.back().timestep;
    PrecisionRow row;
    row.condition = b.condition;
    row.ood_kind = b.ood_kind;
    row.method = b.method;
    row.seed = b.seed;
    row.trend_subset = b.task == "place-in-cup" &&
                       (b.ood_kind == "none" || b.ood_kind == "background");
    double sum = 0.0;
    for (const DecisionEntry& e : b.entries) {
      if (e.retrieval.empty()) continue;
      const auto at = aba_at.find(e.timestep);
      if (at == aba_at.end()) {
        if (a.incomplete && e.timestep > aba_end) continue;
        throw ValidationError("rollout " + name + ": no aba decision at timestep " +
                              std::to_string(e.timestep));
      }
      if (at->second->retrieval.empty()) continue;
      const std::set<ObservationRef> theirs(at->second->retrieval.begin(),
                                            at->second->retrieval.end());
      int common = 0;
      for (const ObservationRef& r : e.retrieval) common += theirs.count(r) ? 1 : 0;
      sum += static_cast<double>(common) / m;
      ++row.decisions;
    }
    if (row.decisions == 0) continue;
    row.precision = sum / row.decisions;
    row.cumulative_success =
        b.subgoals.empty() ? 0.0
                           : static_cast<double>(b.achieved_subgoals()) / b.subgoals.size();
    rows.push_back(row);
  }
  return rows;
}

BenchReport BuildReport(const std::vector<RolloutRecord>& records, int m) {
  BenchReport report;
  std::vector<std::string> conditions;
  std::map<std::string, std::string> ood_of;
  std::map<std::pair<std::string, std::string>, std::vector<const RolloutRecord*>> cells;
  for (const RolloutRecord& r : records) {
    if (report.task.empty()) report.task = r.task;
    if (!ood_of.count(r.condition)) {
      conditions.push_back(r.condition);
      ood_of[r.condition] = r.ood_kind;
    }
    cells[{r.condition, r.method}].push_back(&r);
  }
  for (const std::string& c : conditions) {
    std::vector<std::string> methods;
    for (const auto& [key, list] : cells) {
      if (key.first == c) methods.push_back(key.second);
    }
    std::stable_sort(methods.begin(), methods.end(), [](const std::string& a, const std::string& b) {
      const int oa = MethodOrder(a), ob = MethodOrder(b);
      return oa != ob ? oa < ob : a < b;
    });
    for (const std::string& method : methods) {
      const auto& list = cells[{c, method}];
      CellStats s;
      s.condition = c;
      s.ood_kind = ood_of[c];
      s.method = method;
      s.rollouts = static_cast<int>(list.size());
      int successes = 0;
      double fsum = 0.0;
      for (const RolloutRecord* r : list) {
        successes += r->success ? 1 : 0;
        fsum += r->feedback_total;
        for (size_t g = 0; g < r->subgoals.size(); ++g) {
          if (g >= s.subgoal_names.size()) {
            s.subgoal_names.push_back(r->subgoals[g].name);
            s.subgoal_rates.push_back(0.0);
          }
          s.subgoal_rates[g] += r->subgoals[g].achieved ? 1.0 : 0.0;
        }
      }
      const double n = static_cast<double>(list.size());
      s.success_rate = successes / n;
      for (double& v : s.subgoal_rates) v /= n;
      s.feedback_mean = fsum / n;
      if (list.size() > 1) {
        double ss = 0.0;
        for (const RolloutRecord* r : list) {
          ss += (r->feedback_total - s.feedback_mean) * (r->feedback_total - s.feedback_mean);
        }
        s.feedback_se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
      }
      report.cells.push_back(std::move(s));
    }
  }
  std::vector<RolloutRecord> aba, baseline;
  for (const RolloutRecord& r : records) {
    if (r.method == "aba") {
      aba.push_back(r);
    } else if (r.method == "policy-embed" || r.method == "visual-embed") {
      baseline.push_back(r);
    }
  }
  if (!aba.empty() && !baseline.empty()) {
    report.precision = PrecisionAnalysis(baseline, aba, m);
  }
  std::vector<double> xs, ys;
  for (const PrecisionRow& row : report.precision) {
    if (!row.trend_subset) continue;
    xs.push_back(row.precision);
    ys.push_back(row.cumulative_success);
  }
  report.precision_subset_rows = static_cast<int>(xs.size());
  report.precision_correlation = PearsonCorrelation(xs, ys);
  return report;
}

std::map<std::string, std::string> RenderReport(const BenchReport& report) {
  std::map<std::string, std::string> files;
  std::ostringstream txt, success, subgoals, feedback, precision;
  txt << "ABA benchmark report\n";
  txt << "task: " << (report.task.empty() ? "-" : report.task) << "\n\n";

  success << "condition,ood_kind,method,rollouts,success_rate\n";
  subgoals << "condition,ood_kind,method,subgoal,rate\n";
  feedback << "condition,ood_kind,method,rollouts,feedback_mean,feedback_se\n";
  precision << "condition,ood_kind,method,seed,decisions,precision,cumulative_success,"
               "trend_subset\n";

  txt << "Success rate\n";
  txt << Pad("condition", 22) << Pad("ood", 12) << Pad("method", 14) << Pad("n", 6)
      << Pad("success", 10) << "subgoals\n";
  for (const CellStats& c : report.cells) {
    std::string goals;
    for (size_t g = 0; g < c.subgoal_names.size(); ++g) {
      if (!goals.empty()) goals += " ";
      goals += c.subgoal_names[g] + "=" + Fmt(c.subgoal_rates[g]);
    }
    txt << Pad(c.condition, 22) << Pad(c.ood_kind, 12) << Pad(c.method, 14)
        << Pad(std::to_string(c.rollouts), 6) << Pad(Fmt(c.success_rate), 10) << goals << "\n";
    success << c.condition << "," << c.ood_kind << "," << c.method << "," << c.rollouts << ","
            << Fmt(c.success_rate) << "\n";
    for (size_t g = 0; g < c.subgoal_names.size(); ++g) {
      subgoals << c.condition << "," << c.ood_kind << "," << c.method << ","
               << c.subgoal_names[g] << "," << Fmt(c.subgoal_rates[g]) << "\n";
    }
    feedback << c.condition << "," << c.ood_kind << "," << c.method << "," << c.rollouts << ","
             << Fmt(c.feedback_mean) << "," << Fmt(c.feedback_se) << "\n";
  }

  txt << "\nExpert feedback per rollout (mean +- standard error)\n";
  txt << Pad("condition", 22) << Pad("method", 14) << "feedback\n";
  for (const CellStats& c : report.cells) {
    if (c.method != "aba") continue;
    txt << Pad(c.condition, 22) << Pad(c.method, 14) << Fmt(c.feedback_mean) << " +- "
        << Fmt(c.feedback_se) << "\n";
  }

  txt << "\nRetrieval precision against aba\n";
  txt << Pad("condition", 22) << Pad("method", 14) << Pad("rows", 6) << Pad("precision", 11)
      << "cumulative_success\n";
  std::map<std::pair<std::string, std::string>, std::pair<double, double>> sums;
  std::map<std::pair<std::string, std::string>, int> counts;
  std::vector<std::pair<std::string, std::string>> order;
  for (const PrecisionRow& r : report.precision) {
    precision << r.condition << "," << r.ood_kind << "," << r.method << "," << r.seed << ","
              << r.decisions << "," << Fmt(r.precision) << "," << Fmt(r.cumulative_success)
              << "," << (r.trend_subset ? 1 : 0) << "\n";
    const auto key = std::make_pair(r.condition, r.method);
    if (!counts.count(key)) order.push_back(key);
    sums[key].first += r.precision;
    sums[key].second += r.cumulative_success;
    ++counts[key];
  }
  for (const auto& key : order) {
    const int n = counts[key];
    txt << Pad(key.first, 22) << Pad(key.second, 14) << Pad(std::to_string(n), 6)
        << Pad(Fmt(sums[key].first / n), 11) << Fmt(sums[key].second / n) << "\n";
  }
  txt << "pearson(precision, cumulative success) over place-in-cup ID + OOD-background rows: "
      << Fmt(report.precision_correlation) << " (" << report.precision_subset_rows
      << " rows)\n";

  files["report.txt"] = txt.str();
  files["success.csv"] = success.str();
  files["subgoals.csv"] = subgoals.str();
  files["feedback.csv"] = feedback.str();
  files["precision.csv"] = precision.str();
  return files;
}

void WriteRecords(const std::string& path, const std::vector<RolloutRecord>& records) {
  std::error_code ec;
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path(), ec);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot write '" + tmp + "'");
    for (const RolloutRecord& r : records) out << RecordToJson(r).dump() << '\n';
    if (!out) throw RuntimeFailure("write failed for '" + tmp + "'");
  }
  fs::rename(tmp, path, ec);
  if (ec) throw RuntimeFailure("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
}

std::vector<RolloutRecord> ReadRecords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeFailure("cannot open records file '" + path + "'");
  std::vector<RolloutRecord> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(number) + ": " + e.what());
    }
    out.push_back(RecordFromJson(j));
  }
  return out;
}

namespace {

void WriteReportFiles(const std::string& dir, const BenchReport& report) {
  for (const auto& [name, content] : RenderReport(report)) {
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write '" + path + "'");
    out << content;
  }
}

}  // namespace

BenchResult RunBench(const Workspace& ws, Task task, const BenchOptions& options) {
  const std::vector<Scenario> suite = ws.Suite(task);
  const RuntimeModels models = LoadModels(ws, task);
  BenchResult result;
  result.bench_id = BenchId(task, options);
  result.run_dir = ws.RunDir(result.bench_id);
  result.records = RunBenchRecords(suite, models, options);
  std::error_code ec;
  fs::create_directories(result.run_dir, ec);
  WriteRecords((fs::path(result.run_dir) / "records.jsonl").string(), result.records);
  result.report = BuildReport(result.records, options.intervention.top_m);
  WriteReportFiles(result.run_dir, result.report);
  return result;
}

BenchReport Analyze(const std::string& dir) {
  if (!fs::is_directory(dir)) throw RuntimeFailure("'" + dir + "' is not a directory");
  std::vector<std::string> files;
  const fs::path direct = fs::path(dir) / "records.jsonl";
  if (fs::exists(direct)) {
    files.push_back(direct.string());
  } else {
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().filename() == "records.jsonl") {
        files.push_back(e.path().string());
      }
    }
    std::sort(files.begin(), files.end());
  }
  if (files.empty()) throw RuntimeFailure("no records.jsonl under '" + dir + "'");
  std::vector<RolloutRecord> records;
  for (const std::string& f : files) {
    std::vector<RolloutRecord> more = ReadRecords(f);
    records.insert(records.end(), more.begin(), more.end());
  }
  const BenchReport report = BuildReport(records);
  WriteReportFiles(dir, report);
  return report;
}

}  // namespace aba
