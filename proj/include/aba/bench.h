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

#ifndef ABA_BENCH_H_
#define ABA_BENCH_H_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "aba/runtime.h"
#include "aba/sim.h"

namespace aba {

// ---------------------------------------------------------------------------
// Data generation and model preparation

int DefaultDemosPerMode(Task task);  // 50 sweep-sort, 100 place-in-cup

// demos_per_mode demonstrations for each in-distribution scenario.
Dataset GenerateDataset(const std::vector<Scenario>& suite, Task task, int demos_per_mode,
                        std::uint64_t seed);

// Noisy demonstrations on a seed stream disjoint from GenerateDataset's,
// encoded with the policy's encoder.
std::vector<Embedding> HeldOutEmbeddings(const std::vector<Scenario>& suite,
                                         const PolicyModel& policy, int per_mode,
                                         std::uint64_t seed, double action_noise = 0.02);

// Workspace layout under `root`:
//   datasets/<task>/train.dslog   models/<task>.pmod   models/<task>.idx
//   scenarios/<task>.cfg (optional override)   runs/<bench-id>/
class Workspace {
 public:
  explicit Workspace(std::string root) : root_(std::move(root)) {}

  const std::string& root() const { return root_; }
  std::string DatasetPath(Task task) const;
  std::string PolicyPath(Task task) const;
  std::string IndexPath(Task task) const;
  std::string ScenarioPath(Task task) const;
  std::string RunDir(const std::string& bench_id) const;

  // The scenario file if present, otherwise the built-in suite.
  std::vector<Scenario> Suite(Task task) const;

 private:
  std::string root_;
};

struct GenDataResult {
  std::string path;
  int trajectories = 0;
  int pairs = 0;
  std::string config_hash;
};
GenDataResult GenData(const Workspace& ws, Task task, int demos_per_mode, std::uint64_t seed);

struct FitResult {
  std::string path;
  int pairs = 0;
  int dimension = 0;
  double tau_w = 0.0;
};
FitResult Fit(const Workspace& ws, Task task, const PolicyParams& params = {});

struct CalibrateResult {
  std::string path;
  double threshold = 0.0;
  int held_out = 0;
};
CalibrateResult CalibrateTask(const Workspace& ws, Task task, double percentile,
                              std::uint64_t seed = 0x63616c);

// Loads dataset, policy and calibrated index. Throws RuntimeFailure when a
// file is missing and ValidationError when they do not belong together.
RuntimeModels LoadModels(const Workspace& ws, Task task);

// ---------------------------------------------------------------------------
// Benchmarks

struct BenchCondition {
  const Scenario* scenario = nullptr;
  int object_index = 0;
  std::string name;
};
// One condition per scenario; rollout r uses object r mod the object count.
std::vector<BenchCondition> BenchConditions(const std::vector<Scenario>& suite);
// One entry per scenario and object, named "<scenario>/<object>" when a
// scene holds several objects.
std::vector<BenchCondition> RolloutTargets(const std::vector<Scenario>& suite);

std::uint64_t RolloutSeed(std::uint64_t bench_seed, int rollout);

struct BenchOptions {
  std::vector<Method> methods = {Method::kVanilla, Method::kPolicyEmbed,
                                 Method::kVisualEmbed, Method::kAba};
  int rollouts = 10;
  std::uint64_t seed = 0;
  InterventionConfig intervention;
  std::function<void(const RolloutRecord&)> progress;
};

// Runs every condition x method x rollout with the scripted oracle experts.
// A crashing rollout is recorded as a failure and the run continues.
std::vector<RolloutRecord> RunBenchRecords(const std::vector<Scenario>& suite,
                                           const RuntimeModels& models,
                                           const BenchOptions& options);

std::string BenchId(Task task, const BenchOptions& options);

// ---------------------------------------------------------------------------
// Analysis

struct CellStats {
  std::string condition;
  std::string ood_kind;
  std::string method;
  int rollouts = 0;
  double success_rate = 0.0;
  std::vector<std::string> subgoal_names;
  std::vector<double> subgoal_rates;
  double feedback_mean = 0.0;
  double feedback_se = 0.0;
};

struct PrecisionRow {
  std::string condition;
  std::string ood_kind;
  std::string method;
  std::uint64_t seed = 0;
  int decisions = 0;  // decisions where both methods retrieved
  double precision = 0.0;
  double cumulative_success = 0.0;  // fraction of subgoals achieved
  bool trend_subset = false;  // place-in-cup ID or OOD-background
};

struct BenchReport {
  std::string task;
  std::vector<CellStats> cells;      // sorted by condition, then method order
  std::vector<PrecisionRow> precision;
  double precision_correlation = 0.0;  // over trend_subset rows; NaN if undefined
  int precision_subset_rows = 0;
};

// Per-baseline-rollout mean of |baseline top-M ∩ aba top-M| / M over the
// decisions where both retrieved. Throws ValidationError naming the rollout
// when a baseline retrieval has no aba decision at the same timestep.
std::vector<PrecisionRow> PrecisionAnalysis(const std::vector<RolloutRecord>& baseline,
                                            const std::vector<RolloutRecord>& aba, int m);

double PearsonCorrelation(const std::vector<double>& x, const std::vector<double>& y);

BenchReport BuildReport(const std::vector<RolloutRecord>& records, int m = 5);

// File name -> contents: report.txt, success.csv, subgoals.csv,
// feedback.csv, precision.csv. Pure function of the report.
std::map<std::string, std::string> RenderReport(const BenchReport& report);

void WriteRecords(const std::string& path, const std::vector<RolloutRecord>& records);
std::vector<RolloutRecord> ReadRecords(const std::string& path);

struct BenchResult {
  std::string bench_id;
  std::string run_dir;
  std::vector<RolloutRecord> records;
  BenchReport report;
};
BenchResult RunBench(const Workspace& ws, Task task, const BenchOptions& options);

// Reads runs/<id>/records.jsonl (or every records file below `dir`), writes
// the rendered report next to them and returns it.
BenchReport Analyze(const std::string& dir);

}  // namespace aba

#endif  // ABA_BENCH_H_
