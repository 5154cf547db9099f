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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "aba/error.h"
#include "test_support.h"

namespace aba {
namespace {

namespace fs = std::filesystem;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RolloutRecord Record(const std::string& method, std::uint64_t seed,
                     std::vector<std::vector<ObservationRef>> retrievals,
                     std::vector<bool> subgoals) {
  RolloutRecord r;
  r.task = "place-in-cup";
  r.scenario = r.condition = "place-pen";
  r.object = "pen";
  r.ood_kind = "none";
  r.method = method;
  r.seed = seed;
  r.horizon = 40;
  for (size_t t = 0; t < retrievals.size(); ++t) {
    DecisionEntry e;
    e.timestep = static_cast<int>(8 * t);
    e.retrieval = retrievals[t];
    r.entries.push_back(e);
  }
  const char* names[] = {"A", "B", "C"};
  for (size_t g = 0; g < subgoals.size(); ++g) r.subgoals.push_back({names[g], subgoals[g]});
  r.success = !subgoals.empty() && subgoals.back();
  return r;
}

TEST(PrecisionTest, OverlapOverM) {
  const std::vector<ObservationRef> top = {{0, 0}, {1, 0}};
  const std::vector<ObservationRef> other = {{2, 0}, {3, 0}};
  const std::vector<ObservationRef> half = {{0, 0}, {3, 0}};
  const std::vector<RolloutRecord> aba = {Record("aba", 1, {top, top}, {true, true})};
  auto one = [&](std::vector<std::vector<ObservationRef>> ret) {
    const auto rows =
        PrecisionAnalysis({Record("policy-embed", 1, ret, {true, false})}, aba, 2);
    EXPECT_EQ(rows.size(), 1u);
    return rows.empty() ? -1.0 : rows[0].precision;
  };
  EXPECT_DOUBLE_EQ(one({top, top}), 1.0);
  EXPECT_DOUBLE_EQ(one({other, other}), 0.0);
  EXPECT_DOUBLE_EQ(one({half, half}), 0.5);
  EXPECT_DOUBLE_EQ(one({top, other}), 0.5);

  const auto rows = PrecisionAnalysis({Record("visual-embed", 1, {half}, {true, false})}, aba, 2);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].decisions, 1);
  EXPECT_DOUBLE_EQ(rows[0].cumulative_success, 0.5);
  EXPECT_TRUE(rows[0].trend_subset);
}

TEST(PrecisionTest, SkipsRolloutsWithoutRetrievalAndRejectsMismatches) {
  const std::vector<ObservationRef> top = {{0, 0}};
  const std::vector<RolloutRecord> aba = {Record("aba", 1, {top}, {true})};
  EXPECT_TRUE(PrecisionAnalysis({Record("policy-embed", 1, {{}}, {true})}, aba, 1).empty());
  EXPECT_THROW(PrecisionAnalysis({Record("policy-embed", 2, {top}, {true})}, aba, 1),
               ValidationError);
  EXPECT_THROW(PrecisionAnalysis({Record("policy-embed", 1, {top, top}, {true})}, aba, 1),
               ValidationError);
  EXPECT_THROW(PrecisionAnalysis({}, aba, 0), ValidationError);
}

TEST(PearsonTest, MatchesTheDefinition) {
  EXPECT_NEAR(PearsonCorrelation({1, 2, 3}, {2, 4, 6}), 1.0, 1e-12);
  EXPECT_NEAR(PearsonCorrelation({1, 2, 3}, {3, 2, 1}), -1.0, 1e-12);
  const std::vector<double> x = {0.2, 0.4, 0.4, 0.9, 1.0}, y = {0.0, 1.0, 0.5, 0.5, 1.0};
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) mx += x[i] / 5, my += y[i] / 5;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  EXPECT_NEAR(PearsonCorrelation(x, y), sxy / std::sqrt(sxx * syy), 1e-12);
  EXPECT_TRUE(std::isnan(PearsonCorrelation({1}, {1})));
  EXPECT_TRUE(std::isnan(PearsonCorrelation({1, 1}, {0, 1})));
  EXPECT_THROW(PearsonCorrelation({1, 2}, {1}), ValidationError);
}

TEST(ReportTest, EmptyRecordsRenderHeadersOnly) {
  const auto files = RenderReport(BuildReport({}));
  EXPECT_EQ(files.at("success.csv"), "condition,ood_kind,method,rollouts,success_rate\n");
  EXPECT_EQ(files.at("feedback.csv"),
            "condition,ood_kind,method,rollouts,feedback_mean,feedback_se\n");
  for (const char* name : {"report.txt", "subgoals.csv", "precision.csv"}) {
    EXPECT_TRUE(files.count(name)) << name;
  }
}

TEST(ReportTest, CellStatistics) {
  std::vector<RolloutRecord> records;
  const int feedback[] = {0, 2, 4, 6};
  for (int i = 0; i < 4; ++i) {
    RolloutRecord r = Record("aba", i, {}, {true, i % 2 == 0});
    r.feedback_total = feedback[i];
    records.push_back(r);
  }
  records.push_back(Record("vanilla", 0, {}, {false, false}));
  const BenchReport report = BuildReport(records);
  ASSERT_EQ(report.cells.size(), 2u);
  EXPECT_EQ(report.cells[0].method, "vanilla");
  const CellStats& aba = report.cells[1];
  EXPECT_EQ(aba.rollouts, 4);
  EXPECT_DOUBLE_EQ(aba.success_rate, 0.5);
  EXPECT_EQ(aba.subgoal_names, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(aba.subgoal_rates, (std::vector<double>{1.0, 0.5}));
  EXPECT_DOUBLE_EQ(aba.feedback_mean, 3.0);
  // sample sd of {0,2,4,6} is sqrt(20/3)
  EXPECT_NEAR(aba.feedback_se, std::sqrt(20.0 / 3.0) / 2.0, 1e-12);
  EXPECT_EQ(report.cells[0].feedback_se, 0.0);
}

TEST(BenchIdTest, EncodesSeedCountAndMethodSubset) {
  BenchOptions o;
  o.seed = 7;
  o.rollouts = 3;
  EXPECT_EQ(BenchId(Task::kSweepSort, o), "sweep-sort-s7-n3");
  o.methods = {Method::kVanilla, Method::kAba};
  EXPECT_EQ(BenchId(Task::kPlaceInCup, o), "place-in-cup-s7-n3-vanilla-aba");
}

TEST(BenchConditionsTest, OnePerScenarioWithPerObjectTargets) {
  std::vector<std::string> names, targets;
  for (const BenchCondition& c : BenchConditions(testing::Suite(Task::kPlaceInCup))) {
    names.push_back(c.name);
  }
  for (const BenchCondition& c : RolloutTargets(testing::Suite(Task::kPlaceInCup))) {
    targets.push_back(c.name);
  }
  EXPECT_EQ(names, (std::vector<std::string>{"place-pen", "place-marker", "place-cloth",
                                             "place-pencil", "place-battery", "place-block"}));
  EXPECT_EQ(targets, (std::vector<std::string>{"place-pen", "place-marker", "place-cloth/pen",
                                               "place-cloth/marker", "place-pencil",
                                               "place-battery", "place-block"}));
  EXPECT_EQ(BenchConditions(testing::Suite(Task::kSweepSort)).size(), 6u);
}

TEST(RunBenchTest, SweepRecordsReportsAndReproducibility) {
  testing::TempDir dir;
  const Workspace ws(dir.path());
  const Workspace& prepared = testing::PreparedWorkspace();
  fs::create_directories(fs::path(ws.PolicyPath(Task::kSweepSort)).parent_path());
  fs::create_directories(fs::path(ws.DatasetPath(Task::kSweepSort)).parent_path());
  fs::copy_file(prepared.DatasetPath(Task::kSweepSort), ws.DatasetPath(Task::kSweepSort));
  fs::copy_file(prepared.PolicyPath(Task::kSweepSort), ws.PolicyPath(Task::kSweepSort));
  fs::copy_file(prepared.IndexPath(Task::kSweepSort), ws.IndexPath(Task::kSweepSort));

  BenchOptions options;
  options.rollouts = 10;
  options.seed = 5;
  const BenchResult first = RunBench(ws, Task::kSweepSort, options);
  EXPECT_EQ(first.bench_id, "sweep-sort-s5-n10");
  ASSERT_EQ(first.records.size(), 240u);
  EXPECT_EQ(first.report.cells.size(), 24u);

  for (const RolloutRecord& r : first.records) {
    EXPECT_TRUE(r.error.empty()) << r.condition << " " << r.method << ": " << r.error;
    if (r.method != "aba") {
      EXPECT_EQ(r.feedback_total, 0) << r.method;
    }
    if (r.method == "vanilla") {
      for (const DecisionEntry& e : r.entries) EXPECT_TRUE(e.retrieval.empty());
    }
    // a later subgoal is never achieved without the earlier ones
    for (size_t g = 1; g < r.subgoals.size(); ++g) {
      if (r.subgoals[g].achieved) EXPECT_TRUE(r.subgoals[g - 1].achieved);
    }
    EXPECT_EQ(r.success, !r.subgoals.empty() && r.subgoals.back().achieved);
  }
  // the two-object scene alternates objects by rollout index
  std::map<std::string, int> cloth_objects;
  for (const RolloutRecord& r : first.records) {
    if (r.condition == "sweep-cloth" && r.method == "aba") ++cloth_objects[r.object];
  }
  EXPECT_EQ(cloth_objects, (std::map<std::string, int>{{"mnm", 5}, {"paper", 5}}));

  std::map<std::string, std::string> written;
  for (const auto& [name, contents] : RenderReport(first.report)) {
    written[name] = ReadFile((fs::path(first.run_dir) / name).string());
    EXPECT_EQ(written[name], contents) << name;
  }
  const std::string records = ReadFile((fs::path(first.run_dir) / "records.jsonl").string());
  EXPECT_EQ(ReadRecords((fs::path(first.run_dir) / "records.jsonl").string()), first.records);

  const BenchResult second = RunBench(ws, Task::kSweepSort, options);
  EXPECT_EQ(ReadFile((fs::path(second.run_dir) / "records.jsonl").string()), records);
  for (const auto& [name, contents] : written) {
    EXPECT_EQ(ReadFile((fs::path(second.run_dir) / name).string()), contents) << name;
  }

  const BenchReport analyzed = Analyze(first.run_dir);
  for (const auto& [name, contents] : RenderReport(analyzed)) {
    EXPECT_EQ(contents, written[name]) << name;
  }
  EXPECT_THROW(Analyze(dir.Join("nowhere")), RuntimeFailure);
  fs::create_directories(dir.Join("empty"));
  EXPECT_THROW(Analyze(dir.Join("empty")), RuntimeFailure);
}

TEST(RunBenchTest, RejectsBadOptions) {
  const auto& models = testing::PreparedModels(Task::kSweepSort);
  BenchOptions o;
  o.rollouts = 0;
  EXPECT_THROW(RunBenchRecords(testing::Suite(Task::kSweepSort), models, o), ValidationError);
  o.rollouts = 1;
  o.methods.clear();
  EXPECT_THROW(RunBenchRecords(testing::Suite(Task::kSweepSort), models, o), ValidationError);
}

TEST(LoadModelsTest, MissingFilesAreRuntimeFailures) {
  testing::TempDir dir;
  EXPECT_THROW(LoadModels(Workspace(dir.path()), Task::kSweepSort), RuntimeFailure);
}

TEST(LoadModelsTest, ForeignIndexIsRejected) {
  testing::TempDir dir;
  const Workspace ws(dir.path());
  const Workspace& prepared = testing::PreparedWorkspace();
  fs::create_directories(fs::path(ws.PolicyPath(Task::kSweepSort)).parent_path());
  fs::create_directories(fs::path(ws.DatasetPath(Task::kSweepSort)).parent_path());
  fs::copy_file(prepared.DatasetPath(Task::kSweepSort), ws.DatasetPath(Task::kSweepSort));
  fs::copy_file(prepared.PolicyPath(Task::kSweepSort), ws.PolicyPath(Task::kSweepSort));
  fs::copy_file(prepared.IndexPath(Task::kPlaceInCup), ws.IndexPath(Task::kSweepSort));
  EXPECT_THROW(LoadModels(ws, Task::kSweepSort), ValidationError);
}

}  // namespace
}  // namespace aba
