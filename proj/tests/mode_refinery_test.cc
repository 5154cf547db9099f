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

#include "aba/mode_refinery.h"

#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "aba/error.h"
#include "aba/runtime.h"
#include "oracles.h"
#include "test_support.h"

namespace aba {
namespace {

using testing::BruteForceTwoMeans;
using testing::NameResolver;
using testing::ReferenceEntropy;
using testing::SquaredDistance;

TEST(ClusterPointsTest, SeparatesTwoObviousGroups) {
  const ModeClustering c = ClusterPoints({{0}, {1}, {10}, {11}}, 2, 3);
  ASSERT_EQ(c.labels.size(), 4u);
  EXPECT_EQ(c.labels[0], c.labels[1]);
  EXPECT_EQ(c.labels[2], c.labels[3]);
  EXPECT_NE(c.labels[0], c.labels[2]);
  EXPECT_NEAR(c.inertia, 1.0, 1e-12);
  EXPECT_NEAR(c.inertia, BruteForceTwoMeans({{0}, {1}, {10}, {11}}), 1e-12);
}

TEST(ClusterPointsTest, IdenticalPointsHaveZeroInertia) {
  const ModeClustering c = ClusterPoints({{2, 2}, {2, 2}, {2, 2}}, 2, 5);
  EXPECT_DOUBLE_EQ(c.inertia, 0.0);
  EXPECT_EQ(std::set<int>(c.labels.begin(), c.labels.end()).size(), 1u);
}

TEST(ClusterPointsTest, OneClusterPerPointHasZeroInertia) {
  const ModeClustering c = ClusterPoints({{0, 1}, {4, 4}, {-3, 2}, {9, 0}}, 4, 1);
  EXPECT_DOUBLE_EQ(c.inertia, 0.0);
  EXPECT_EQ(std::set<int>(c.labels.begin(), c.labels.end()).size(), 4u);
}

TEST(ClusterPointsTest, RejectsTooFewPoints) {
  EXPECT_THROW(ClusterPoints({{0}}, 2, 0), ValidationError);
  EXPECT_THROW(ClusterPoints({{0}, {1}}, 0, 0), ValidationError);
}

TEST(ClusterPointsTest, LabelsAndCentroidsAreConsistent) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 30; ++i) points.push_back({noise(rng), noise(rng) + (i % 3) * 5.0});
  const ModeClustering c = ClusterPoints(points, 3, 8);
  ASSERT_EQ(c.clusters(), 3);
  double inertia = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    ASSERT_GE(c.labels[i], 0);
    ASSERT_LT(c.labels[i], 3);
    inertia += SquaredDistance(points[i], c.centroids[c.labels[i]]);
  }
  EXPECT_NEAR(c.inertia, inertia, 1e-9);
  const ModeClustering again = ClusterPoints(points, 3, 8);
  EXPECT_EQ(again.labels, c.labels);
}

TEST(ClusterPointsTest, MatchesBruteForceOptimumOnSmallSets) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> size(2, 8), dims(1, 4);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  int matched = 0;
  constexpr int kTrials = 500;
  for (int trial = 0; trial < kTrials; ++trial) {
    const int n = size(rng), dim = dims(rng);
    std::vector<std::vector<double>> points(n, std::vector<double>(dim));
    for (auto& p : points) {
      for (double& v : p) v = coord(rng);
    }
    const double oracle = BruteForceTwoMeans(points);
    const ModeClustering c = ClusterPoints(points, 2, trial);
    ASSERT_GE(c.inertia, oracle - 1e-9);
    matched += c.inertia <= oracle + 1e-9;
  }
  EXPECT_GE(matched, 495) << matched << " of " << kTrials;
}

TEST(ClusterModesTest, FlattensPlans) {
  auto plan = [](double dx) {
    ActionPlan p;
    p.steps.assign(4, Action{dx, 0.0, 0.0});
    return p;
  };
  const ModeClustering c = ClusterModes({plan(1), plan(1.1), plan(-1), plan(-1.2)}, 2, 0);
  ASSERT_EQ(c.points[0].size(), 12u);
  EXPECT_EQ(c.labels[0], c.labels[1]);
  EXPECT_EQ(c.labels[2], c.labels[3]);
  EXPECT_NE(c.labels[0], c.labels[2]);
}

TEST(EntropyTest, KnownValues) {
  EXPECT_DOUBLE_EQ(LabelEntropy(std::vector<int>{0, 0, 0, 0}), 0.0);
  EXPECT_NEAR(LabelEntropy(std::vector<int>{0, 0, 1, 1}), std::log(2.0), 1e-12);
  EXPECT_NEAR(LabelEntropy(std::vector<int>{0, 0, 0, 1}), 0.562335, 1e-6);
  EXPECT_THROW(LabelEntropy(std::vector<int>{}), ValidationError);
}

TEST(EntropyTest, MatchesReferenceAndIsPermutationInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> size(1, 12), label(0, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<int> labels(size(rng));
    for (int& l : labels) l = label(rng);
    const double h = LabelEntropy(labels);
    ASSERT_NEAR(h, ReferenceEntropy(labels), 1e-9);
    ASSERT_GE(h, 0.0);
    ASSERT_LE(h, std::log(4.0) + 1e-12);
    std::vector<int> relabeled = labels;
    for (int& l : relabeled) l = 3 - l;
    ASSERT_NEAR(LabelEntropy(relabeled), h, 1e-9);
    const bool uniform = std::set<int>(labels.begin(), labels.end()).size() == 1;
    ASSERT_EQ(h == 0.0, uniform);
  }
}

TEST(EntropyTest, ModeEntropyUsesTheSubset) {
  ModeClustering c;
  c.labels = {0, 1, 0, 0, 1};
  c.centroids = {{0.0}, {1.0}};
  EXPECT_DOUBLE_EQ(ModeEntropy(c, std::vector<int>{0, 2, 3}), 0.0);
  EXPECT_NEAR(ModeEntropy(c, std::vector<int>{0, 1}), std::log(2.0), 1e-12);
  EXPECT_THROW(ModeEntropy(c, std::vector<int>{}), ValidationError);
  EXPECT_THROW(ModeEntropy(c, std::vector<int>{5}), ValidationError);
}

// Six one-step trajectories. Even ones show a pen and move right, odd ones
// show a marker and move left.
struct TwoModeFixture {
  TwoModeFixture() {
    auto d = std::make_shared<Dataset>();
    d->task = "place-in-cup";
    d->plan_length = 4;
    d->labels = LabelRegistry({"background", "agent", "pen", "marker"});
    for (int i = 0; i < 6; ++i) {
      const bool pen = i % 2 == 0;
      LabelGridImage image(32, 32, 0);
      for (int r = 10 + i / 2; r < 14 + i / 2; ++r) {
        for (int c = 8; c < 12; ++c) image.set(r, c, pen ? 2 : 3);
      }
      Trajectory t;
      ActionPlan plan;
      plan.steps.assign(4, Action{pen ? 1.0 : -1.0, 0.0, 0.0});
      t.pairs.push_back({{image, {0, 0, 0}, 0}, plan});
      t.environment_id = "fixture";
      t.mode_label = pen ? "drop-front" : "drop-top";
      d->trajectories.push_back(t);
      candidates.push_back({i, 0});
    }
    PolicyParams params;
    params.k = 1;
    policy = std::make_shared<PolicyModel>(FitPolicy(d, DefaultEncoderConfig(*d), params));
    corpus = std::make_shared<RetrievalCorpus>(d);
    LabelGridImage ood(32, 32, 0);
    for (int r = 11; r < 15; ++r) {
      for (int c = 8; c < 12; ++c) ood.set(r, c, 4);  // a pencil
    }
    ood_masks = GroundTruthSegment(ood, 0);
  }

  RefinementInputs Inputs() const {
    RefinementInputs in;
    in.ood_masks = ood_masks;
    in.candidates = candidates;
    in.corpus = corpus.get();
    in.policy = policy.get();
    in.resolve = NameResolver({"background", "agent", "pen", "marker", "pencil"});
    in.context.scenario = "fixture";
    in.seed = 7;
    return in;
  }

  std::shared_ptr<PolicyModel> policy;
  std::shared_ptr<RetrievalCorpus> corpus;
  std::vector<SegmentMask> ood_masks;
  std::vector<ObservationRef> candidates;
};

class CountingExpert : public Expert {
 public:
  explicit CountingExpert(std::vector<std::string> answers) : answers_(std::move(answers)) {}
  std::optional<std::string> Respond(const ExpertQuery& query) override {
    queries.push_back(query);
    if (calls_ >= static_cast<int>(answers_.size())) return std::nullopt;
    return answers_[calls_++];
  }
  std::vector<ExpertQuery> queries;

 private:
  std::vector<std::string> answers_;
  int calls_ = 0;
};

TEST(SampleActionSetTest, OnePlanPerObservationAndDeterministic) {
  const TwoModeFixture f;
  const std::vector<ActionPlan> one =
      SampleActionSet(std::span(f.candidates).first(1), *f.policy, 3);
  EXPECT_EQ(one.size(), 1u);
  const std::vector<ActionPlan> all = SampleActionSet(f.candidates, *f.policy, 3);
  ASSERT_EQ(all.size(), 6u);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(all[i], f.policy->dataset().trajectories[i].pairs[0].plan);
  EXPECT_EQ(all, SampleActionSet(f.candidates, *f.policy, 3));
}

TEST(RefineTest, ConfidentDescriptionAsksNothing) {
  const TwoModeFixture f;
  CountingExpert expert({});
  RefinementConfig cfg;
  cfg.top_m = 3;
  const RefinementOutcome out = RefineUntilConfident(
      f.Inputs(), DecodeDescription("match pencil with pen", f.Inputs().resolve), expert, cfg);
  EXPECT_EQ(out.queries, 0);
  EXPECT_EQ(out.entropy_trace, std::vector<double>{0.0});
  EXPECT_TRUE(expert.queries.empty());
  for (int i = 0; i < 3; ++i) EXPECT_EQ(out.retrieval.entries[i].ref.trajectory % 2, 0);
}

TEST(RefineTest, PassEndsAfterOneQuery) {
  const TwoModeFixture f;
  CountingExpert expert({"pass", "match pencil with pen"});
  RefinementConfig cfg;
  cfg.top_m = 3;
  const RefinementOutcome out = RefineUntilConfident(
      f.Inputs(), DecodeDescription("pass", f.Inputs().resolve), expert, cfg);
  EXPECT_EQ(out.queries, 1);
  ASSERT_EQ(out.entropy_trace.size(), 2u);
  // top three by tie order: pen, marker, pen
  EXPECT_NEAR(out.entropy_trace[0], ReferenceEntropy({0, 1, 0}), 1e-12);
  EXPECT_GT(out.entropy_trace[1], cfg.h_max);
  EXPECT_FALSE(out.aborted);
}

TEST(RefineTest, AnswerLowersEntropyAndExtendsDescription) {
  const TwoModeFixture f;
  CountingExpert expert({"match pencil with pen"});
  RefinementConfig cfg;
  cfg.top_m = 3;
  const RefinementOutcome out = RefineUntilConfident(
      f.Inputs(), DecodeDescription("pass", f.Inputs().resolve), expert, cfg);
  EXPECT_EQ(out.queries, 1);
  ASSERT_EQ(out.entropy_trace.size(), 2u);
  EXPECT_DOUBLE_EQ(out.entropy_trace[1], 0.0);
  EXPECT_EQ(out.description.ToString(), "match pencil with pen");
  ASSERT_EQ(expert.queries.size(), 1u);
  EXPECT_EQ(expert.queries[0].description, "pass");
  EXPECT_EQ(expert.queries[0].top.size(), 3u);
  EXPECT_EQ(expert.queries[0].clusters.size(), 2u);
  ASSERT_EQ(out.events.size(), 1u);
  EXPECT_TRUE(out.events[0].accepted);
}

TEST(RefineTest, QueryBudgetAndAbort) {
  const TwoModeFixture f;
  RefinementConfig cfg;
  cfg.top_m = 3;
  cfg.max_queries = 2;
  CountingExpert unhelpful({"match pencil with agent", "match pencil with agent",
                            "match pencil with agent"});
  const RefinementOutcome capped = RefineUntilConfident(
      f.Inputs(), DecodeDescription("pass", f.Inputs().resolve), unhelpful, cfg);
  EXPECT_EQ(capped.queries, 2);
  EXPECT_EQ(capped.entropy_trace.size(), 3u);

  CountingExpert silent({});
  const RefinementOutcome aborted = RefineUntilConfident(
      f.Inputs(), DecodeDescription("pass", f.Inputs().resolve), silent, cfg);
  EXPECT_TRUE(aborted.aborted);
  EXPECT_EQ(aborted.queries, 1);
  EXPECT_EQ(aborted.entropy_trace.size(), 2u);

  CountingExpert garbled({"match pencil"});
  const RefinementOutcome rejected = RefineUntilConfident(
      f.Inputs(), DecodeDescription("pass", f.Inputs().resolve), garbled, cfg);
  EXPECT_TRUE(rejected.aborted);
  EXPECT_FALSE(rejected.events.at(0).accepted);
}

TEST(RefineTest, ScriptedOracleSettlesBatteryScene) {
  const std::vector<Scenario>& suite = testing::Suite(Task::kPlaceInCup);
  const Scenario* battery = nullptr;
  for (const Scenario& s : suite) {
    if (s.environment_id == "place-battery") battery = &s;
  }
  ASSERT_NE(battery, nullptr);
  ScriptedExpert oracle(battery->objects[0].expert_script);
  const InterventionConfig cfg;
  const RolloutRecord record = Rollout(*battery, 0, testing::PreparedModels(Task::kPlaceInCup),
                                       &oracle, cfg, 3);
  bool refined = false;
  for (const DecisionEntry& e : record.entries) {
    if (!e.intervened) continue;
    refined = true;
    EXPECT_LE(e.entropy_trace.back(), cfg.refine.h_max) << "t=" << e.timestep;
    EXPECT_NE(e.description.find("match battery with marker"), std::string::npos)
        << e.description;
    EXPECT_LE(static_cast<int>(e.feedback.size()), cfg.refine.max_queries + 1);
  }
  EXPECT_TRUE(refined);
}

}  // namespace
}  // namespace aba
