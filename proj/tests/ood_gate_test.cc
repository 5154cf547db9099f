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

#include "aba/ood_gate.h"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "aba/bench.h"
#include "aba/encoder.h"
#include "aba/error.h"
#include "aba/policy.h"
#include "aba/sim.h"
#include "test_support.h"

namespace aba {
namespace {

double BruteForceScore(const std::vector<Embedding>& index, const Embedding& z) {
  double best = -1.0;
  for (const Embedding& e : index) {
    double dot = 0.0, ne = 0.0, nz = 0.0;
    for (size_t i = 0; i < z.size(); ++i) {
      dot += e[i] * z[i];
      ne += e[i] * e[i];
      nz += z[i] * z[i];
    }
    best = std::max(best, dot / std::sqrt(ne * nz));
  }
  return best;
}

TEST(IdScoreTest, AnalyticValues) {
  const IdIndex index({{1, 0}, {0, 1}});
  EXPECT_NEAR(IdScore(std::vector<double>{3, 0}, index), 1.0, 1e-12);
  EXPECT_NEAR(IdScore(std::vector<double>{1 / std::sqrt(2.0), 1 / std::sqrt(2.0)}, index),
              std::sqrt(2.0) / 2, 1e-12);
  const IdIndex axis({{1, 0, 0}});
  EXPECT_NEAR(IdScore(std::vector<double>{0, 2, -1}, axis), 0.0, 1e-12);
  EXPECT_NEAR(IdScore(std::vector<double>{-1, 0, 0}, axis), -1.0, 1e-12);
}

TEST(IdScoreTest, ErrorCases) {
  EXPECT_THROW(IdIndex(std::vector<Embedding>{{0, 0}}), RuntimeFailure);
  const IdIndex index({{1, 0}});
  EXPECT_THROW(IdScore(std::vector<double>{0, 0}, index), RuntimeFailure);
  EXPECT_THROW(IdScore(std::vector<double>{1, 0, 0}, index), ValidationError);
  EXPECT_THROW(IdScore(std::vector<double>{1}, IdIndex()), ValidationError);
}

TEST(IdScoreTest, MatchesBruteForceAndIsMonotone) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> value(0.0, 1.0);
  auto random = [&](int dim) {
    Embedding e(dim);
    for (double& v : e) v = value(rng);
    return e;
  };
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Embedding> stored;
    for (int i = 0; i < 20; ++i) stored.push_back(random(12));
    const IdIndex index(stored);
    const Embedding z = random(12);
    const double score = IdScore(z, index);
    ASSERT_NEAR(score, BruteForceScore(stored, z), 1e-12);
    ASSERT_NEAR(IdScore(stored[trial % 20], index), 1.0, 1e-9);
    stored.push_back(random(12));
    ASSERT_GE(IdScore(z, IdIndex(stored)), score - 1e-15);
  }
}

TEST(QuantileTest, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(Quantile({0.99, 0.9, 0.95, 0.92}, 0.0), 0.9);
  EXPECT_DOUBLE_EQ(Quantile({0.8, 0.9}, 0.5), 0.85);
  EXPECT_DOUBLE_EQ(Quantile({0.8, 0.9, 1.0}, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(Quantile({1, 2, 3, 4, 5}, 0.25), 2.0);
  EXPECT_THROW(Quantile({}, 0.1), RuntimeFailure);
  EXPECT_THROW(Quantile({1.0}, 1.5), ValidationError);
}

TEST(CalibrateTest, ThresholdIsTheHeldOutQuantile) {
  IdIndex index({{1, 0}});
  // scores equal the first coordinate for unit vectors
  std::vector<Embedding> held;
  for (double s : {0.9, 0.92, 0.95, 0.99}) held.push_back({s, std::sqrt(1 - s * s)});
  EXPECT_NEAR(Calibrate(index, held, 0.0), 0.9, 1e-12);
  EXPECT_TRUE(index.calibrated());
  EXPECT_EQ(index.held_out_size(), 4);
  EXPECT_EQ(index.percentile(), 0.0);
  std::vector<Embedding> pair = {{0.8, 0.6}, {0.9, std::sqrt(1 - 0.81)}};
  EXPECT_NEAR(Calibrate(index, pair, 0.5), 0.85, 1e-12);
  std::vector<Embedding> constant(7, Embedding{0.6, 0.8});
  for (double p : {0.0, 0.1, 0.37, 0.5}) EXPECT_NEAR(Calibrate(index, constant, p), 0.6, 1e-12);
  EXPECT_THROW(Calibrate(index, {}, 0.1), RuntimeFailure);
  EXPECT_THROW(Calibrate(index, constant, 0.6), ValidationError);
}

TEST(IsOodTest, BoundaryCountsAsNominal) {
  IdIndex index({{1, 0}});
  index.SetCalibration(0.6, 0.02, 1);
  EXPECT_FALSE(IsOod(std::vector<double>{0.6, 0.8}, index).ood);
  EXPECT_NEAR(IsOod(std::vector<double>{0.6, 0.8}, index).score, 0.6, 1e-15);
  EXPECT_TRUE(IsOod(std::vector<double>{0.59, 0.8}, index).ood);
  EXPECT_FALSE(IsOod(std::vector<double>{1, 0}, index).ood);
}

Embedding EncodeStill(const Observation& o, const PolicyModel& policy) {
  const std::vector<Observation> seq = {o};
  return EncodeAt(seq, 0, policy.encoder());
}

TEST(IsOodTest, TrainingObservationsAreNominal) {
  for (Task task : {Task::kSweepSort, Task::kPlaceInCup}) {
    const RuntimeModels& m = testing::PreparedModels(task);
    for (int i = 0; i < m.policy->size(); i += 97) {
      const OodVerdict v = IsOod(m.policy->embedding(i), *m.index);
      EXPECT_FALSE(v.ood);
      EXPECT_NEAR(v.score, 1.0, 1e-9);
    }
  }
}

TEST(IsOodTest, FreshInDistributionFalseAlarmRate) {
  for (Task task : {Task::kSweepSort, Task::kPlaceInCup}) {
    const RuntimeModels& m = testing::PreparedModels(task);
    const std::vector<Embedding> fresh =
        HeldOutEmbeddings(testing::Suite(task), *m.policy, 10, 424242);
    ASSERT_GE(fresh.size(), 500u);
    int alarms = 0;
    for (const Embedding& z : fresh) alarms += IsOod(z, *m.index).ood;
    const double rate = static_cast<double>(alarms) / fresh.size();
    EXPECT_LE(rate, m.index->percentile() + 0.05) << TaskName(task);
  }
}

TEST(IsOodTest, UnknownObjectScenesAreFlagged) {
  for (Task task : {Task::kSweepSort, Task::kPlaceInCup}) {
    const RuntimeModels& m = testing::PreparedModels(task);
    int flagged = 0, total = 0;
    for (const Scenario& s : testing::Suite(task)) {
      if (s.ood_kind != OodKind::kObject) continue;
      for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const WorldState state = InitialState(s, 0, seed);
        flagged += IsOod(EncodeStill({Render(state, s), state.agent, 0}, *m.policy), *m.index).ood;
        ++total;
      }
    }
    EXPECT_GE(flagged, 0.95 * total) << TaskName(task) << ": " << flagged << "/" << total;
  }
}

TEST(IndexFileTest, RoundTrip) {
  testing::TempDir dir;
  const IndexFile f{"abc", 0.875, 0.02, 640};
  SaveIndexFile(f, dir.Join("models/x.idx"));
  EXPECT_EQ(LoadIndexFile(dir.Join("models/x.idx")), f);
  EXPECT_THROW(LoadIndexFile(dir.Join("none.idx")), RuntimeFailure);
}

}  // namespace
}  // namespace aba
