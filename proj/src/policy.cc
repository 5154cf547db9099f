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

#include "aba/policy.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <queue>
#include <unordered_map>
#include <utility>

#include <json.hpp>

#include "aba/dataset_io.h"
#include "aba/error.h"
#include "aba/rng.h"

namespace aba {

struct PolicyModel::Cache {
  std::mutex mu;
  std::unordered_map<int, std::vector<Neighbor>> neighbors;
};

namespace {

double MedianPairwiseDistance(const PolicyModel& model) {
  const int n = model.size();
  if (n < 2) return 0.0;
  Rng rng(0x7461755f77ULL);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<double> distances;
  const int samples = 4000;
  distances.reserve(samples);
  for (int s = 0; s < samples; ++s) {
    const int i = pick(rng);
    int j = pick(rng);
    if (j == i) j = (j + 1) % n;
    const Embedding a = model.embedding(i);
    const double d2 = model.rows().SquaredDistance(model.rows().Prepare(a), j);
    distances.push_back(std::sqrt(d2));
  }
  auto mid = distances.begin() + distances.size() / 2;
  std::nth_element(distances.begin(), mid, distances.end());
  return *mid;
}

}  // namespace

const ActionPlan& PolicyModel::plan(int i) const {
  const ObservationRef& r = refs_[i];
  return dataset_->trajectories[r.trajectory].pairs[r.timestep].plan;
}

const std::string& PolicyModel::mode_label(int i) const {
  return dataset_->trajectories[refs_[i].trajectory].mode_label;
}

int PolicyModel::IndexOf(const ObservationRef& ref) const {
  if (ref.trajectory < 0 || ref.trajectory >= static_cast<int>(trajectory_offsets_.size()) - 1) {
    throw ValidationError("observation ref trajectory out of range");
  }
  const int begin = trajectory_offsets_[ref.trajectory];
  const int end = trajectory_offsets_[ref.trajectory + 1];
  if (ref.timestep < 0 || begin + ref.timestep >= end) {
    throw ValidationError("observation ref timestep out of range");
  }
  return begin + ref.timestep;
}

std::vector<Neighbor> PolicyModel::Nearest(std::span<const double> z, int k) const {
  if (static_cast<int>(z.size()) != dimension()) {
    throw ValidationError("embedding dimension " + std::to_string(z.size()) +
                          " != model dimension " + std::to_string(dimension()));
  }
  k = std::min(k, size());
  // max-heap on (squared distance, index): the top is the current worst
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry> heap;
  const SparseRows::Query q = rows_->Prepare(z);
  for (int i = 0; i < size(); ++i) {
    const double d2 = rows_->SquaredDistance(q, i);
    if (static_cast<int>(heap.size()) < k) {
      heap.emplace(d2, i);
    } else if (d2 < heap.top().first) {
      heap.pop();
      heap.emplace(d2, i);
    }
  }
  std::vector<Neighbor> out(heap.size());
  for (int i = static_cast<int>(heap.size()) - 1; i >= 0; --i) {
    out[i] = {heap.top().second, std::sqrt(heap.top().first)};
    heap.pop();
  }
  return out;
}

const std::vector<Neighbor>& PolicyModel::NearestToPair(int i) const {
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->neighbors.find(i);
    if (it != cache_->neighbors.end()) return it->second;
  }
  std::vector<Neighbor> found = Nearest(embedding(i), params_.k);
  std::lock_guard<std::mutex> lock(cache_->mu);
  return cache_->neighbors.emplace(i, std::move(found)).first->second;
}

PolicyModel FitPolicy(std::shared_ptr<const Dataset> dataset, const EncoderConfig& cfg,
                      const PolicyParams& params) {
  if (!dataset || dataset->trajectories.empty()) {
    throw ValidationError("cannot fit a policy on an empty dataset");
  }
  cfg.Validate();
  if (params.k < 1) throw ValidationError("policy k must be >= 1");
  if (params.sigma_a < 0.0) throw ValidationError("policy sigma_a must be >= 0");
  PolicyModel model;
  model.encoder_ = cfg;
  model.params_ = params;
  model.dataset_ = std::move(dataset);
  model.cache_ = std::make_shared<PolicyModel::Cache>();
  const Dataset& d = *model.dataset_;
  model.trajectory_offsets_.push_back(0);
  std::vector<Embedding> all;
  all.reserve(d.pair_count());
  for (size_t t = 0; t < d.trajectories.size(); ++t) {
    const Trajectory& traj = d.trajectories[t];
    for (size_t i = 0; i < traj.pairs.size(); ++i) {
      all.push_back(EncodeAt(traj, static_cast<int>(i), cfg));
      model.refs_.push_back({static_cast<int>(t), static_cast<int>(i)});
    }
    model.trajectory_offsets_.push_back(static_cast<int>(model.refs_.size()));
  }
  auto rows = std::make_shared<SparseRows>(SparseRows::ColumnModes(all));
  for (Embedding& z : all) {
    rows->Append(z);
    Embedding().swap(z);
  }
  model.rows_ = std::move(rows);
  if (params.k > model.size()) {
    model.params_.k = model.size();
  }
  if (params.tau_w <= 0.0) {
    model.params_.tau_w = params.tau_scale * MedianPairwiseDistance(model);
  }
  return model;
}

int SampleNeighbor(const PolicyModel& model, std::span<const Neighbor> neighbors,
                   std::uint64_t seed) {
  if (neighbors.empty()) throw RuntimeFailure("no neighbours to sample from");
  const double tau = model.params().tau_w;
  const double d0 = neighbors.front().distance;
  std::vector<double> weights;
  weights.reserve(neighbors.size());
  for (const Neighbor& n : neighbors) {
    if (tau > 0.0) {
      weights.push_back(std::exp(-(n.distance - d0) / tau));
    } else {
      weights.push_back(n.distance == d0 ? 1.0 : 0.0);
    }
  }
  Rng rng(DeriveSeed(seed, {0x6e6e}));
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  return neighbors[pick(rng)].index;
}

namespace {

ActionPlan Noised(const ActionPlan& plan, double noise, std::uint64_t seed) {
  if (noise <= 0.0) return plan;
  ActionPlan out = plan;
  Rng rng(DeriveSeed(seed, {0x6e6f}));
  std::normal_distribution<double> n(0.0, noise);
  for (Action& a : out.steps) {
    a.dx = std::clamp(a.dx + n(rng), -kActionBound, kActionBound);
    a.dy = std::clamp(a.dy + n(rng), -kActionBound, kActionBound);
    a.dgripper = std::clamp(a.dgripper + n(rng), -kActionBound, kActionBound);
  }
  return out;
}

}  // namespace

ActionPlan SamplePlan(const PolicyModel& model, std::span<const double> z,
                      std::uint64_t seed, std::optional<double> noise) {
  const std::vector<Neighbor> neighbors = model.Nearest(z, model.params().k);
  const int chosen = SampleNeighbor(model, neighbors, seed);
  return Noised(model.plan(chosen), noise.value_or(model.params().sigma_a), seed);
}

ActionPlan SamplePlanForPair(const PolicyModel& model, int i, std::uint64_t seed,
                             std::optional<double> noise) {
  const std::vector<Neighbor>& neighbors = model.NearestToPair(i);
  const int chosen = SampleNeighbor(model, neighbors, seed);
  return Noised(model.plan(chosen), noise.value_or(model.params().sigma_a), seed);
}

void SavePolicyFile(const PolicyFile& file, const std::string& path) {
  nlohmann::json j = {{"format", "aba-policy"},
                      {"version", 1},
                      {"dataset", file.dataset_path},
                      {"dataset_hash", file.dataset_hash},
                      {"pool_grid", file.pool_grid},
                      {"history", file.history},
                      {"k", file.params.k},
                      {"tau_w", file.params.tau_w},
                      {"tau_scale", file.params.tau_scale},
                      {"sigma_a", file.params.sigma_a}};
  std::error_code ec;
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write policy file '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw RuntimeFailure("write failed for '" + path + "'");
}

PolicyFile LoadPolicyFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeFailure("cannot open policy file '" + path + "'");
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.value("format", "") != "aba-policy" || j.value("version", 0) != 1) {
      throw ValidationError("'" + path + "' is not a version-1 policy file");
    }
    PolicyFile f;
    f.dataset_path = j.at("dataset").get<std::string>();
    f.dataset_hash = j.at("dataset_hash").get<std::string>();
    f.pool_grid = j.at("pool_grid").get<int>();
    f.history = j.at("history").get<int>();
    f.params.k = j.at("k").get<int>();
    f.params.tau_w = j.at("tau_w").get<double>();
    f.params.tau_scale = j.at("tau_scale").get<double>();
    f.params.sigma_a = j.at("sigma_a").get<double>();
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("policy file '" + path + "' is malformed: " + e.what());
  }
}

PolicyFile DescribePolicy(const PolicyModel& model, const std::string& dataset_path) {
  PolicyFile f;
  f.dataset_path = dataset_path;
  f.dataset_hash = model.dataset().config_hash;
  f.pool_grid = model.encoder().pool_grid;
  f.history = model.encoder().history;
  f.params = model.params();
  return f;
}

PolicyModel RestorePolicy(const PolicyFile& file, std::shared_ptr<const Dataset> dataset) {
  if (!dataset || dataset->config_hash != file.dataset_hash) {
    throw ValidationError("policy was fitted on dataset " + file.dataset_hash +
                          ", found " + (dataset ? dataset->config_hash : "none"));
  }
  EncoderConfig cfg = DefaultEncoderConfig(*dataset);
  cfg.pool_grid = file.pool_grid;
  cfg.history = file.history;
  return FitPolicy(std::move(dataset), cfg, file.params);
}

}  // namespace aba
