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

#ifndef ABA_POLICY_H_
#define ABA_POLICY_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aba/encoder.h"
#include "aba/sparse_rows.h"
#include "aba/types.h"

namespace aba {

// Reference multimodal imitator: locally weighted sampling over the k
// nearest demonstrated (embedding, plan) pairs. Anything that can encode an
// observation, sample a plan for an embedding and accept an averaged
// embedding can replace it; the runtime only uses this surface.
struct PolicyParams {
  int k = 8;
  // Softness of the neighbour weights exp(-d / tau_w). Non-positive values
  // resolve to tau_scale * median pairwise embedding distance at fit time.
  double tau_w = 0.0;
  double tau_scale = 0.05;
  double sigma_a = 0.02;

  bool operator==(const PolicyParams&) const = default;
};

struct Neighbor {
  int index = 0;
  double distance = 0.0;
};

class PolicyModel {
 public:
  PolicyModel() = default;

  const EncoderConfig& encoder() const { return encoder_; }
  const PolicyParams& params() const { return params_; }
  const Dataset& dataset() const { return *dataset_; }
  std::shared_ptr<const Dataset> shared_dataset() const { return dataset_; }

  int size() const { return static_cast<int>(refs_.size()); }
  int dimension() const { return encoder_.dimension(); }
  Embedding embedding(int i) const { return rows_->Row(i); }
  const SparseRows& rows() const { return *rows_; }
  std::shared_ptr<const SparseRows> shared_rows() const { return rows_; }
  const ActionPlan& plan(int i) const;
  const std::string& mode_label(int i) const;
  ObservationRef ref(int i) const { return refs_[i]; }
  int IndexOf(const ObservationRef& ref) const;

  // k nearest training pairs by Euclidean distance, nearest first; ties go to
  // the lower index.
  std::vector<Neighbor> Nearest(std::span<const double> z, int k) const;
  // Memoized Nearest() for a training pair's own embedding.
  const std::vector<Neighbor>& NearestToPair(int i) const;

 private:
  friend PolicyModel FitPolicy(std::shared_ptr<const Dataset>, const EncoderConfig&,
                               const PolicyParams&);
  struct Cache;

  EncoderConfig encoder_;
  PolicyParams params_;
  std::shared_ptr<const Dataset> dataset_;
  std::shared_ptr<const SparseRows> rows_;
  std::vector<ObservationRef> refs_;
  std::vector<int> trajectory_offsets_;
  std::shared_ptr<Cache> cache_;
};

// Encodes every (observation, plan) pair. Throws ValidationError on an empty
// dataset or k < 1.
PolicyModel FitPolicy(std::shared_ptr<const Dataset> dataset, const EncoderConfig& cfg,
                      const PolicyParams& params);

// Picks one of the k nearest pairs with probability proportional to
// exp(-d / tau_w) and returns its plan plus N(0, noise) per component,
// clamped to the action bounds. `noise` defaults to params().sigma_a.
ActionPlan SamplePlan(const PolicyModel& model, std::span<const double> z,
                      std::uint64_t seed, std::optional<double> noise = std::nullopt);
// Same as SamplePlan(model, model.embedding(i), ...) but reuses the cache.
ActionPlan SamplePlanForPair(const PolicyModel& model, int i, std::uint64_t seed,
                             std::optional<double> noise = std::nullopt);
// Index of the pair SamplePlan would draw (before noise).
int SampleNeighbor(const PolicyModel& model, std::span<const Neighbor> neighbors,
                   std::uint64_t seed);

// models/<task>.pmod: the model is a pure function of its dataset and
// parameters, so the file stores those and the embeddings are rebuilt.
struct PolicyFile {
  std::string dataset_path;
  std::string dataset_hash;
  int pool_grid = 16;
  int history = 2;
  PolicyParams params;

  bool operator==(const PolicyFile&) const = default;
};

void SavePolicyFile(const PolicyFile& file, const std::string& path);
PolicyFile LoadPolicyFile(const std::string& path);
PolicyFile DescribePolicy(const PolicyModel& model, const std::string& dataset_path);
// Rebuilds the model; throws ValidationError if the dataset hash changed.
PolicyModel RestorePolicy(const PolicyFile& file, std::shared_ptr<const Dataset> dataset);

}  // namespace aba

#endif  // ABA_POLICY_H_
