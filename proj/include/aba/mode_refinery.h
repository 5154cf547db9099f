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

#ifndef ABA_MODE_REFINERY_H_
#define ABA_MODE_REFINERY_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aba/correspondence.h"
#include "aba/policy.h"
#include "aba/types.h"

namespace aba {

struct ModeClustering {
  std::vector<std::vector<double>> points;
  std::vector<int> labels;
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;

  int clusters() const { return static_cast<int>(centroids.size()); }
};

// One noiseless plan per observation. The i-th plan uses a seed derived from
// (seed, i).
std::vector<ActionPlan> SampleActionSet(std::span<const ObservationRef> observations,
                                        const PolicyModel& policy, std::uint64_t seed);

// K-means with k-means++ seeding and Lloyd iterations followed by single-point
// transfers, `restarts` runs, lowest inertia kept (the
// earliest run on ties). Throws ValidationError when there are fewer points
// than clusters or n_c < 1.
ModeClustering ClusterPoints(std::vector<std::vector<double>> points, int n_c,
                             std::uint64_t seed, int restarts = 10);
ModeClustering ClusterModes(const std::vector<ActionPlan>& plans, int n_c,
                            std::uint64_t seed, int restarts = 10);

// Natural-log Shannon entropy of the cluster labels at `subset`. Throws
// ValidationError on an empty subset or an index out of range.
double ModeEntropy(const ModeClustering& clustering, std::span<const int> subset);
double LabelEntropy(std::span<const int> labels);

struct ClusterSummary {
  int cluster = 0;
  int size = 0;           // members in the action set
  int top_members = 0;    // members among the top-M retrievals
  ObservationRef representative;  // plan nearest the centroid
  std::string mode_label;         // demonstrator mode of the representative
};

// What the expert sees when asked to refine.
struct ExpertQuery {
  std::string scenario;
  int timestep = 0;
  int ordinal = 0;  // queries already answered in this rollout
  LabelGridImage observation;
  std::vector<std::string> scene_labels;   // labels visible in the observation
  std::vector<std::string> known_labels;   // labels of the training registry
  std::string description;                 // current description
  std::vector<RetrievalEntry> top;         // top-M retrievals (maps dropped)
  std::vector<ClusterSummary> clusters;
  double entropy = 0.0;
};

// Returns feature-grammar text, or std::nullopt when the expert gives up.
class Expert {
 public:
  virtual ~Expert() = default;
  virtual std::optional<std::string> Respond(const ExpertQuery& query) = 0;
};

struct RefinementConfig {
  double h_max = 0.45;
  int max_queries = 5;
  int top_m = 5;
  int n_c = 2;
};

struct FeedbackEvent {
  ExpertQuery query;
  std::string response;  // empty on abort
  bool accepted = false;
};

struct RefinementOutcome {
  CorrespondenceDescription description;
  RankedRetrieval retrieval;
  std::vector<double> entropy_trace;
  int queries = 0;
  bool aborted = false;
  std::vector<FeedbackEvent> events;
  ModeClustering clustering;
  // index into the candidate list for every retrieval entry
  std::vector<int> entry_positions;
};

struct RefinementInputs {
  std::span<const SegmentMask> ood_masks;
  std::span<const ObservationRef> candidates;  // O_q, non-empty
  const RetrievalCorpus* corpus = nullptr;
  const PolicyModel* policy = nullptr;
  LabelResolver resolve;
  ExpertQuery context;  // scenario, timestep, observation, labels
  std::uint64_t seed = 0;
};

// Ranks, measures mode entropy over the top-M plans and keeps asking the
// expert while it exceeds h_max, up to max_queries. A pass, an abort or an
// unparseable answer ends the loop. The entropy trace always has
// queries + 1 entries.
RefinementOutcome RefineUntilConfident(const RefinementInputs& in,
                                       const CorrespondenceDescription& initial,
                                       Expert& expert, const RefinementConfig& cfg);

}  // namespace aba

#endif  // ABA_MODE_REFINERY_H_
