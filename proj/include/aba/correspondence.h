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

#ifndef ABA_CORRESPONDENCE_H_
#define ABA_CORRESPONDENCE_H_

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aba/mask.h"
#include "aba/types.h"

namespace aba {

enum class FeatureKind { kMatchLabels, kOverlap, kAlignEdge, kAlignVertical, kPass };
enum class EdgeSide { kLeft, kRight };
enum class VerticalAnchor { kTop, kBase };

struct CorrespondenceFeature {
  FeatureKind kind = FeatureKind::kPass;
  std::string ood_name;
  std::string id_name;
  LabelId ood_label = 0;
  LabelId id_label = 0;
  EdgeSide side = EdgeSide::kLeft;          // kAlignEdge only
  VerticalAnchor anchor = VerticalAnchor::kTop;  // kAlignVertical only

  bool operator==(const CorrespondenceFeature&) const = default;
  // Canonical grammar form, e.g. "align-edge left pencil pen".
  std::string ToString() const;
};

struct CorrespondenceDescription {
  std::vector<CorrespondenceFeature> features;

  bool operator==(const CorrespondenceDescription&) const = default;
  bool empty() const { return features.empty(); }
  bool ends_with_pass() const {
    return !features.empty() && features.back().kind == FeatureKind::kPass;
  }
  std::string ToString() const;  // "; "-joined
  // Appends `more`, first dropping a terminal pass so the result keeps at
  // most one pass and only at the end.
  void Extend(const CorrespondenceDescription& more);
};

// Maps a label name to its id; std::nullopt for names it does not know.
using LabelResolver = std::function<std::optional<LabelId>(const std::string&)>;

// Grammar, clauses separated by ';':
//   match <ood> with <id> | overlap <ood> <id> |
//   align-edge left|right <ood> <id> | align-vert top|base <ood> <id> | pass
// "align top|base" is accepted as a shorthand for "align-vert top|base".
// Throws ParseError carrying the zero-based token index (';' counts as a
// token) on a grammar violation or an unresolvable label.
CorrespondenceDescription DecodeDescription(const std::string& text,
                                            const LabelResolver& resolve);

enum class MaskTransform { kNone, kEdgeShift, kVerticalShift };

struct MaskPair {
  SegmentMask ood;  // after the transform
  SegmentMask id;
  MaskTransform transform = MaskTransform::kNone;
  int feature = 0;  // index into the description

  bool operator==(const MaskPair&) const = default;
};

struct FunctionalMap {
  std::vector<MaskPair> pairs;

  int size() const { return static_cast<int>(pairs.size()); }
  bool operator==(const FunctionalMap&) const = default;
};

// Pairs masks feature by feature. An ood label equal to `unknown_id` selects
// every OOD mask whose label is unknown_id or above. Features naming labels
// absent from either side contribute nothing.
FunctionalMap BuildFunctionalMap(std::span<const SegmentMask> ood_masks,
                                 std::span<const SegmentMask> id_masks,
                                 const CorrespondenceDescription& desc,
                                 LabelId unknown_id);

// Sum of per-pair IoU; 0 for an empty map.
double Alignment(const FunctionalMap& map);

// For each trajectory, the pair whose proprioception is nearest to q (first
// on ties), kept when that distance is at most lambda_q. Ordered by
// trajectory. Throws ValidationError unless lambda_q > 0.
std::vector<ObservationRef> FilterByProprio(const Dataset& dataset,
                                            const Proprioception& q, double lambda_q);

struct RetrievalEntry {
  ObservationRef ref;
  double score = 0.0;
  FunctionalMap map;
};

// Descending score, ties by trajectory then timestep.
struct RankedRetrieval {
  std::vector<RetrievalEntry> entries;

  int size() const { return static_cast<int>(entries.size()); }
  std::vector<ObservationRef> Top(int m) const;
};

// Ground-truth segmentation of dataset frames, memoized per frame.
class RetrievalCorpus {
 public:
  explicit RetrievalCorpus(std::shared_ptr<const Dataset> dataset,
                           LabelId background = 0);

  const Dataset& dataset() const { return *dataset_; }
  LabelId unknown_id() const { return dataset_->labels.unknown_id(); }
  const LabelGridImage& image(const ObservationRef& ref) const;
  const std::vector<SegmentMask>& Masks(const ObservationRef& ref) const;

 private:
  std::shared_ptr<const Dataset> dataset_;
  LabelId background_;
  mutable std::mutex mu_;
  mutable std::map<ObservationRef, std::vector<SegmentMask>> masks_;
};

RankedRetrieval RankRetrieval(std::span<const SegmentMask> ood_masks,
                              std::span<const ObservationRef> candidates,
                              const RetrievalCorpus& corpus,
                              const CorrespondenceDescription& desc);

}  // namespace aba

#endif  // ABA_CORRESPONDENCE_H_
