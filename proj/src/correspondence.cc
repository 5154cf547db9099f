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

#include "aba/correspondence.h"

#include <algorithm>
#include <cctype>
#include <limits>

#include "aba/error.h"

namespace aba {
namespace {

std::vector<std::string> Tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (c == ';') {
      flush();
      tokens.emplace_back(";");
    } else {
      current.push_back(c);
    }
  }
  flush();
  return tokens;
}

class Parser {
 public:
  Parser(std::vector<std::string> tokens, const LabelResolver& resolve)
      : tokens_(std::move(tokens)), resolve_(resolve) {}

  CorrespondenceDescription Parse() {
    CorrespondenceDescription desc;
    if (tokens_.empty()) throw ParseError("empty description", 0);
    while (true) {
      if (desc.ends_with_pass()) {
        throw ParseError("'pass' must be the last feature", pos_);
      }
      desc.features.push_back(Feature());
      if (pos_ == static_cast<int>(tokens_.size())) break;
      Expect(";");
    }
    return desc;
  }

 private:
  bool AtEnd() const { return pos_ >= static_cast<int>(tokens_.size()); }

  const std::string& Next(const char* what) {
    if (AtEnd() || tokens_[pos_] == ";") {
      throw ParseError(std::string("expected ") + what, pos_);
    }
    return tokens_[pos_++];
  }

  void Expect(const std::string& token) {
    if (AtEnd() || tokens_[pos_] != token) {
      throw ParseError("expected '" + token + "'" +
                           (AtEnd() ? std::string(" at end of input")
                                    : ", found '" + tokens_[pos_] + "'"),
                       pos_);
    }
    ++pos_;
  }

  void Label(std::string& name, LabelId& id) {
    const int at = pos_;
    name = Next("a label name");
    const std::optional<LabelId> found = resolve_(name);
    if (!found) throw ParseError("unknown label '" + name + "'", at);
    id = *found;
  }

  CorrespondenceFeature Feature() {
    CorrespondenceFeature f;
    const int at = pos_;
    const std::string head = Next("a feature keyword");
    if (head == "pass") {
      f.kind = FeatureKind::kPass;
    } else if (head == "match") {
      f.kind = FeatureKind::kMatchLabels;
      Label(f.ood_name, f.ood_label);
      Expect("with");
      Label(f.id_name, f.id_label);
    } else if (head == "overlap") {
      f.kind = FeatureKind::kOverlap;
      Label(f.ood_name, f.ood_label);
      Label(f.id_name, f.id_label);
    } else if (head == "align-edge") {
      f.kind = FeatureKind::kAlignEdge;
      const int side_at = pos_;
      const std::string side = Next("left or right");
      if (side == "left") {
        f.side = EdgeSide::kLeft;
      } else if (side == "right") {
        f.side = EdgeSide::kRight;
      } else {
        throw ParseError("expected left or right, found '" + side + "'", side_at);
      }
      Label(f.ood_name, f.ood_label);
      Label(f.id_name, f.id_label);
    } else if (head == "align-vert" || head == "align") {  // "align" is shorthand
      f.kind = FeatureKind::kAlignVertical;
      const int anchor_at = pos_;
      const std::string anchor = Next("top or base");
      if (anchor == "top") {
        f.anchor = VerticalAnchor::kTop;
      } else if (anchor == "base") {
        f.anchor = VerticalAnchor::kBase;
      } else {
        throw ParseError("expected top or base, found '" + anchor + "'", anchor_at);
      }
      Label(f.ood_name, f.ood_label);
      Label(f.id_name, f.id_label);
    } else {
      throw ParseError("unknown feature '" + head + "'", at);
    }
    return f;
  }

  std::vector<std::string> tokens_;
  const LabelResolver& resolve_;
  int pos_ = 0;
};

bool Selects(LabelId wanted, LabelId actual, LabelId unknown_id) {
  if (wanted == unknown_id) return actual >= unknown_id;
  return wanted == actual;
}

}  // namespace

std::string CorrespondenceFeature::ToString() const {
  switch (kind) {
    case FeatureKind::kMatchLabels:
      return "match " + ood_name + " with " + id_name;
    case FeatureKind::kOverlap:
      return "overlap " + ood_name + " " + id_name;
    case FeatureKind::kAlignEdge:
      return std::string("align-edge ") + (side == EdgeSide::kLeft ? "left " : "right ") +
             ood_name + " " + id_name;
    case FeatureKind::kAlignVertical:
      return std::string("align-vert ") + (anchor == VerticalAnchor::kTop ? "top " : "base ") +
             ood_name + " " + id_name;
    case FeatureKind::kPass:
      return "pass";
  }
  return "pass";
}

std::string CorrespondenceDescription::ToString() const {
  std::string out;
  for (const CorrespondenceFeature& f : features) {
    if (!out.empty()) out += "; ";
    out += f.ToString();
  }
  return out;
}

void CorrespondenceDescription::Extend(const CorrespondenceDescription& more) {
  if (ends_with_pass()) features.pop_back();
  for (const CorrespondenceFeature& f : more.features) {
    if (ends_with_pass()) features.pop_back();
    features.push_back(f);
  }
}

CorrespondenceDescription DecodeDescription(const std::string& text,
                                            const LabelResolver& resolve) {
  return Parser(Tokenize(text), resolve).Parse();
}

FunctionalMap BuildFunctionalMap(std::span<const SegmentMask> ood_masks,
                                 std::span<const SegmentMask> id_masks,
                                 const CorrespondenceDescription& desc,
                                 LabelId unknown_id) {
  FunctionalMap map;
  for (size_t fi = 0; fi < desc.features.size(); ++fi) {
    const CorrespondenceFeature& f = desc.features[fi];
    if (f.kind == FeatureKind::kPass) continue;
    for (const SegmentMask& ood : ood_masks) {
      if (!Selects(f.ood_label, ood.label(), unknown_id)) continue;
      for (const SegmentMask& id : id_masks) {
        if (id.label() != f.id_label) continue;
        MaskPair pair;
        pair.id = id;
        pair.feature = static_cast<int>(fi);
        const BoundingBox a = ood.bounding_box();
        const BoundingBox b = id.bounding_box();
        if (f.kind == FeatureKind::kAlignEdge) {
          const int dcol = f.side == EdgeSide::kLeft ? b.left - a.left : b.right - a.right;
          pair.ood = ood.Translated(0, dcol);
          pair.transform = MaskTransform::kEdgeShift;
        } else if (f.kind == FeatureKind::kAlignVertical) {
          const int drow =
              f.anchor == VerticalAnchor::kTop ? b.top - a.top : b.bottom - a.bottom;
          pair.ood = ood.Translated(drow, 0);
          pair.transform = MaskTransform::kVerticalShift;
        } else {
          pair.ood = ood;
        }
        map.pairs.push_back(std::move(pair));
      }
    }
  }
  return map;
}

double Alignment(const FunctionalMap& map) {
  double f = 0.0;
  for (const MaskPair& p : map.pairs) f += IntersectionOverUnion(p.ood, p.id);
  return f;
}

std::vector<ObservationRef> FilterByProprio(const Dataset& dataset,
                                            const Proprioception& q, double lambda_q) {
  if (!(lambda_q > 0.0)) throw ValidationError("lambda_q must be positive");
  std::vector<ObservationRef> kept;
  for (size_t t = 0; t < dataset.trajectories.size(); ++t) {
    const Trajectory& traj = dataset.trajectories[t];
    double best = std::numeric_limits<double>::infinity();
    int best_index = -1;
    for (size_t i = 0; i < traj.pairs.size(); ++i) {
      const double d = ProprioDistance(traj.pairs[i].observation.proprio, q);
      if (d < best) {
        best = d;
        best_index = static_cast<int>(i);
      }
    }
    if (best_index >= 0 && best <= lambda_q) {
      kept.push_back({static_cast<int>(t), best_index});
    }
  }
  return kept;
}

std::vector<ObservationRef> RankedRetrieval::Top(int m) const {
  std::vector<ObservationRef> out;
  for (int i = 0; i < std::min(m, size()); ++i) out.push_back(entries[i].ref);
  return out;
}

RetrievalCorpus::RetrievalCorpus(std::shared_ptr<const Dataset> dataset, LabelId background)
    : dataset_(std::move(dataset)), background_(background) {
  if (!dataset_) throw ValidationError("retrieval corpus needs a dataset");
}

const LabelGridImage& RetrievalCorpus::image(const ObservationRef& ref) const {
  if (ref.trajectory < 0 ||
      ref.trajectory >= static_cast<int>(dataset_->trajectories.size())) {
    throw ValidationError("observation ref trajectory out of range");
  }
  const Trajectory& t = dataset_->trajectories[ref.trajectory];
  if (ref.timestep < 0 || ref.timestep >= static_cast<int>(t.pairs.size())) {
    throw ValidationError("observation ref timestep out of range");
  }
  return t.pairs[ref.timestep].observation.image;
}

const std::vector<SegmentMask>& RetrievalCorpus::Masks(const ObservationRef& ref) const {
  const LabelGridImage& img = image(ref);
  std::lock_guard<std::mutex> lock(mu_);
  auto it = masks_.find(ref);
  if (it == masks_.end()) it = masks_.emplace(ref, GroundTruthSegment(img, background_)).first;
  return it->second;
}

RankedRetrieval RankRetrieval(std::span<const SegmentMask> ood_masks,
                              std::span<const ObservationRef> candidates,
                              const RetrievalCorpus& corpus,
                              const CorrespondenceDescription& desc) {
  RankedRetrieval out;
  out.entries.reserve(candidates.size());
  for (const ObservationRef& ref : candidates) {
    RetrievalEntry e;
    e.ref = ref;
    e.map = BuildFunctionalMap(ood_masks, corpus.Masks(ref), desc, corpus.unknown_id());
    e.score = Alignment(e.map);
    out.entries.push_back(std::move(e));
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const RetrievalEntry& a, const RetrievalEntry& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.ref < b.ref;
            });
  return out;
}

}  // namespace aba
