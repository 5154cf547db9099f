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

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace aba::testing {

double BruteForceAlignment(const LabelGridImage& ood, const LabelGridImage& id,
                           const CorrespondenceDescription& desc, LabelId unknown) {
  auto box = [](const LabelGridImage& g, LabelId l, int& top, int& left, int& bottom,
                int& right) {
    top = left = 1000;
    bottom = right = -1000;
    bool any = false;
    for (int r = 0; r < g.height(); ++r) {
      for (int c = 0; c < g.width(); ++c) {
        if (g.at(r, c) != l) continue;
        any = true;
        top = std::min(top, r);
        bottom = std::max(bottom, r);
        left = std::min(left, c);
        right = std::max(right, c);
      }
    }
    return any;
  };
  double total = 0.0;
  for (const CorrespondenceFeature& f : desc.features) {
    if (f.kind == FeatureKind::kPass) continue;
    for (int lo = 1; lo < 16; ++lo) {
      const bool selected = f.ood_label == unknown ? lo >= unknown : lo == f.ood_label;
      int at, al, ab, ar, bt, bl, bb, br;
      if (!selected || !box(ood, lo, at, al, ab, ar)) continue;
      if (!box(id, f.id_label, bt, bl, bb, br)) continue;
      int dr = 0, dc = 0;
      if (f.kind == FeatureKind::kAlignEdge) dc = f.side == EdgeSide::kLeft ? bl - al : br - ar;
      if (f.kind == FeatureKind::kAlignVertical) {
        dr = f.anchor == VerticalAnchor::kTop ? bt - at : bb - ab;
      }
      int inter = 0, uni = 0;
      for (int r = -10; r < 20; ++r) {
        for (int c = -10; c < 20; ++c) {
          const int sr = r - dr, sc = c - dc;
          const bool in_a = sr >= 0 && sr < ood.height() && sc >= 0 && sc < ood.width() &&
                            ood.at(sr, sc) == lo;
          const bool in_b = r >= 0 && r < id.height() && c >= 0 && c < id.width() &&
                            id.at(r, c) == f.id_label;
          inter += in_a && in_b;
          uni += in_a || in_b;
        }
      }
      total += static_cast<double>(inter) / uni;
    }
  }
  return total;
}

LabelGridImage RandomGrid(std::mt19937_64& rng, int max_label) {
  std::uniform_int_distribution<int> label(1, max_label);
  std::bernoulli_distribution filled(0.45);
  LabelGridImage g(8, 8, 0);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      if (filled(rng)) g.set(r, c, static_cast<LabelId>(label(rng)));
    }
  }
  return g;
}

CorrespondenceDescription RandomDescription(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 3), count(1, 3), ood(1, 5), id(1, 3);
  CorrespondenceDescription d;
  for (int i = count(rng); i > 0; --i) {
    CorrespondenceFeature f;
    f.kind = static_cast<FeatureKind>(kind(rng));
    f.ood_label = static_cast<LabelId>(ood(rng));
    f.id_label = static_cast<LabelId>(id(rng));
    f.side = rng() % 2 ? EdgeSide::kLeft : EdgeSide::kRight;
    f.anchor = rng() % 2 ? VerticalAnchor::kTop : VerticalAnchor::kBase;
    d.features.push_back(f);
  }
  if (rng() % 4 == 0) d.features.push_back(CorrespondenceFeature());
  return d;
}

double SquaredDistance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double BruteForceTwoMeans(const std::vector<std::vector<double>>& points) {
  const int n = static_cast<int>(points.size());
  const size_t dim = points[0].size();
  double best = std::numeric_limits<double>::infinity();
  for (int mask = 1; mask < (1 << (n - 1)); ++mask) {
    double total = 0.0;
    for (int side = 0; side < 2; ++side) {
      std::vector<double> mean(dim, 0.0);
      int count = 0;
      for (int i = 0; i < n; ++i) {
        if (((mask >> i) & 1) != side) continue;
        for (size_t d = 0; d < dim; ++d) mean[d] += points[i][d];
        ++count;
      }
      for (double& m : mean) m /= count;
      for (int i = 0; i < n; ++i) {
        if (((mask >> i) & 1) == side) total += SquaredDistance(points[i], mean);
      }
    }
    best = std::min(best, total);
  }
  return best;
}

double ReferenceEntropy(const std::vector<int>& labels) {
  std::map<int, int> counts;
  for (int l : labels) ++counts[l];
  double h = 0.0;
  for (const auto& [label, c] : counts) {
    const double p = static_cast<double>(c) / labels.size();
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace aba::testing
