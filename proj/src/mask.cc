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

#include "aba/mask.h"

#include <algorithm>
#include <map>
#include <utility>

#include "aba/error.h"

namespace aba {

SegmentMask::SegmentMask(LabelId label, std::vector<Cell> cells)
    : label_(label), cells_(std::move(cells)) {
  std::sort(cells_.begin(), cells_.end());
  cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
  if (cells_.empty()) throw ValidationError("segment mask has no cells");
}

BoundingBox SegmentMask::bounding_box() const {
  BoundingBox box{cells_.front().row, cells_.front().col, cells_.front().row,
                  cells_.front().col};
  for (const Cell& c : cells_) {
    box.top = std::min(box.top, c.row);
    box.bottom = std::max(box.bottom, c.row);
    box.left = std::min(box.left, c.col);
    box.right = std::max(box.right, c.col);
  }
  return box;
}

SegmentMask SegmentMask::Translated(int drow, int dcol) const {
  SegmentMask moved = *this;
  for (Cell& c : moved.cells_) {
    c.row += drow;
    c.col += dcol;
  }
  return moved;
}

int IntersectionSize(const SegmentMask& a, const SegmentMask& b) {
  int count = 0;
  auto ia = a.cells().begin();
  auto ib = b.cells().begin();
  while (ia != a.cells().end() && ib != b.cells().end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

double IntersectionOverUnion(const SegmentMask& a, const SegmentMask& b) {
  const int inter = IntersectionSize(a, b);
  const int uni = a.size() + b.size() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<SegmentMask> GroundTruthSegment(const LabelGridImage& image,
                                            LabelId background) {
  std::map<LabelId, std::vector<Cell>> by_label;
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      const LabelId id = image.at(r, c);
      if (id != background) by_label[id].push_back({r, c});
    }
  }
  std::vector<SegmentMask> masks;
  masks.reserve(by_label.size());
  for (auto& [label, cells] : by_label) {
    masks.emplace_back(label, std::move(cells));
  }
  return masks;
}

}  // namespace aba
