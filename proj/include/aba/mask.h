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

#ifndef ABA_MASK_H_
#define ABA_MASK_H_

#include <compare>
#include <vector>

#include "aba/types.h"

namespace aba {

struct Cell {
  int row = 0;
  int col = 0;

  bool operator==(const Cell&) const = default;
  auto operator<=>(const Cell&) const = default;
};

struct BoundingBox {
  int top = 0;
  int left = 0;
  int bottom = 0;  // inclusive
  int right = 0;   // inclusive

  bool operator==(const BoundingBox&) const = default;
};

// A labeled set of cells. Cells are kept sorted and unique; a translated mask
// may hold coordinates outside the image it came from.
class SegmentMask {
 public:
  SegmentMask() = default;
  SegmentMask(LabelId label, std::vector<Cell> cells);

  LabelId label() const { return label_; }
  const std::vector<Cell>& cells() const { return cells_; }
  int size() const { return static_cast<int>(cells_.size()); }
  BoundingBox bounding_box() const;
  SegmentMask Translated(int drow, int dcol) const;

  bool operator==(const SegmentMask&) const = default;

 private:
  LabelId label_ = 0;
  std::vector<Cell> cells_;
};

int IntersectionSize(const SegmentMask& a, const SegmentMask& b);
// |a ∩ b| / |a ∪ b|; 0 when both are empty.
double IntersectionOverUnion(const SegmentMask& a, const SegmentMask& b);

// One mask per distinct label other than `background`, in ascending label
// order. Stands in for an open-vocabulary segmentation model.
std::vector<SegmentMask> GroundTruthSegment(const LabelGridImage& image,
                                            LabelId background);

}  // namespace aba

#endif  // ABA_MASK_H_
