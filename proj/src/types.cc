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

#include "aba/types.h"

#include <cmath>
#include <utility>

#include "aba/error.h"

namespace aba {

double ProprioDistance(const Proprioception& a, const Proprioception& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dg = a.gripper - b.gripper;
  return std::sqrt(dx * dx + dy * dy + dg * dg);
}

LabelGridImage::LabelGridImage(int width, int height, LabelId fill)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("image dimensions must be positive");
  }
  cells_.assign(static_cast<size_t>(width) * height, fill);
}

LabelGridImage::LabelGridImage(int width, int height, std::vector<LabelId> cells)
    : width_(width), height_(height), cells_(std::move(cells)) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("image dimensions must be positive");
  }
  if (cells_.size() != static_cast<size_t>(width) * height) {
    throw ValidationError("image cell count " + std::to_string(cells_.size()) +
                          " does not match " + std::to_string(width) + "x" +
                          std::to_string(height));
  }
}

std::vector<double> ActionPlan::Flatten() const {
  std::vector<double> flat;
  flat.reserve(steps.size() * 3);
  for (const Action& a : steps) {
    flat.push_back(a.dx);
    flat.push_back(a.dy);
    flat.push_back(a.dgripper);
  }
  return flat;
}

LabelRegistry::LabelRegistry(std::vector<std::string> names)
    : names_(std::move(names)) {
  for (size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) {
      throw ValidationError("label " + std::to_string(i) + " has empty name");
    }
    if (names_[i] == kUnknownLabelName) {
      throw ValidationError("label name 'unknown' is reserved");
    }
    for (size_t j = 0; j < i; ++j) {
      if (names_[j] == names_[i]) {
        throw ValidationError("duplicate label name '" + names_[i] + "'");
      }
    }
  }
}

const std::string& LabelRegistry::name(LabelId id) const {
  static const std::string unknown = kUnknownLabelName;
  if (id < names_.size()) return names_[id];
  return unknown;
}

std::optional<LabelId> LabelRegistry::find(const std::string& name) const {
  for (size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<LabelId>(i);
  }
  return std::nullopt;
}

int Dataset::pair_count() const {
  int count = 0;
  for (const Trajectory& t : trajectories) count += static_cast<int>(t.pairs.size());
  return count;
}

}  // namespace aba
