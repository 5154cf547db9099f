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

#ifndef ABA_TYPES_H_
#define ABA_TYPES_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aba {

using LabelId = std::uint16_t;

// Planar end-effector state. Gripper 0 is open, 1 closed.
struct Proprioception {
  double x = 0.0;
  double y = 0.0;
  double gripper = 0.0;

  bool operator==(const Proprioception&) const = default;
};

double ProprioDistance(const Proprioception& a, const Proprioception& b);

// Row-major grid of semantic label ids. Stands in for a camera image.
class LabelGridImage {
 public:
  LabelGridImage() = default;
  LabelGridImage(int width, int height, LabelId fill = 0);
  LabelGridImage(int width, int height, std::vector<LabelId> cells);

  int width() const { return width_; }
  int height() const { return height_; }
  LabelId at(int row, int col) const { return cells_[row * width_ + col]; }
  void set(int row, int col, LabelId label) { cells_[row * width_ + col] = label; }
  bool contains(int row, int col) const {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }
  const std::vector<LabelId>& cells() const { return cells_; }

  bool operator==(const LabelGridImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<LabelId> cells_;
};

struct Observation {
  LabelGridImage image;
  Proprioception proprio;
  int timestep = 0;

  bool operator==(const Observation&) const = default;
};

// Per-step delta command.
struct Action {
  double dx = 0.0;
  double dy = 0.0;
  double dgripper = 0.0;

  bool operator==(const Action&) const = default;
};

struct ActionPlan {
  std::vector<Action> steps;

  bool operator==(const ActionPlan&) const = default;
  // steps flattened as (dx, dy, dgripper) triples
  std::vector<double> Flatten() const;
};

struct StepPair {
  Observation observation;
  ActionPlan plan;

  bool operator==(const StepPair&) const = default;
};

struct Trajectory {
  std::vector<StepPair> pairs;
  std::string environment_id;
  std::string mode_label;

  bool operator==(const Trajectory&) const = default;
};

// Dense id -> name table. The id one past the last registered label is
// reserved for observations carrying labels the registry does not know.
class LabelRegistry {
 public:
  LabelRegistry() = default;
  explicit LabelRegistry(std::vector<std::string> names);

  int size() const { return static_cast<int>(names_.size()); }
  LabelId unknown_id() const { return static_cast<LabelId>(names_.size()); }
  bool contains(LabelId id) const { return id < names_.size(); }
  const std::string& name(LabelId id) const;
  std::optional<LabelId> find(const std::string& name) const;
  const std::vector<std::string>& names() const { return names_; }

  bool operator==(const LabelRegistry&) const = default;

 private:
  std::vector<std::string> names_;
};

inline constexpr const char* kUnknownLabelName = "unknown";

struct Dataset {
  std::string task;
  int plan_length = 16;
  int grid_width = 32;
  int grid_height = 32;
  LabelRegistry labels;
  std::string config_hash;
  std::vector<Trajectory> trajectories;

  bool operator==(const Dataset&) const = default;
  int pair_count() const;
};

using Embedding = std::vector<double>;

// Addresses one observation inside a dataset.
struct ObservationRef {
  int trajectory = 0;
  int timestep = 0;

  bool operator==(const ObservationRef&) const = default;
  auto operator<=>(const ObservationRef&) const = default;
};

}  // namespace aba

#endif  // ABA_TYPES_H_
