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

#ifndef ABA_SIM_H_
#define ABA_SIM_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aba/mask.h"
#include "aba/types.h"

namespace aba {

// Deterministic planar manipulation world. Coordinates are grid cells:
// x is the column, y the row (row 0 at the top). Objects are axis-aligned
// rectangles anchored at their top-left cell; the agent is a single cell.

enum class Task { kSweepSort, kPlaceInCup };
enum class OodKind { kNone, kBackground, kObject };

std::string TaskName(Task task);
Task ParseTask(const std::string& name);  // throws UsageError
std::string OodKindName(OodKind kind);
OodKind ParseOodKind(const std::string& name);

inline constexpr int kGridSize = 32;
inline constexpr int kPlanLength = 16;
inline constexpr double kGraspRadius = 2.0;
inline constexpr LabelId kTrainingBackground = 0;
inline constexpr LabelId kAgentLabel = 1;

struct ObjectSpec {
  std::string label_name;
  LabelId label = 0;
  int width = 1;
  int height = 1;
  // "sort-direction": up|down for sweep-sort, "drop-mode": top|front for
  // place-in-cup.
  std::map<std::string, std::string> attributes;
  bool graspable = true;

  bool operator==(const ObjectSpec&) const = default;
};

// Top-left x is drawn uniformly from [x_min, x_max) and floored to a cell.
struct PlacementRange {
  double x_min = 0.0;
  double x_max = 1.0;
  int y = 0;

  bool operator==(const PlacementRange&) const = default;
};

struct SceneObject {
  ObjectSpec spec;
  PlacementRange placement;
  // Oracle expert answers for this object, indexed by query ordinal.
  std::vector<std::string> expert_script;

  bool operator==(const SceneObject&) const = default;
};

// Static scenery such as the cup.
struct Fixture {
  std::string label_name;
  LabelId label = 0;
  int x = 0;
  int y = 0;
  int width = 1;
  int height = 1;

  bool operator==(const Fixture&) const = default;
};

struct Scenario {
  Task task = Task::kSweepSort;
  std::string environment_id;
  int grid_width = kGridSize;
  int grid_height = kGridSize;
  int horizon = 80;
  LabelRegistry training_labels;
  // Fresh ids (above the reserved unknown id) for labels never trained on.
  std::map<LabelId, std::string> novel_labels;
  LabelId background_label = kTrainingBackground;
  OodKind ood_kind = OodKind::kNone;
  std::vector<Fixture> fixtures;
  // Episodes place exactly one of these.
  std::vector<SceneObject> objects;
  Proprioception home;

  bool operator==(const Scenario&) const = default;

  std::string LabelName(LabelId id) const;
  std::optional<LabelId> FindLabel(const std::string& name) const;
  // Mode the demonstrator uses for the object, e.g. "sweep-up", "drop-front".
  std::string GroundTruthMode(int object_index) const;
  int FindObject(const std::string& label_name) const;  // -1 if absent
};

struct WorldState {
  Proprioception agent;
  double object_x = 0.0;
  double object_y = 0.0;
  bool attached = false;
  int step = 0;
  int object_index = 0;
  // object pose minus agent pose while attached
  double grip_dx = 0.0;
  double grip_dy = 0.0;

  bool operator==(const WorldState&) const = default;
};

// Samples the object's placement from `seed`.
WorldState InitialState(const Scenario& scenario, int object_index,
                        std::uint64_t seed);

// Draw order: background, fixtures, object, agent. Throws RuntimeFailure
// when the object footprint leaves the grid.
LabelGridImage Render(const WorldState& state, const Scenario& scenario);

// Clamps the action, integrates the agent, toggles attachment when the
// gripper crosses 0.5 within kGraspRadius of the object and carries an
// attached object rigidly.
WorldState Step(const WorldState& state, const Action& action,
                const Scenario& scenario);

// Distance from the agent to the nearest object cell.
double DistanceToObject(const WorldState& state, const Scenario& scenario);

struct SubgoalResult {
  std::string name;  // "A", "B", "C"
  bool achieved = false;

  bool operator==(const SubgoalResult&) const = default;
};

struct EpisodeOutcome {
  std::vector<SubgoalResult> subgoals;
  bool success = false;
  std::string executed_mode;  // empty until a mode signature is observed
  bool grasp_above_midline = false;

  bool operator==(const EpisodeOutcome&) const = default;
  int achieved_count() const;
};

// Watches state transitions and scores the task's subgoals.
//   sweep-sort:   A wiper engaged with the object; B first decisive carry
//                 goes the correct way; success = B and the object centre
//                 ends in the correct goal band.
//   place-in-cup: A grasped; B first mode signature after the grasp matches
//                 the object's drop mode; C = B and the object rests
//                 released inside the cup at the end.
class OutcomeTracker {
 public:
  OutcomeTracker(const Scenario& scenario, const WorldState& initial);
  void Observe(const WorldState& state);
  EpisodeOutcome Finish() const;

 private:
  const Scenario* scenario_;
  WorldState last_;
  double initial_center_y_ = 0.0;
  bool grasped_ = false;
  bool grasp_above_ = false;
  std::string first_mode_;
};

struct DemoOptions {
  int plan_length = kPlanLength;
  // std-dev of Gaussian noise added to executed demonstrator actions
  double action_noise = 0.0;
  // idle pairs kept after the task completes
  int idle_tail = kPlanLength;
};

// Closed-loop scripted expert for an in-distribution scenario. Throws
// ValidationError for OOD scenarios and RuntimeFailure when the placement is
// unreachable within the horizon.
Trajectory ScriptedDemonstrator(const Scenario& scenario, int object_index,
                                std::uint64_t seed,
                                const DemoOptions& options = {});

// Also returns the world states visited, for tests and the outcome checks.
struct DemoRun {
  Trajectory trajectory;
  std::vector<WorldState> states;
  EpisodeOutcome outcome;
};
DemoRun RunDemonstrator(const Scenario& scenario, int object_index,
                        std::uint64_t seed, const DemoOptions& options = {});

// Two ID scenarios, one OOD-background scenario holding both ID objects, and
// three OOD-object scenarios.
std::vector<Scenario> MakeBenchmarkSuite(Task task);
LabelRegistry TaskLabels(Task task);
const Scenario& FindScenario(const std::vector<Scenario>& suite,
                             const std::string& environment_id);

// Scenario suite files (scenarios/<task>.cfg) hold JSON; see scenarios/README.
std::string ScenarioSuiteToText(const std::vector<Scenario>& suite);
std::vector<Scenario> ScenarioSuiteFromText(const std::string& text);
std::vector<Scenario> LoadScenarioSuite(const std::string& path);

}  // namespace aba

#endif  // ABA_SIM_H_
