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

#include "aba/sim.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "aba/dataset_io.h"
#include "aba/error.h"
#include "aba/rng.h"

namespace aba {
namespace {

// sweep-sort layout
constexpr int kSweepObjectRow = 14;
constexpr double kSweepUpTarget = 3.0;     // object centre row after sweeping up
constexpr double kSweepDownTarget = 28.0;  // ... and down
constexpr double kSweepUpBand = 5.5;       // success: centre row <= this
constexpr double kSweepDownBand = 25.5;    // success: centre row >= this
constexpr double kSweepDecisive = 3.0;     // rows carried before a mode counts

// place-in-cup layout
constexpr int kPlaceObjectRow = 20;
constexpr int kCupX = 26;
constexpr int kCupY = 16;
constexpr int kCupWidth = 6;
constexpr int kCupHeight = 10;
constexpr double kCupDropX = 27.5;   // object centre column inside the cup
constexpr double kCupDropY = 20.5;   // object centre row for a top drop
constexpr double kLiftRow = 9.5;     // object centre row while carried high
constexpr double kApproachSlowdown = 2.0;  // distance below which approach speed halves
constexpr double kTopSignature = 14.0;
constexpr double kFrontSignature = 23.0;

struct Center {
  double x;
  double y;
};

Center ObjectCenter(const WorldState& s, const ObjectSpec& spec) {
  return {s.object_x + (spec.width - 1) / 2.0, s.object_y + (spec.height - 1) / 2.0};
}

double Clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

double SafeComponent(double v, double bound) {
  if (!std::isfinite(v)) return 0.0;
  return Clamp(v, -bound, bound);
}

const ObjectSpec& SpecOf(const Scenario& scenario, int object_index) {
  if (object_index < 0 || object_index >= static_cast<int>(scenario.objects.size())) {
    throw ValidationError("object index " + std::to_string(object_index) +
                          " out of range for " + scenario.environment_id);
  }
  return scenario.objects[object_index].spec;
}

}  // namespace

std::string TaskName(Task task) {
  return task == Task::kSweepSort ? "sweep-sort" : "place-in-cup";
}

Task ParseTask(const std::string& name) {
  if (name == "sweep-sort" || name == "sweep") return Task::kSweepSort;
  if (name == "place-in-cup" || name == "place") return Task::kPlaceInCup;
  throw UsageError("unknown task '" + name + "' (expected sweep-sort|place-in-cup)");
}

std::string OodKindName(OodKind kind) {
  switch (kind) {
    case OodKind::kNone:
      return "none";
    case OodKind::kBackground:
      return "background";
    case OodKind::kObject:
      return "object";
  }
  return "none";
}

OodKind ParseOodKind(const std::string& name) {
  if (name == "none") return OodKind::kNone;
  if (name == "background") return OodKind::kBackground;
  if (name == "object") return OodKind::kObject;
  throw ValidationError("unknown ood_kind '" + name + "'");
}

std::string Scenario::LabelName(LabelId id) const {
  if (training_labels.contains(id)) return training_labels.name(id);
  auto it = novel_labels.find(id);
  if (it != novel_labels.end()) return it->second;
  return kUnknownLabelName;
}

std::optional<LabelId> Scenario::FindLabel(const std::string& name) const {
  if (auto id = training_labels.find(name)) return id;
  for (const auto& [id, label] : novel_labels) {
    if (label == name) return id;
  }
  if (name == kUnknownLabelName) return training_labels.unknown_id();
  return std::nullopt;
}

std::string Scenario::GroundTruthMode(int object_index) const {
  const ObjectSpec& spec = SpecOf(*this, object_index);
  if (task == Task::kSweepSort) {
    auto it = spec.attributes.find("sort-direction");
    if (it == spec.attributes.end()) {
      throw ValidationError(spec.label_name + " lacks sort-direction");
    }
    return "sweep-" + it->second;
  }
  auto it = spec.attributes.find("drop-mode");
  if (it == spec.attributes.end()) {
    throw ValidationError(spec.label_name + " lacks drop-mode");
  }
  return "drop-" + it->second;
}

int Scenario::FindObject(const std::string& label_name) const {
  for (size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].spec.label_name == label_name) return static_cast<int>(i);
  }
  return -1;
}

WorldState InitialState(const Scenario& scenario, int object_index,
                        std::uint64_t seed) {
  SpecOf(scenario, object_index);
  const SceneObject& object = scenario.objects[object_index];
  Rng rng(DeriveSeed(seed, {0x706c616365ULL}));
  std::uniform_real_distribution<double> place(object.placement.x_min,
                                               object.placement.x_max);
  WorldState state;
  state.agent = scenario.home;
  state.object_x = std::floor(place(rng));
  state.object_y = object.placement.y;
  state.object_index = object_index;
  return state;
}

double DistanceToObject(const WorldState& state, const Scenario& scenario) {
  const ObjectSpec& spec = SpecOf(scenario, state.object_index);
  const double left = state.object_x;
  const double right = state.object_x + spec.width - 1;
  const double top = state.object_y;
  const double bottom = state.object_y + spec.height - 1;
  const double dx = std::max({left - state.agent.x, 0.0, state.agent.x - right});
  const double dy = std::max({top - state.agent.y, 0.0, state.agent.y - bottom});
  return std::sqrt(dx * dx + dy * dy);
}

LabelGridImage Render(const WorldState& state, const Scenario& scenario) {
  LabelGridImage image(scenario.grid_width, scenario.grid_height,
                       scenario.background_label);
  for (const Fixture& f : scenario.fixtures) {
    for (int r = f.y; r < f.y + f.height; ++r) {
      for (int c = f.x; c < f.x + f.width; ++c) {
        if (image.contains(r, c)) image.set(r, c, f.label);
      }
    }
  }
  const ObjectSpec& spec = SpecOf(scenario, state.object_index);
  const int ox = static_cast<int>(std::lround(state.object_x));
  const int oy = static_cast<int>(std::lround(state.object_y));
  if (!image.contains(oy, ox) ||
      !image.contains(oy + spec.height - 1, ox + spec.width - 1)) {
    throw RuntimeFailure("object '" + spec.label_name + "' out of bounds at (" +
                         std::to_string(ox) + "," + std::to_string(oy) + ")");
  }
  for (int r = oy; r < oy + spec.height; ++r) {
    for (int c = ox; c < ox + spec.width; ++c) image.set(r, c, spec.label);
  }
  const int ax = static_cast<int>(std::lround(state.agent.x));
  const int ay = static_cast<int>(std::lround(state.agent.y));
  if (image.contains(ay, ax)) image.set(ay, ax, kAgentLabel);
  return image;
}

WorldState Step(const WorldState& state, const Action& action,
                const Scenario& scenario) {
  const ObjectSpec& spec = SpecOf(scenario, state.object_index);
  WorldState next = state;
  const double dx = SafeComponent(action.dx, kActionBound);
  const double dy = SafeComponent(action.dy, kActionBound);
  const double dg = SafeComponent(action.dgripper, 1.0);

  double lo_x = 0.0, hi_x = scenario.grid_width - 1.0;
  double lo_y = 0.0, hi_y = scenario.grid_height - 1.0;
  if (state.attached) {
    // keep the carried footprint on the grid
    lo_x = std::max(lo_x, -state.grip_dx);
    hi_x = std::min(hi_x, scenario.grid_width - spec.width - state.grip_dx);
    lo_y = std::max(lo_y, -state.grip_dy);
    hi_y = std::min(hi_y, scenario.grid_height - spec.height - state.grip_dy);
  }
  next.agent.x = Clamp(state.agent.x + dx, lo_x, hi_x);
  next.agent.y = Clamp(state.agent.y + dy, lo_y, hi_y);
  next.agent.gripper = Clamp(state.agent.gripper + dg, 0.0, 1.0);

  const bool closing = state.agent.gripper < 0.5 && next.agent.gripper >= 0.5;
  const bool opening = state.agent.gripper >= 0.5 && next.agent.gripper < 0.5;
  if (state.attached) {
    next.object_x = next.agent.x + state.grip_dx;
    next.object_y = next.agent.y + state.grip_dy;
    if (opening) next.attached = false;
  } else if (closing && spec.graspable &&
             DistanceToObject(next, scenario) <= kGraspRadius) {
    next.attached = true;
    next.grip_dx = next.object_x - next.agent.x;
    next.grip_dy = next.object_y - next.agent.y;
  }
  next.step = state.step + 1;
  return next;
}

int EpisodeOutcome::achieved_count() const {
  int n = 0;
  for (const SubgoalResult& s : subgoals) n += s.achieved ? 1 : 0;
  return n;
}

OutcomeTracker::OutcomeTracker(const Scenario& scenario, const WorldState& initial)
    : scenario_(&scenario), last_(initial) {
  initial_center_y_ = ObjectCenter(initial, SpecOf(scenario, initial.object_index)).y;
  Observe(initial);
}

void OutcomeTracker::Observe(const WorldState& state) {
  const ObjectSpec& spec = SpecOf(*scenario_, state.object_index);
  last_ = state;
  if (!state.attached) return;
  const Center center = ObjectCenter(state, spec);
  if (!grasped_) {
    grasped_ = true;
    grasp_above_ = state.agent.y < center.y;
  }
  if (!first_mode_.empty()) return;
  if (scenario_->task == Task::kSweepSort) {
    if (center.y <= initial_center_y_ - kSweepDecisive) first_mode_ = "sweep-up";
    if (center.y >= initial_center_y_ + kSweepDecisive) first_mode_ = "sweep-down";
  } else {
    if (center.y < kTopSignature) {
      first_mode_ = "drop-top";
    } else if (center.x >= kFrontSignature) {
      first_mode_ = "drop-front";
    }
  }
}

EpisodeOutcome OutcomeTracker::Finish() const {
  const ObjectSpec& spec = SpecOf(*scenario_, last_.object_index);
  const std::string truth = scenario_->GroundTruthMode(last_.object_index);
  const Center center = ObjectCenter(last_, spec);
  EpisodeOutcome out;
  out.executed_mode = first_mode_;
  out.grasp_above_midline = grasp_above_;
  const bool a = grasped_;
  const bool b = a && first_mode_ == truth;
  if (scenario_->task == Task::kSweepSort) {
    const bool in_band = truth == "sweep-up" ? center.y <= kSweepUpBand
                                             : center.y >= kSweepDownBand;
    out.subgoals = {{"A", a}, {"B", b}};
    out.success = b && in_band;
  } else {
    const bool in_cup = !last_.attached && center.x >= kCupX &&
                        center.x <= kCupX + kCupWidth - 1 && center.y >= kCupY &&
                        center.y <= kCupY + kCupHeight - 1;
    const bool c = b && in_cup;
    out.subgoals = {{"A", a}, {"B", b}, {"C", c}};
    out.success = c;
  }
  return out;
}

namespace {

// One leg of the demonstrator's script.
struct Leg {
  enum Kind { kMoveAgent, kMoveObject, kGrip, kRelease } kind;
  double x = 0.0;  // agent target, or object-centre target for kMoveObject
  double y = 0.0;
  bool move_x = true;
  bool move_y = true;
};

std::vector<Leg> PlanLegs(const Scenario& scenario, const WorldState& start) {
  const ObjectSpec& spec = SpecOf(scenario, start.object_index);
  const std::string mode = scenario.GroundTruthMode(start.object_index);
  const double ox = start.object_x;
  const double oy = start.object_y;
  const double grasp_col = ox + (spec.width - 1) / 2;  // integer division
  std::vector<Leg> legs;
  if (scenario.task == Task::kSweepSort) {
    // the wiper engages on the object's left column at its centre row
    legs.push_back({Leg::kMoveAgent, ox, oy + spec.height / 2});
    legs.push_back({Leg::kGrip});
    const double target = mode == "sweep-up" ? kSweepUpTarget : kSweepDownTarget;
    legs.push_back({Leg::kMoveObject, 0.0, target, false, true});
    legs.push_back({Leg::kRelease});
  } else if (mode == "drop-top") {
    legs.push_back({Leg::kMoveAgent, grasp_col, oy - 1});
    legs.push_back({Leg::kGrip});
    legs.push_back({Leg::kMoveObject, 0.0, kLiftRow, false, true});
    legs.push_back({Leg::kMoveObject, kCupDropX, 0.0, true, false});
    legs.push_back({Leg::kMoveObject, 0.0, kCupDropY, false, true});
    legs.push_back({Leg::kRelease});
  } else {
    legs.push_back({Leg::kMoveAgent, grasp_col, oy + spec.height});
    legs.push_back({Leg::kGrip});
    legs.push_back({Leg::kMoveObject, kCupDropX, 0.0, true, false});
    legs.push_back({Leg::kRelease});
  }
  return legs;
}

// Returns the next action, advancing `leg` past completed legs. Returns
// nullopt once the script is done.
std::optional<Action> DemoAction(const Scenario& scenario, const WorldState& s,
                                 const std::vector<Leg>& legs, size_t& leg) {
  const ObjectSpec& spec = SpecOf(scenario, s.object_index);
  while (leg < legs.size()) {
    const Leg& l = legs[leg];
    switch (l.kind) {
      case Leg::kGrip:
        if (s.agent.gripper >= 1.0) {
          ++leg;
          continue;
        }
        return Action{0.0, 0.0, 1.0};
      case Leg::kRelease:
        if (s.agent.gripper <= 0.0) {
          ++leg;
          continue;
        }
        return Action{0.0, 0.0, -1.0};
      case Leg::kMoveAgent:
      case Leg::kMoveObject: {
        double tx = l.x;
        double ty = l.y;
        if (l.kind == Leg::kMoveObject) {
          const Center c = ObjectCenter(s, spec);
          tx = std::round(l.x - (c.x - s.agent.x));
          ty = std::round(l.y - (c.y - s.agent.y));
        }
        const double ex = l.move_x ? tx - s.agent.x : 0.0;
        const double ey = l.move_y ? ty - s.agent.y : 0.0;
        if (std::abs(ex) < 0.5 && std::abs(ey) < 0.5) {
          ++leg;
          continue;
        }
        // the final approach to a grasp pose is taken at half speed
        const double limit =
            l.kind == Leg::kMoveAgent && std::hypot(ex, ey) <= kApproachSlowdown ? 0.5 : 1.0;
        return Action{Clamp(ex, -limit, limit), Clamp(ey, -limit, limit), 0.0};
      }
    }
  }
  return std::nullopt;
}

}  // namespace

DemoRun RunDemonstrator(const Scenario& scenario, int object_index,
                        std::uint64_t seed, const DemoOptions& options) {
  if (scenario.ood_kind != OodKind::kNone) {
    throw ValidationError("demonstrator requires an in-distribution scenario, got " +
                          scenario.environment_id);
  }
  WorldState state = InitialState(scenario, object_index, seed);
  const std::vector<Leg> legs = PlanLegs(scenario, state);
  Rng noise_rng(DeriveSeed(seed, {0x6e6f697365ULL}));
  std::normal_distribution<double> noise(0.0, 1.0);

  DemoRun run;
  run.states.push_back(state);
  std::vector<Action> actions;
  size_t leg = 0;
  int done_at = -1;
  while (static_cast<int>(actions.size()) < scenario.horizon) {
    std::optional<Action> a = DemoAction(scenario, state, legs, leg);
    if (!a) {
      done_at = static_cast<int>(actions.size());
      break;
    }
    if (options.action_noise > 0.0) {
      a->dx = Clamp(a->dx + options.action_noise * noise(noise_rng), -1.0, 1.0);
      a->dy = Clamp(a->dy + options.action_noise * noise(noise_rng), -1.0, 1.0);
    }
    actions.push_back(*a);
    state = Step(state, *a, scenario);
    run.states.push_back(state);
  }
  if (done_at < 0) {
    throw RuntimeFailure("demonstrator could not finish " + scenario.environment_id +
                         " within horizon (seed " + std::to_string(seed) + ")");
  }
  const int length = std::min(done_at + options.idle_tail, scenario.horizon);
  while (static_cast<int>(actions.size()) < length) {
    actions.push_back({});
    state = Step(state, actions.back(), scenario);
    run.states.push_back(state);
  }

  Trajectory& trajectory = run.trajectory;
  trajectory.environment_id = scenario.environment_id;
  trajectory.mode_label = scenario.GroundTruthMode(object_index);
  for (int t = 0; t < length; ++t) {
    StepPair pair;
    pair.observation.image = Render(run.states[t], scenario);
    pair.observation.proprio = run.states[t].agent;
    pair.observation.timestep = t;
    pair.plan.steps.resize(options.plan_length);
    for (int k = 0; k < options.plan_length && t + k < length; ++k) {
      pair.plan.steps[k] = actions[t + k];
    }
    trajectory.pairs.push_back(std::move(pair));
  }
  OutcomeTracker tracker(scenario, run.states.front());
  for (size_t i = 1; i < run.states.size(); ++i) tracker.Observe(run.states[i]);
  run.outcome = tracker.Finish();
  return run;
}

Trajectory ScriptedDemonstrator(const Scenario& scenario, int object_index,
                                std::uint64_t seed, const DemoOptions& options) {
  return RunDemonstrator(scenario, object_index, seed, options).trajectory;
}

LabelRegistry TaskLabels(Task task) {
  if (task == Task::kSweepSort) {
    return LabelRegistry({"background", "agent", "paper", "mnm"});
  }
  return LabelRegistry({"background", "agent", "cup", "pen", "marker"});
}

namespace {

SceneObject MakeObject(const std::string& name, LabelId id, int w, int h,
                       const std::string& key, const std::string& value,
                       const PlacementRange& placement,
                       std::vector<std::string> script) {
  SceneObject o;
  o.spec.label_name = name;
  o.spec.label = id;
  o.spec.width = w;
  o.spec.height = h;
  o.spec.attributes[key] = value;
  o.placement = placement;
  o.expert_script = std::move(script);
  return o;
}

Scenario BaseScenario(Task task, const std::string& id, OodKind kind) {
  Scenario s;
  s.task = task;
  s.environment_id = id;
  s.ood_kind = kind;
  s.training_labels = TaskLabels(task);
  if (task == Task::kSweepSort) {
    s.horizon = 80;
    s.home = {2.0, 15.0, 0.0};
  } else {
    s.horizon = 120;
    s.home = {2.0, 28.0, 0.0};
    s.fixtures.push_back({"cup", 2, kCupX, kCupY, kCupWidth, kCupHeight});
  }
  return s;
}

}  // namespace

std::vector<Scenario> MakeBenchmarkSuite(Task task) {
  std::vector<Scenario> suite;
  if (task == Task::kSweepSort) {
    const PlacementRange band{6.0, 21.0, kSweepObjectRow};
    const std::string dir = "sort-direction";
    auto paper = [&](std::vector<std::string> script) {
      return MakeObject("paper", 2, 3, 3, dir, "up", band, std::move(script));
    };
    auto mnm = [&](std::vector<std::string> script) {
      return MakeObject("mnm", 3, 2, 2, dir, "down", band, std::move(script));
    };
    Scenario s = BaseScenario(task, "sweep-paper", OodKind::kNone);
    s.objects = {paper({"match paper with paper", "pass"})};
    suite.push_back(s);
    s = BaseScenario(task, "sweep-mnm", OodKind::kNone);
    s.objects = {mnm({"match mnm with mnm", "pass"})};
    suite.push_back(s);
    s = BaseScenario(task, "sweep-cloth", OodKind::kBackground);
    s.novel_labels = {{5, "cloth"}};
    s.background_label = 5;
    s.objects = {paper({"match paper with paper", "pass"}),
                 mnm({"match mnm with mnm", "pass"})};
    suite.push_back(s);
    s = BaseScenario(task, "sweep-napkin", OodKind::kObject);
    s.novel_labels = {{6, "napkin"}};
    s.objects = {MakeObject("napkin", 6, 3, 3, dir, "up", band,
                            {"match napkin with paper",
                             "align-edge left napkin paper", "pass"})};
    suite.push_back(s);
    s = BaseScenario(task, "sweep-doritos", OodKind::kObject);
    s.novel_labels = {{7, "doritos"}};
    s.objects = {MakeObject("doritos", 7, 4, 4, dir, "down", band,
                            {"match doritos with mnm",
                             "align-vert top doritos mnm", "pass"})};
    suite.push_back(s);
    s = BaseScenario(task, "sweep-tack", OodKind::kObject);
    s.novel_labels = {{8, "tack"}};
    s.objects = {MakeObject("tack", 8, 5, 2, dir, "up", band,
                            {"match tack with paper",
                             "align-edge left tack paper", "pass"})};
    suite.push_back(s);
  } else {
    const PlacementRange band{2.0, 17.0, kPlaceObjectRow};
    const std::string drop = "drop-mode";
    auto pen = [&](std::vector<std::string> script) {
      return MakeObject("pen", 3, 8, 1, drop, "front", band, std::move(script));
    };
    auto marker = [&](std::vector<std::string> script) {
      return MakeObject("marker", 4, 3, 2, drop, "top", band, std::move(script));
    };
    Scenario s = BaseScenario(task, "place-pen", OodKind::kNone);
    s.objects = {pen({"match pen with pen", "pass"})};
    suite.push_back(s);
    s = BaseScenario(task, "place-marker", OodKind::kNone);
    s.objects = {marker({"match marker with marker", "pass"})};
    suite.push_back(s);
    s = BaseScenario(task, "place-cloth", OodKind::kBackground);
    s.novel_labels = {{6, "cloth"}};
    s.background_label = 6;
    s.objects = {pen({"match pen with pen", "pass"}),
                 marker({"match marker with marker", "pass"})};
    suite.push_back(s);
    s = BaseScenario(task, "place-pencil", OodKind::kObject);
    s.novel_labels = {{7, "pencil"}};
    s.objects = {MakeObject("pencil", 7, 4, 2, drop, "front", band,
                            {"match pencil with pen", "pass"})};
    suite.push_back(s);
    s = BaseScenario(task, "place-battery", OodKind::kObject);
    s.novel_labels = {{8, "battery"}};
    s.objects = {MakeObject("battery", 8, 7, 3, drop, "top", band,
                            {"match battery with marker",
                             "align-vert top battery marker", "pass"})};
    suite.push_back(s);
    s = BaseScenario(task, "place-block", OodKind::kObject);
    s.novel_labels = {{9, "block"}};
    s.objects = {MakeObject("block", 9, 6, 3, drop, "top", band,
                            {"match block with marker",
                             "align-vert top block marker", "pass"})};
    suite.push_back(s);
  }
  return suite;
}

const Scenario& FindScenario(const std::vector<Scenario>& suite,
                             const std::string& environment_id) {
  for (const Scenario& s : suite) {
    if (s.environment_id == environment_id) return s;
  }
  throw UsageError("unknown scenario '" + environment_id + "'");
}

namespace {

using nlohmann::json;

json ScenarioToJson(const Scenario& s) {
  json novel = json::object();
  for (const auto& [id, name] : s.novel_labels) novel[std::to_string(id)] = name;
  json fixtures = json::array();
  for (const Fixture& f : s.fixtures) {
    fixtures.push_back({{"label", f.label_name},
                        {"id", f.label},
                        {"x", f.x},
                        {"y", f.y},
                        {"width", f.width},
                        {"height", f.height}});
  }
  json objects = json::array();
  for (const SceneObject& o : s.objects) {
    objects.push_back({{"label", o.spec.label_name},
                       {"id", o.spec.label},
                       {"width", o.spec.width},
                       {"height", o.spec.height},
                       {"attributes", o.spec.attributes},
                       {"graspable", o.spec.graspable},
                       {"placement",
                        {{"x_min", o.placement.x_min},
                         {"x_max", o.placement.x_max},
                         {"y", o.placement.y}}},
                       {"expert_script", o.expert_script}});
  }
  return {{"task", TaskName(s.task)},
          {"environment_id", s.environment_id},
          {"grid", {s.grid_width, s.grid_height}},
          {"horizon", s.horizon},
          {"labels", s.training_labels.names()},
          {"novel_labels", novel},
          {"background", s.background_label},
          {"ood_kind", OodKindName(s.ood_kind)},
          {"home", {s.home.x, s.home.y, s.home.gripper}},
          {"fixtures", fixtures},
          {"objects", objects}};
}

Scenario ScenarioFromJson(const json& j) {
  Scenario s;
  s.task = ParseTask(j.at("task").get<std::string>());
  s.environment_id = j.at("environment_id").get<std::string>();
  s.grid_width = j.at("grid").at(0).get<int>();
  s.grid_height = j.at("grid").at(1).get<int>();
  s.horizon = j.at("horizon").get<int>();
  s.training_labels = LabelRegistry(j.at("labels").get<std::vector<std::string>>());
  for (const auto& [key, value] : j.at("novel_labels").items()) {
    const int id = std::stoi(key);
    if (id <= s.training_labels.unknown_id()) {
      throw ValidationError("novel label '" + value.get<std::string>() +
                            "' must use an id above the reserved unknown id");
    }
    s.novel_labels[static_cast<LabelId>(id)] = value.get<std::string>();
  }
  s.background_label = j.at("background").get<LabelId>();
  s.ood_kind = ParseOodKind(j.at("ood_kind").get<std::string>());
  s.home = {j.at("home").at(0).get<double>(), j.at("home").at(1).get<double>(),
            j.at("home").at(2).get<double>()};
  for (const json& f : j.at("fixtures")) {
    s.fixtures.push_back({f.at("label").get<std::string>(), f.at("id").get<LabelId>(),
                          f.at("x").get<int>(), f.at("y").get<int>(),
                          f.at("width").get<int>(), f.at("height").get<int>()});
  }
  for (const json& o : j.at("objects")) {
    SceneObject obj;
    obj.spec.label_name = o.at("label").get<std::string>();
    obj.spec.label = o.at("id").get<LabelId>();
    obj.spec.width = o.at("width").get<int>();
    obj.spec.height = o.at("height").get<int>();
    obj.spec.attributes =
        o.at("attributes").get<std::map<std::string, std::string>>();
    obj.spec.graspable = o.at("graspable").get<bool>();
    const json& p = o.at("placement");
    obj.placement = {p.at("x_min").get<double>(), p.at("x_max").get<double>(),
                     p.at("y").get<int>()};
    obj.expert_script = o.at("expert_script").get<std::vector<std::string>>();
    s.objects.push_back(std::move(obj));
  }
  if (s.objects.empty()) {
    throw ValidationError("scenario " + s.environment_id + " has no objects");
  }
  for (const SceneObject& o : s.objects) {
    const PlacementRange& p = o.placement;
    if (p.x_min < 0 || p.x_max > s.grid_width - o.spec.width + 1 || p.x_min >= p.x_max ||
        p.y < 0 || p.y + o.spec.height > s.grid_height) {
      throw ValidationError("placement of '" + o.spec.label_name +
                            "' leaves the workspace in " + s.environment_id);
    }
    s.GroundTruthMode(static_cast<int>(&o - s.objects.data()));
  }
  return s;
}

}  // namespace

std::string ScenarioSuiteToText(const std::vector<Scenario>& suite) {
  json list = json::array();
  for (const Scenario& s : suite) list.push_back(ScenarioToJson(s));
  json doc = {{"format", "aba-scenarios"}, {"version", 1}, {"scenarios", list}};
  return doc.dump(2) + "\n";
}

std::vector<Scenario> ScenarioSuiteFromText(const std::string& text) {
  std::vector<Scenario> suite;
  try {
    const json doc = json::parse(text);
    if (doc.value("format", "") != "aba-scenarios" || doc.value("version", 0) != 1) {
      throw ValidationError("not a version-1 scenario suite");
    }
    for (const json& s : doc.at("scenarios")) suite.push_back(ScenarioFromJson(s));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed scenario suite: ") + e.what());
  }
  return suite;
}

std::vector<Scenario> LoadScenarioSuite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeFailure("cannot open scenario suite '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ScenarioSuiteFromText(buffer.str());
}

}  // namespace aba
