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

#ifndef ABA_LIVE_SESSION_H_
#define ABA_LIVE_SESSION_H_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "aba/runtime.h"

namespace aba {

inline constexpr int kStateSchemaVersion = 1;

// Colour-mapped rendering of a label grid: {"width", "height", "rgb"} where
// rgb holds six hex digits per cell in row-major order.
nlohmann::json RenderThumbnail(const LabelGridImage& image);
std::string LabelColor(LabelId label);  // "rrggbb"

enum class ControlCommand { kPause, kResume, kStep };
ControlCommand ParseControlCommand(const std::string& text);  // throws ValidationError

// One rollout driven by an interactive expert, observable and steerable from
// other threads. Run() executes the rollout on the calling thread; every
// other member is safe to call concurrently. Each state change publishes a
// new immutable JSON snapshot with a strictly larger version.
class LiveSession : public RolloutObserver {
 public:
  struct Options {
    int object_index = 0;
    InterventionConfig intervention;
    std::uint64_t seed = 0;
    bool start_paused = false;
  };

  LiveSession(RuntimeModels models, Scenario scenario, Options options);

  // Single use. Throws ValidationError when called twice.
  RolloutRecord Run();

  // While paused, no simulator step runs. Step grants exactly one step and
  // leaves the session paused.
  void Control(ControlCommand command);

  // Answers the pending expert query. Throws ParseError on malformed text and
  // ValidationError when no query is pending; neither changes the snapshot.
  void SubmitFeedback(const std::string& text);

  // Aborts the pending and all later queries and releases a paused rollout.
  void Cancel();

  std::shared_ptr<const nlohmann::json> Snapshot() const;
  std::uint64_t version() const;
  bool finished() const;

  // Blocks until a snapshot newer than `after` exists or the timeout passes.
  std::shared_ptr<const nlohmann::json> WaitForSnapshot(std::uint64_t after,
                                                        std::chrono::milliseconds timeout) const;
  // Blocks until Run() has returned or the timeout passes.
  bool WaitFinished(std::chrono::milliseconds timeout) const;
  std::optional<RolloutRecord> result() const;

  void OnDecision(const DecisionView& view) override;
  void BeforeStep(int step) override;
  void OnFinish(const RolloutRecord& record) override;

 private:
  void OnQuery(const ExpertQuery& query);
  void PublishLocked();
  nlohmann::json BuildLocked() const;

  RuntimeModels models_;
  Scenario scenario_;
  Options options_;
  InteractiveExpert expert_;

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  bool started_ = false;
  bool paused_ = false;
  bool cancelled_ = false;
  int step_credits_ = 0;
  int step_ = 0;
  Proprioception agent_;
  LabelGridImage image_;
  nlohmann::json decision_;
  std::optional<ExpertQuery> pending_;
  int feedback_total_ = 0;
  std::string failure_;
  std::optional<RolloutRecord> result_;
  std::uint64_t version_ = 0;
  std::shared_ptr<const nlohmann::json> snapshot_;
};

}  // namespace aba

#endif  // ABA_LIVE_SESSION_H_
