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

#ifndef ABA_RUNTIME_H_
#define ABA_RUNTIME_H_

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aba/correspondence.h"
#include "aba/mode_refinery.h"
#include "aba/ood_gate.h"
#include "aba/policy.h"
#include "aba/sim.h"

namespace aba {

enum class Method { kVanilla, kPolicyEmbed, kVisualEmbed, kAba };

std::string MethodName(Method method);
Method ParseMethod(const std::string& name);  // throws UsageError

// Resolves scenario label names, including "unknown".
LabelResolver ScenarioResolver(const Scenario& scenario);

// Answers from the object's script by query ordinal; "pass" past its end.
class ScriptedExpert : public Expert {
 public:
  explicit ScriptedExpert(std::vector<std::string> script) : script_(std::move(script)) {}
  std::optional<std::string> Respond(const ExpertQuery& query) override;

 private:
  std::vector<std::string> script_;
};

// Single-slot mailbox between a blocked rollout and an external responder.
class InteractiveExpert : public Expert {
 public:
  explicit InteractiveExpert(LabelResolver resolve) : resolve_(std::move(resolve)) {}

  // Blocks until Submit() or Cancel().
  std::optional<std::string> Respond(const ExpertQuery& query) override;

  // Validates and delivers an answer. Throws ParseError on malformed text
  // (the query stays pending) and ValidationError when nothing is pending.
  void Submit(const std::string& text);
  // Aborts the pending query and every later one.
  void Cancel();
  std::optional<ExpertQuery> Pending() const;
  // Called with the query whenever one becomes pending.
  void SetListener(std::function<void(const ExpertQuery&)> listener);

 private:
  LabelResolver resolve_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::optional<ExpertQuery> pending_;
  std::optional<std::string> answer_;
  bool cancelled_ = false;
  std::function<void(const ExpertQuery&)> listener_;
};

struct InterventionConfig {
  Method method = Method::kAba;
  int top_m = 5;
  double lambda_q = 0.75;
  int execute_steps = 8;
  RefinementConfig refine;
  // overrides the policy's action noise when set
  std::optional<double> action_noise;
};

// Mean of the embeddings of the first min(m, refs.size()) refs. Throws
// RuntimeFailure when refs is empty.
Embedding Intervene(std::span<const ObservationRef> ranked, int m, const PolicyModel& policy);
Embedding MeanEmbedding(std::span<const Embedding> embeddings);

struct FeedbackRecord {
  int timestep = 0;
  int ordinal = 0;
  double entropy = 0.0;
  std::string description;  // before the answer
  std::vector<ObservationRef> top;
  std::string response;
  bool accepted = false;

  bool operator==(const FeedbackRecord&) const = default;
};

struct DecisionEntry {
  int timestep = 0;
  std::string digest;
  double id_score = 0.0;
  bool ood = false;
  bool intervened = false;
  bool fallback = false;  // OOD but no candidate passed the proprio filter
  std::vector<ObservationRef> retrieval;  // top-M, best first
  std::vector<double> retrieval_scores;
  std::vector<double> entropy_trace;
  std::string description;
  std::vector<FeedbackRecord> feedback;
  std::vector<Action> executed;

  bool operator==(const DecisionEntry&) const = default;
};

struct RolloutRecord {
  std::string task;
  std::string scenario;
  std::string object;
  std::string condition;  // scenario, or scenario/object for multi-object scenes
  std::string ood_kind;
  std::string method;
  std::uint64_t seed = 0;
  int horizon = 0;
  std::vector<DecisionEntry> entries;
  std::vector<SubgoalResult> subgoals;
  bool success = false;
  std::string executed_mode;
  int feedback_total = 0;
  bool incomplete = false;
  std::string error;

  bool operator==(const RolloutRecord&) const = default;
  int achieved_subgoals() const;
};

nlohmann::json RecordToJson(const RolloutRecord& record);
RolloutRecord RecordFromJson(const nlohmann::json& j);  // throws ValidationError

// Shared, read-only models for one task.
struct RuntimeModels {
  std::shared_ptr<const PolicyModel> policy;
  std::shared_ptr<const IdIndex> index;
  std::shared_ptr<const RetrievalCorpus> corpus;
};

// Live view of a decision, published before its actions execute.
struct DecisionView {
  const Scenario* scenario = nullptr;
  const WorldState* state = nullptr;
  const LabelGridImage* image = nullptr;
  const DecisionEntry* entry = nullptr;
  const ModeClustering* clustering = nullptr;  // aba decisions only
};

class RolloutObserver {
 public:
  virtual ~RolloutObserver() = default;
  virtual void OnDecision(const DecisionView& /*view*/) {}
  // Called before every simulator step; may block.
  virtual void BeforeStep(int /*step*/) {}
  virtual void OnFinish(const RolloutRecord& /*record*/) {}
};

// Runs one closed-loop episode. Every execute_steps steps the history is
// encoded and checked by the OOD gate; nominal decisions, and every vanilla
// decision, sample from the observation's own embedding, the rest sample
// from an intervened embedding. An expert abort ends the episode early and
// marks it incomplete.
RolloutRecord Rollout(const Scenario& scenario, int object_index, const RuntimeModels& models,
                      Expert* expert, const InterventionConfig& cfg, std::uint64_t seed,
                      RolloutObserver* observer = nullptr);

std::string ObservationDigest(const Observation& observation);

}  // namespace aba

#endif  // ABA_RUNTIME_H_
