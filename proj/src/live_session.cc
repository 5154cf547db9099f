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

#include "aba/live_session.h"

#include <array>
#include <utility>

#include "aba/error.h"

namespace aba {
namespace {

using nlohmann::json;

constexpr std::array<const char*, 10> kPalette = {
    "1f77b4", "ff7f0e", "2ca02c", "d62728", "9467bd",
    "8c564b", "e377c2", "bcbd22", "17becf", "7f7f7f",
};

json RetrievalJson(const ObservationRef& ref, double score, const RetrievalCorpus& corpus) {
  return json{{"trajectory", ref.trajectory},
              {"timestep", ref.timestep},
              {"score", score},
              {"thumbnail", RenderThumbnail(corpus.image(ref))}};
}

json QueryJson(const ExpertQuery& q, const RetrievalCorpus& corpus) {
  json clusters = json::array();
  for (const ClusterSummary& c : q.clusters) {
    clusters.push_back({{"cluster", c.cluster},
                        {"size", c.size},
                        {"top_members", c.top_members},
                        {"representative", {c.representative.trajectory, c.representative.timestep}},
                        {"mode_label", c.mode_label}});
  }
  json top = json::array();
  for (const RetrievalEntry& e : q.top) top.push_back(RetrievalJson(e.ref, e.score, corpus));
  const bool initial = q.clusters.empty();
  return json{{"kind", initial ? "initial" : "refine"},
              {"timestep", q.timestep},
              {"ordinal", q.ordinal},
              {"description", q.description},
              {"entropy", initial ? json(nullptr) : json(q.entropy)},
              {"scene_labels", q.scene_labels},
              {"known_labels", q.known_labels},
              {"clusters", clusters},
              {"top", top}};
}

}  // namespace

std::string LabelColor(LabelId label) {
  if (label == kTrainingBackground) return "f4f4f4";
  if (label == kAgentLabel) return "202020";
  return kPalette[(label - 2) % kPalette.size()];
}

json RenderThumbnail(const LabelGridImage& image) {
  std::string rgb;
  rgb.reserve(image.cells().size() * 6);
  for (LabelId c : image.cells()) rgb += LabelColor(c);
  return json{{"width", image.width()}, {"height", image.height()}, {"rgb", rgb}};
}

ControlCommand ParseControlCommand(const std::string& text) {
  if (text == "pause") return ControlCommand::kPause;
  if (text == "resume") return ControlCommand::kResume;
  if (text == "step") return ControlCommand::kStep;
  throw ValidationError("unknown control command '" + text + "' (pause, resume or step)");
}

LiveSession::LiveSession(RuntimeModels models, Scenario scenario, Options options)
    : models_(std::move(models)),
      scenario_(std::move(scenario)),
      options_(std::move(options)),
      expert_(ScenarioResolver(scenario_)) {
  if (!models_.corpus) throw ValidationError("live session needs a retrieval corpus");
  if (options_.object_index < 0 ||
      options_.object_index >= static_cast<int>(scenario_.objects.size())) {
    throw ValidationError("object index out of range for " + scenario_.environment_id);
  }
  expert_.SetListener([this](const ExpertQuery& q) { OnQuery(q); });
  std::lock_guard<std::mutex> lock(mu_);
  paused_ = options_.start_paused;
  PublishLocked();
}

RolloutRecord LiveSession::Run() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (started_) throw ValidationError("live session already ran");
    started_ = true;
    PublishLocked();
  }
  try {
    RolloutRecord record = Rollout(scenario_, options_.object_index, models_, &expert_,
                                   options_.intervention, options_.seed, this);
    std::lock_guard<std::mutex> lock(mu_);
    result_ = record;
    pending_.reset();
    PublishLocked();
    return record;
  } catch (const std::exception& e) {
    std::lock_guard<std::mutex> lock(mu_);
    failure_ = e.what();
    pending_.reset();
    PublishLocked();
    throw;
  }
}

void LiveSession::Control(ControlCommand command) {
  std::lock_guard<std::mutex> lock(mu_);
  if (result_ || !failure_.empty()) throw ValidationError("the rollout has finished");
  switch (command) {
    case ControlCommand::kPause:
      paused_ = true;
      break;
    case ControlCommand::kResume:
      paused_ = false;
      step_credits_ = 0;
      break;
    case ControlCommand::kStep:
      paused_ = true;
      ++step_credits_;
      break;
  }
  PublishLocked();
}

void LiveSession::SubmitFeedback(const std::string& text) {
  std::lock_guard<std::mutex> lock(mu_);
  expert_.Submit(text);
  pending_.reset();
  ++feedback_total_;
  PublishLocked();
}

void LiveSession::Cancel() {
  expert_.Cancel();
  std::lock_guard<std::mutex> lock(mu_);
  cancelled_ = true;
  cv_.notify_all();
}

std::shared_ptr<const nlohmann::json> LiveSession::Snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return snapshot_;
}

std::uint64_t LiveSession::version() const {
  std::lock_guard<std::mutex> lock(mu_);
  return version_;
}

bool LiveSession::finished() const {
  std::lock_guard<std::mutex> lock(mu_);
  return result_.has_value() || !failure_.empty();
}

std::shared_ptr<const nlohmann::json> LiveSession::WaitForSnapshot(
    std::uint64_t after, std::chrono::milliseconds timeout) const {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return version_ > after || cancelled_; });
  return snapshot_;
}

bool LiveSession::WaitFinished(std::chrono::milliseconds timeout) const {
  std::unique_lock<std::mutex> lock(mu_);
  return cv_.wait_for(lock, timeout, [&] { return result_.has_value() || !failure_.empty(); });
}

std::optional<RolloutRecord> LiveSession::result() const {
  std::lock_guard<std::mutex> lock(mu_);
  return result_;
}

void LiveSession::OnDecision(const DecisionView& view) {
  const DecisionEntry& e = *view.entry;
  json retrieval = json::array();
  for (size_t i = 0; i < e.retrieval.size(); ++i) {
    retrieval.push_back(RetrievalJson(e.retrieval[i], e.retrieval_scores[i], *models_.corpus));
  }
  json clusters = json::array();
  if (view.clustering != nullptr) {
    std::vector<int> sizes(view.clustering->clusters(), 0);
    for (int l : view.clustering->labels) ++sizes[l];
    for (size_t c = 0; c < sizes.size(); ++c) {
      clusters.push_back({{"cluster", static_cast<int>(c)}, {"size", sizes[c]}});
    }
  }
  json feedback = json::array();
  for (const FeedbackRecord& f : e.feedback) {
    feedback.push_back({{"response", f.response}, {"accepted", f.accepted}});
  }
  json decision{{"timestep", e.timestep},
                {"digest", e.digest},
                {"id_score", e.id_score},
                {"ood", e.ood},
                {"intervened", e.intervened},
                {"fallback", e.fallback},
                {"description", e.description},
                {"entropy_trace", e.entropy_trace},
                {"retrieval", retrieval},
                {"clusters", clusters},
                {"feedback", feedback}};
  std::lock_guard<std::mutex> lock(mu_);
  step_ = view.state->step;
  agent_ = view.state->agent;
  image_ = *view.image;
  decision_ = std::move(decision);
  pending_.reset();
  PublishLocked();
}

void LiveSession::BeforeStep(int step) {
  std::unique_lock<std::mutex> lock(mu_);
  step_ = step;
  bool waited = false;
  while (paused_ && step_credits_ == 0 && !cancelled_) {
    if (!waited) PublishLocked();
    waited = true;
    cv_.wait(lock);
  }
  if (paused_ && step_credits_ > 0) {
    --step_credits_;
    PublishLocked();
  } else if (waited) {
    PublishLocked();
  }
}

void LiveSession::OnFinish(const RolloutRecord& /*record*/) {}

void LiveSession::OnQuery(const ExpertQuery& query) {
  std::lock_guard<std::mutex> lock(mu_);
  // already answered by the time the listener runs
  if (!expert_.Pending()) return;
  pending_ = query;
  step_ = query.timestep;
  image_ = query.observation;
  PublishLocked();
}

void LiveSession::PublishLocked() {
  ++version_;
  snapshot_ = std::make_shared<const json>(BuildLocked());
  cv_.notify_all();
}

json LiveSession::BuildLocked() const {
  std::string status;
  if (!failure_.empty()) {
    status = "failed";
  } else if (result_) {
    status = "finished";
  } else if (!started_) {
    status = "ready";
  } else if (pending_) {
    status = "awaiting_feedback";
  } else if (paused_ && step_credits_ == 0) {
    status = "paused";
  } else {
    status = "running";
  }

  json entropy = nullptr;
  if (pending_ && !pending_->clusters.empty()) {
    entropy = pending_->entropy;
  } else if (decision_.is_object() && !decision_["entropy_trace"].empty()) {
    entropy = decision_["entropy_trace"].back();
  }

  json labels = json::array();
  for (size_t i = 0; i < scenario_.training_labels.names().size(); ++i) {
    const LabelId id = static_cast<LabelId>(i);
    labels.push_back({{"id", id}, {"name", scenario_.training_labels.name(id)},
                      {"color", LabelColor(id)}});
  }
  for (const auto& [id, name] : scenario_.novel_labels) {
    labels.push_back({{"id", id}, {"name", name}, {"color", LabelColor(id)}});
  }

  json result = nullptr;
  if (result_) {
    json subgoals = json::array();
    for (const SubgoalResult& s : result_->subgoals) {
      subgoals.push_back({{"name", s.name}, {"achieved", s.achieved}});
    }
    result = {{"success", result_->success},
              {"subgoals", subgoals},
              {"feedback_total", result_->feedback_total},
              {"incomplete", result_->incomplete},
              {"error", result_->error}};
  }

  const SceneObject& object = scenario_.objects[options_.object_index];
  return json{
      {"schema", "aba.state"},
      {"schema_version", kStateSchemaVersion},
      {"version", version_},
      {"status", status},
      {"task", TaskName(scenario_.task)},
      {"scenario", scenario_.environment_id},
      {"object", object.spec.label_name},
      {"method", MethodName(options_.intervention.method)},
      {"seed", options_.seed},
      {"horizon", scenario_.horizon},
      {"step", step_},
      {"paused", paused_},
      {"agent", {{"x", agent_.x}, {"y", agent_.y}, {"gripper", agent_.gripper}}},
      {"observation", image_.cells().empty() ? json(nullptr) : RenderThumbnail(image_)},
      {"labels", labels},
      {"decision", decision_.is_object() ? decision_ : json(nullptr)},
      {"ood", pending_ ? json(true) : decision_.is_object() ? decision_["ood"] : json(false)},
      {"id_score", decision_.is_object() ? decision_["id_score"] : json(nullptr)},
      {"entropy", entropy},
      {"pending_query", pending_ ? QueryJson(*pending_, *models_.corpus) : json(nullptr)},
      {"feedback_total", feedback_total_},
      {"error", failure_.empty() ? json(nullptr) : json(failure_)},
      {"result", result},
  };
}

}  // namespace aba
