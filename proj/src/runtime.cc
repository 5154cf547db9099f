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

#include "aba/runtime.h"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <set>

#include "aba/encoder.h"
#include "aba/error.h"
#include "aba/rng.h"

namespace aba {

std::string MethodName(Method method) {
  switch (method) {
    case Method::kVanilla:
      return "vanilla";
    case Method::kPolicyEmbed:
      return "policy-embed";
    case Method::kVisualEmbed:
      return "visual-embed";
    case Method::kAba:
      return "aba";
  }
  return "aba";
}

Method ParseMethod(const std::string& name) {
  if (name == "vanilla") return Method::kVanilla;
  if (name == "policy-embed") return Method::kPolicyEmbed;
  if (name == "visual-embed") return Method::kVisualEmbed;
  if (name == "aba") return Method::kAba;
  throw UsageError("unknown method '" + name +
                   "' (expected vanilla, policy-embed, visual-embed or aba)");
}

LabelResolver ScenarioResolver(const Scenario& scenario) {
  return [scenario](const std::string& name) { return scenario.FindLabel(name); };
}

std::optional<std::string> ScriptedExpert::Respond(const ExpertQuery& query) {
  if (query.ordinal >= 0 && query.ordinal < static_cast<int>(script_.size())) {
    return script_[query.ordinal];
  }
  return std::string("pass");
}

std::optional<std::string> InteractiveExpert::Respond(const ExpertQuery& query) {
  std::function<void(const ExpertQuery&)> listener;
  {
    std::unique_lock<std::mutex> lock(mu_);
    if (cancelled_) return std::nullopt;
    pending_ = query;
    answer_.reset();
    listener = listener_;
  }
  if (listener) listener(query);
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [&] { return answer_.has_value() || cancelled_; });
  pending_.reset();
  if (cancelled_) return std::nullopt;
  std::optional<std::string> out = std::move(answer_);
  answer_.reset();
  return out;
}

void InteractiveExpert::Submit(const std::string& text) {
  DecodeDescription(text, resolve_);  // throws ParseError
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (!pending_ || answer_) throw ValidationError("no expert query is pending");
    answer_ = text;
  }
  cv_.notify_all();
}

void InteractiveExpert::Cancel() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    cancelled_ = true;
  }
  cv_.notify_all();
}

std::optional<ExpertQuery> InteractiveExpert::Pending() const {
  std::lock_guard<std::mutex> lock(mu_);
  if (answer_) return std::nullopt;
  return pending_;
}

void InteractiveExpert::SetListener(std::function<void(const ExpertQuery&)> listener) {
  std::lock_guard<std::mutex> lock(mu_);
  listener_ = std::move(listener);
}

Embedding MeanEmbedding(std::span<const Embedding> embeddings) {
  if (embeddings.empty()) throw RuntimeFailure("cannot intervene with an empty retrieval");
  Embedding mean(embeddings.front().size(), 0.0);
  for (const Embedding& z : embeddings) {
    if (z.size() != mean.size()) throw ValidationError("embeddings differ in dimension");
    for (size_t i = 0; i < z.size(); ++i) mean[i] += z[i];
  }
  for (double& v : mean) v /= static_cast<double>(embeddings.size());
  return mean;
}

Embedding Intervene(std::span<const ObservationRef> ranked, int m, const PolicyModel& policy) {
  if (m < 1) throw ValidationError("intervention needs M >= 1");
  if (ranked.empty()) throw RuntimeFailure("cannot intervene with an empty retrieval");
  const size_t n = std::min<size_t>(m, ranked.size());
  std::vector<Embedding> chosen;
  for (size_t i = 0; i < n; ++i) {
    const auto z = policy.embedding(policy.IndexOf(ranked[i]));
    chosen.emplace_back(z.begin(), z.end());
  }
  return MeanEmbedding(chosen);
}

int RolloutRecord::achieved_subgoals() const {
  return static_cast<int>(std::count_if(subgoals.begin(), subgoals.end(),
                                         [](const SubgoalResult& s) { return s.achieved; }));
}

std::string ObservationDigest(const Observation& observation) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  for (LabelId id : observation.image.cells()) mix(id);
  for (double v : {observation.proprio.x, observation.proprio.y, observation.proprio.gripper}) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    mix(bits);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

namespace {

using nlohmann::json;

json RefsToJson(const std::vector<ObservationRef>& refs) {
  json out = json::array();
  for (const ObservationRef& r : refs) out.push_back({r.trajectory, r.timestep});
  return out;
}

std::vector<ObservationRef> RefsFromJson(const json& j) {
  std::vector<ObservationRef> out;
  for (const json& r : j) out.push_back({r.at(0).get<int>(), r.at(1).get<int>()});
  return out;
}

// Top-m candidates by cosine similarity of per-candidate features to `query`,
// ties by reference order.
std::vector<std::pair<ObservationRef, double>> RankByCosine(
    std::span<const double> query, std::span<const ObservationRef> candidates,
    const std::function<Embedding(const ObservationRef&)>& features) {
  std::vector<std::pair<ObservationRef, double>> scored;
  double qn = 0.0;
  for (double v : query) qn += v * v;
  for (const ObservationRef& ref : candidates) {
    const Embedding f = features(ref);
    double fn = 0.0;
    for (double v : f) fn += v * v;
    const double s = qn > 0.0 && fn > 0.0 ? CosineSimilarity(query, f) : 0.0;
    scored.emplace_back(ref, s);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return scored;
}

std::vector<std::string> SceneLabels(const LabelGridImage& image, const Scenario& scenario) {
  std::set<LabelId> ids(image.cells().begin(), image.cells().end());
  std::vector<std::string> out;
  for (LabelId id : ids) {
    if (id == scenario.background_label) continue;
    out.push_back(scenario.LabelName(id));
  }
  return out;
}

FeedbackRecord ToRecord(const FeedbackEvent& e) {
  FeedbackRecord r;
  r.timestep = e.query.timestep;
  r.ordinal = e.query.ordinal;
  r.entropy = e.query.entropy;
  r.description = e.query.description;
  for (const RetrievalEntry& t : e.query.top) r.top.push_back(t.ref);
  r.response = e.response;
  r.accepted = e.accepted;
  return r;
}

}  // namespace

json RecordToJson(const RolloutRecord& r) {
  json entries = json::array();
  for (const DecisionEntry& e : r.entries) {
    json feedback = json::array();
    for (const FeedbackRecord& f : e.feedback) {
      feedback.push_back({{"timestep", f.timestep},
                          {"ordinal", f.ordinal},
                          {"entropy", f.entropy},
                          {"description", f.description},
                          {"top", RefsToJson(f.top)},
                          {"response", f.response},
                          {"accepted", f.accepted}});
    }
    json executed = json::array();
    for (const Action& a : e.executed) executed.push_back({a.dx, a.dy, a.dgripper});
    entries.push_back({{"t", e.timestep},
                       {"digest", e.digest},
                       {"id_score", e.id_score},
                       {"ood", e.ood},
                       {"intervened", e.intervened},
                       {"fallback", e.fallback},
                       {"retrieval", RefsToJson(e.retrieval)},
                       {"retrieval_scores", e.retrieval_scores},
                       {"entropy_trace", e.entropy_trace},
                       {"description", e.description},
                       {"feedback", feedback},
                       {"executed", executed}});
  }
  json subgoals = json::array();
  for (const SubgoalResult& s : r.subgoals) subgoals.push_back({s.name, s.achieved});
  return {{"task", r.task},
          {"scenario", r.scenario},
          {"object", r.object},
          {"condition", r.condition},
          {"ood_kind", r.ood_kind},
          {"method", r.method},
          {"seed", r.seed},
          {"horizon", r.horizon},
          {"entries", entries},
          {"subgoals", subgoals},
          {"success", r.success},
          {"executed_mode", r.executed_mode},
          {"feedback_total", r.feedback_total},
          {"incomplete", r.incomplete},
          {"error", r.error}};
}

RolloutRecord RecordFromJson(const json& j) {
  try {
    RolloutRecord r;
    r.task = j.at("task").get<std::string>();
    r.scenario = j.at("scenario").get<std::string>();
    r.object = j.at("object").get<std::string>();
    r.condition = j.at("condition").get<std::string>();
    r.ood_kind = j.at("ood_kind").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.horizon = j.at("horizon").get<int>();
    for (const json& e : j.at("entries")) {
      DecisionEntry d;
      d.timestep = e.at("t").get<int>();
      d.digest = e.at("digest").get<std::string>();
      d.id_score = e.at("id_score").get<double>();
      d.ood = e.at("ood").get<bool>();
      d.intervened = e.at("intervened").get<bool>();
      d.fallback = e.at("fallback").get<bool>();
      d.retrieval = RefsFromJson(e.at("retrieval"));
      d.retrieval_scores = e.at("retrieval_scores").get<std::vector<double>>();
      d.entropy_trace = e.at("entropy_trace").get<std::vector<double>>();
      d.description = e.at("description").get<std::string>();
      for (const json& f : e.at("feedback")) {
        FeedbackRecord fr;
        fr.timestep = f.at("timestep").get<int>();
        fr.ordinal = f.at("ordinal").get<int>();
        fr.entropy = f.at("entropy").get<double>();
        fr.description = f.at("description").get<std::string>();
        fr.top = RefsFromJson(f.at("top"));
        fr.response = f.at("response").get<std::string>();
        fr.accepted = f.at("accepted").get<bool>();
        d.feedback.push_back(std::move(fr));
      }
      for (const json& a : e.at("executed")) {
        d.executed.push_back({a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()});
      }
      r.entries.push_back(std::move(d));
    }
    for (const json& s : j.at("subgoals")) {
      r.subgoals.push_back({s.at(0).get<std::string>(), s.at(1).get<bool>()});
    }
    r.success = j.at("success").get<bool>();
    r.executed_mode = j.at("executed_mode").get<std::string>();
    r.feedback_total = j.at("feedback_total").get<int>();
    r.incomplete = j.at("incomplete").get<bool>();
    r.error = j.at("error").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed rollout record: ") + e.what());
  }
}

RolloutRecord Rollout(const Scenario& scenario, int object_index, const RuntimeModels& models,
                      Expert* expert, const InterventionConfig& cfg, std::uint64_t seed,
                      RolloutObserver* observer) {
  if (!models.policy || !models.index || !models.corpus) {
    throw ValidationError("rollout needs a policy, an ID index and a retrieval corpus");
  }
  if (object_index < 0 || object_index >= static_cast<int>(scenario.objects.size())) {
    throw ValidationError("object index out of range for " + scenario.environment_id);
  }
  if (cfg.method == Method::kAba && expert == nullptr) {
    throw UsageError("the aba method needs an expert");
  }
  if (cfg.execute_steps < 1) throw ValidationError("execute_steps must be >= 1");
  const PolicyModel& policy = *models.policy;
  const EncoderConfig& enc = policy.encoder();
  if (cfg.execute_steps > policy.dataset().plan_length) {
    throw ValidationError("execute_steps exceeds the plan length");
  }

  RolloutRecord record;
  record.task = TaskName(scenario.task);
  record.scenario = scenario.environment_id;
  record.object = scenario.objects[object_index].spec.label_name;
  record.condition = scenario.objects.size() > 1
                         ? scenario.environment_id + "/" + record.object
                         : scenario.environment_id;
  record.ood_kind = OodKindName(scenario.ood_kind);
  record.method = MethodName(cfg.method);
  record.seed = seed;
  record.horizon = scenario.horizon;

  const LabelResolver resolve = ScenarioResolver(scenario);
  const std::vector<std::string> known = policy.dataset().labels.names();
  WorldState state = InitialState(scenario, object_index, DeriveSeed(seed, {1}));
  OutcomeTracker tracker(scenario, state);
  std::vector<Observation> history;
  std::optional<CorrespondenceDescription> description;

  try {
    int step = 0;
    while (step < scenario.horizon) {
      const std::uint64_t decision_seed = DeriveSeed(seed, {2, static_cast<std::uint64_t>(step)});
      history.push_back({Render(state, scenario), state.agent, step});
      const Observation& now = history.back();
      const Embedding z = EncodeAt(std::span<const Observation>(history),
                                   static_cast<int>(history.size()) - 1, enc);
      DecisionEntry entry;
      entry.timestep = step;
      entry.digest = ObservationDigest(now);
      const OodVerdict verdict = IsOod(z, *models.index);
      entry.id_score = verdict.score;
      entry.ood = verdict.ood;

      std::optional<Embedding> intervened;
      ModeClustering clustering;
      bool have_clustering = false;
      if (cfg.method != Method::kVanilla && verdict.ood) {
        const std::vector<ObservationRef> candidates =
            FilterByProprio(policy.dataset(), now.proprio, cfg.lambda_q);
        if (candidates.empty()) {
          entry.fallback = true;
        } else if (cfg.method == Method::kPolicyEmbed || cfg.method == Method::kVisualEmbed) {
          std::function<Embedding(const ObservationRef&)> features;
          Embedding query;
          if (cfg.method == Method::kPolicyEmbed) {
            query = z;
            features = [&](const ObservationRef& r) {
              const auto e = policy.embedding(policy.IndexOf(r));
              return Embedding(e.begin(), e.end());
            };
          } else {
            query = VisualFeatures(now.image, enc.pool_grid);
            features = [&](const ObservationRef& r) {
              return VisualFeatures(models.corpus->image(r), enc.pool_grid);
            };
          }
          const auto ranked = RankByCosine(query, candidates, features);
          for (size_t i = 0; i < std::min<size_t>(cfg.top_m, ranked.size()); ++i) {
            entry.retrieval.push_back(ranked[i].first);
            entry.retrieval_scores.push_back(ranked[i].second);
          }
          intervened = Intervene(entry.retrieval, cfg.top_m, policy);
        } else {
          ExpertQuery context;
          context.scenario = scenario.environment_id;
          context.timestep = step;
          context.ordinal = record.feedback_total;
          context.observation = now.image;
          context.scene_labels = SceneLabels(now.image, scenario);
          context.known_labels = known;
          bool aborted = false;
          if (!description) {
            FeedbackEvent first;
            first.query = context;
            const std::optional<std::string> answer = expert->Respond(context);
            ++record.feedback_total;
            if (answer) {
              first.response = *answer;
              try {
                description = DecodeDescription(*answer, resolve);
                first.accepted = true;
              } catch (const ValidationError&) {
                aborted = true;
              }
            } else {
              aborted = true;
            }
            entry.feedback.push_back(ToRecord(first));
            context.ordinal = record.feedback_total;
          }
          if (!aborted) {
            const std::vector<SegmentMask> ood_masks =
                GroundTruthSegment(now.image, scenario.background_label);
            RefinementInputs in;
            in.ood_masks = ood_masks;
            in.candidates = candidates;
            in.corpus = models.corpus.get();
            in.policy = &policy;
            in.resolve = resolve;
            in.context = context;
            in.seed = DeriveSeed(seed, {3, static_cast<std::uint64_t>(step)});
            RefinementOutcome outcome =
                RefineUntilConfident(in, *description, *expert, cfg.refine);
            record.feedback_total += outcome.queries;
            for (const FeedbackEvent& e : outcome.events) entry.feedback.push_back(ToRecord(e));
            description = outcome.description;
            entry.entropy_trace = outcome.entropy_trace;
            aborted = outcome.aborted;
            const std::vector<ObservationRef> top = outcome.retrieval.Top(cfg.top_m);
            entry.retrieval = top;
            for (size_t i = 0; i < top.size(); ++i) {
              entry.retrieval_scores.push_back(outcome.retrieval.entries[i].score);
            }
            intervened = Intervene(top, cfg.top_m, policy);
            clustering = std::move(outcome.clustering);
            have_clustering = true;
          }
          if (description) entry.description = description->ToString();
          if (aborted) {
            record.incomplete = true;
            record.entries.push_back(std::move(entry));
            break;
          }
        }
      }
      entry.intervened = intervened.has_value();
      const ActionPlan plan = SamplePlan(policy, intervened ? *intervened : z, decision_seed,
                                         cfg.action_noise);
      if (observer) {
        DecisionView view{&scenario, &state, &now.image, &entry,
                          have_clustering ? &clustering : nullptr};
        observer->OnDecision(view);
      }
      const int run = std::min<int>({cfg.execute_steps, static_cast<int>(plan.steps.size()),
                                     scenario.horizon - step});
      for (int e = 0; e < run; ++e) {
        if (observer) observer->BeforeStep(step);
        state = Step(state, plan.steps[e], scenario);
        tracker.Observe(state);
        entry.executed.push_back(plan.steps[e]);
        ++step;
        if (e + 1 < run) history.push_back({Render(state, scenario), state.agent, step});
      }
      record.entries.push_back(std::move(entry));
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kRuntime) throw;
    record.error = e.what();
  }
  const EpisodeOutcome outcome = tracker.Finish();
  record.subgoals = outcome.subgoals;
  record.success = outcome.success && record.error.empty();
  record.executed_mode = outcome.executed_mode;
  if (observer) observer->OnFinish(record);
  return record;
}

}  // namespace aba
