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

#include "aba/mode_refinery.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "aba/error.h"
#include "aba/rng.h"

namespace aba {
namespace {

double SquaredDistance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

struct Run {
  std::vector<int> labels;
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;
};

std::vector<std::vector<double>> PlusPlusSeeds(const std::vector<std::vector<double>>& pts,
                                               int k, Rng& rng) {
  const int n = static_cast<int>(pts.size());
  std::vector<std::vector<double>> centroids;
  std::uniform_int_distribution<int> first(0, n - 1);
  centroids.push_back(pts[first(rng)]);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], SquaredDistance(pts[i], centroids.back()));
      total += d2[i];
    }
    int chosen = 0;
    if (total > 0.0) {
      std::discrete_distribution<int> pick(d2.begin(), d2.end());
      chosen = pick(rng);
    } else {
      chosen = first(rng);
    }
    centroids.push_back(pts[chosen]);
  }
  return centroids;
}

Run Lloyd(const std::vector<std::vector<double>>& pts,
          std::vector<std::vector<double>> centroids) {
  const int n = static_cast<int>(pts.size());
  const int k = static_cast<int>(centroids.size());
  const size_t dim = pts.front().size();
  Run run;
  run.labels.assign(n, -1);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = SquaredDistance(pts[i], centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = SquaredDistance(pts[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (run.labels[i] != best) {
        run.labels[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      ++counts[run.labels[i]];
      for (size_t j = 0; j < dim; ++j) sums[run.labels[i]][j] += pts[i][j];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // an empty cluster keeps its centroid
      for (size_t j = 0; j < dim; ++j) centroids[c][j] = sums[c][j] / counts[c];
    }
  }
  run.centroids = std::move(centroids);
  return run;
}

// Hartigan transfers: move single points while that lowers the inertia.
void Transfer(const std::vector<std::vector<double>>& pts, Run& run) {
  const int n = static_cast<int>(pts.size());
  const int k = static_cast<int>(run.centroids.size());
  const size_t dim = pts.front().size();
  std::vector<int> counts(k, 0);
  for (int l : run.labels) ++counts[l];
  auto recenter = [&](int c) {
    if (counts[c] == 0) return;
    std::vector<double> sum(dim, 0.0);
    for (int i = 0; i < n; ++i) {
      if (run.labels[i] != c) continue;
      for (size_t j = 0; j < dim; ++j) sum[j] += pts[i][j];
    }
    for (size_t j = 0; j < dim; ++j) run.centroids[c][j] = sum[j] / counts[c];
  };
  for (int c = 0; c < k; ++c) recenter(c);
  for (int pass = 0; pass < 100; ++pass) {
    bool moved = false;
    for (int i = 0; i < n; ++i) {
      const int from = run.labels[i];
      if (counts[from] < 2) continue;
      const double leave = counts[from] / (counts[from] - 1.0) *
                           SquaredDistance(pts[i], run.centroids[from]);
      int to = -1;
      double best_gain = 1e-12;
      for (int c = 0; c < k; ++c) {
        if (c == from) continue;
        const double join =
            counts[c] / (counts[c] + 1.0) * SquaredDistance(pts[i], run.centroids[c]);
        if (leave - join > best_gain) {
          best_gain = leave - join;
          to = c;
        }
      }
      if (to < 0) continue;
      run.labels[i] = to;
      --counts[from];
      ++counts[to];
      recenter(from);
      recenter(to);
      moved = true;
    }
    if (!moved) break;
  }
  run.inertia = 0.0;
  for (int i = 0; i < n; ++i) run.inertia += SquaredDistance(pts[i], run.centroids[run.labels[i]]);
}

}  // namespace

std::vector<ActionPlan> SampleActionSet(std::span<const ObservationRef> observations,
                                        const PolicyModel& policy, std::uint64_t seed) {
  std::vector<ActionPlan> plans;
  plans.reserve(observations.size());
  for (size_t i = 0; i < observations.size(); ++i) {
    plans.push_back(SamplePlanForPair(policy, policy.IndexOf(observations[i]),
                                      DeriveSeed(seed, {i}), 0.0));
  }
  return plans;
}

ModeClustering ClusterPoints(std::vector<std::vector<double>> points, int n_c,
                             std::uint64_t seed, int restarts) {
  if (n_c < 1) throw ValidationError("cluster count must be >= 1");
  if (static_cast<int>(points.size()) < n_c) {
    throw ValidationError("cannot fit " + std::to_string(n_c) + " clusters to " +
                          std::to_string(points.size()) + " points");
  }
  for (const auto& p : points) {
    if (p.size() != points.front().size()) {
      throw ValidationError("cluster points differ in dimension");
    }
  }
  Run best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    Rng rng(DeriveSeed(seed, {static_cast<std::uint64_t>(r)}));
    Run run = Lloyd(points, PlusPlusSeeds(points, n_c, rng));
    Transfer(points, run);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  ModeClustering out;
  out.points = std::move(points);
  out.labels = std::move(best.labels);
  out.centroids = std::move(best.centroids);
  out.inertia = best.inertia;
  return out;
}

ModeClustering ClusterModes(const std::vector<ActionPlan>& plans, int n_c,
                            std::uint64_t seed, int restarts) {
  std::vector<std::vector<double>> points;
  points.reserve(plans.size());
  for (const ActionPlan& p : plans) points.push_back(p.Flatten());
  return ClusterPoints(std::move(points), n_c, seed, restarts);
}

double LabelEntropy(std::span<const int> labels) {
  if (labels.empty()) throw ValidationError("entropy of an empty label set");
  std::map<int, int> counts;
  for (int l : labels) ++counts[l];
  double h = 0.0;
  const double n = static_cast<double>(labels.size());
  for (const auto& [label, c] : counts) {
    const double p = c / n;
    h -= p * std::log(p);
  }
  return h;
}

double ModeEntropy(const ModeClustering& clustering, std::span<const int> subset) {
  if (subset.empty()) throw ValidationError("entropy of an empty subset");
  std::vector<int> labels;
  labels.reserve(subset.size());
  for (int i : subset) {
    if (i < 0 || i >= static_cast<int>(clustering.labels.size())) {
      throw ValidationError("subset index " + std::to_string(i) + " out of range");
    }
    labels.push_back(clustering.labels[i]);
  }
  return LabelEntropy(labels);
}

namespace {

std::vector<ClusterSummary> Summarize(const ModeClustering& clustering,
                                      std::span<const ObservationRef> candidates,
                                      std::span<const int> top, const PolicyModel& policy) {
  std::vector<ClusterSummary> out(clustering.clusters());
  std::vector<double> best(clustering.clusters(), std::numeric_limits<double>::infinity());
  for (int c = 0; c < clustering.clusters(); ++c) out[c].cluster = c;
  for (size_t i = 0; i < clustering.labels.size(); ++i) {
    const int c = clustering.labels[i];
    ++out[c].size;
    const double d = SquaredDistance(clustering.points[i], clustering.centroids[c]);
    if (d < best[c]) {
      best[c] = d;
      out[c].representative = candidates[i];
      out[c].mode_label = policy.dataset().trajectories[candidates[i].trajectory].mode_label;
    }
  }
  for (int i : top) ++out[clustering.labels[i]].top_members;
  return out;
}

}  // namespace

RefinementOutcome RefineUntilConfident(const RefinementInputs& in,
                                       const CorrespondenceDescription& initial,
                                       Expert& expert, const RefinementConfig& cfg) {
  if (in.candidates.empty()) throw ValidationError("refinement needs candidate observations");
  if (in.corpus == nullptr || in.policy == nullptr) {
    throw ValidationError("refinement needs a corpus and a policy");
  }
  if (cfg.top_m < 1) throw ValidationError("top_m must be >= 1");
  RefinementOutcome out;
  out.description = initial;
  const std::vector<ActionPlan> plans = SampleActionSet(in.candidates, *in.policy, in.seed);
  const int n_c = std::min<int>(cfg.n_c, static_cast<int>(plans.size()));
  out.clustering = ClusterModes(plans, n_c, DeriveSeed(in.seed, {0x6b6d}));
  std::map<ObservationRef, int> position;
  for (size_t i = 0; i < in.candidates.size(); ++i) {
    position.emplace(in.candidates[i], static_cast<int>(i));
  }

  std::vector<int> top;
  auto evaluate = [&] {
    out.retrieval = RankRetrieval(in.ood_masks, in.candidates, *in.corpus, out.description);
    out.entry_positions.clear();
    for (const RetrievalEntry& e : out.retrieval.entries) {
      out.entry_positions.push_back(position.at(e.ref));
    }
    const int m = std::min(cfg.top_m, out.retrieval.size());
    top.assign(out.entry_positions.begin(), out.entry_positions.begin() + m);
    out.entropy_trace.push_back(ModeEntropy(out.clustering, top));
  };

  evaluate();
  while (out.entropy_trace.back() > cfg.h_max && out.queries < cfg.max_queries) {
    ExpertQuery query = in.context;
    query.ordinal += out.queries;
    query.description = out.description.ToString();
    query.entropy = out.entropy_trace.back();
    query.clusters = Summarize(out.clustering, in.candidates, top, *in.policy);
    for (int i = 0; i < std::min(cfg.top_m, out.retrieval.size()); ++i) {
      RetrievalEntry e = out.retrieval.entries[i];
      e.map.pairs.clear();
      query.top.push_back(std::move(e));
    }
    FeedbackEvent event;
    event.query = query;
    const std::optional<std::string> answer = expert.Respond(query);
    ++out.queries;
    if (!answer) {
      out.aborted = true;
      out.events.push_back(std::move(event));
      out.entropy_trace.push_back(out.entropy_trace.back());
      break;
    }
    event.response = *answer;
    CorrespondenceDescription more;
    try {
      more = DecodeDescription(*answer, in.resolve);
    } catch (const ValidationError&) {
      out.aborted = true;
      out.events.push_back(std::move(event));
      out.entropy_trace.push_back(out.entropy_trace.back());
      break;
    }
    event.accepted = true;
    out.events.push_back(std::move(event));
    out.description.Extend(more);
    evaluate();
    if (more.ends_with_pass()) break;
  }
  return out;
}

}  // namespace aba
