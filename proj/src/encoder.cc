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

#include "aba/encoder.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "aba/error.h"
#include "aba/sim.h"

namespace aba {
namespace {

void PoolImage(const LabelGridImage& image, const EncoderConfig& cfg,
               double* out) {
  const int g = cfg.pool_grid;
  const int bw = cfg.grid_width / g;
  const int bh = cfg.grid_height / g;
  const double inv = 1.0 / (bw * bh);
  const int unknown = cfg.known_labels;
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      const int id = image.at(r, c);
      const int channel = id < cfg.known_labels ? id : unknown;
      out[(channel * g + r / bh) * g + c / bw] += inv;
    }
  }
}

Embedding EncodeParts(const LabelGridImage& image,
                      std::span<const Proprioception* const> proprios,
                      const EncoderConfig& cfg) {
  if (image.width() != cfg.grid_width || image.height() != cfg.grid_height) {
    throw ValidationError("observation image does not match encoder grid");
  }
  Embedding z(cfg.dimension(), 0.0);
  PoolImage(image, cfg, z.data());
  double* q = z.data() + cfg.image_dimension();
  for (const Proprioception* p : proprios) {
    *q++ = p->x / cfg.grid_width;
    *q++ = p->y / cfg.grid_height;
    *q++ = p->gripper;
  }
  return z;
}

}  // namespace

void EncoderConfig::Validate() const {
  if (pool_grid <= 0 || grid_width % pool_grid != 0 || grid_height % pool_grid != 0) {
    throw ValidationError("pool grid " + std::to_string(pool_grid) +
                          " must divide the image size");
  }
  if (history < 1) throw ValidationError("encoder history must be >= 1");
  if (known_labels < 1) throw ValidationError("encoder needs at least one label");
}

EncoderConfig DefaultEncoderConfig(const Dataset& dataset) {
  EncoderConfig cfg;
  cfg.known_labels = dataset.labels.size();
  cfg.grid_width = dataset.grid_width;
  cfg.grid_height = dataset.grid_height;
  return cfg;
}

Embedding Encode(std::span<const Observation> history, const EncoderConfig& cfg) {
  if (static_cast<int>(history.size()) != cfg.history) {
    throw ValidationError("encoder expects " + std::to_string(cfg.history) +
                          " observations, got " + std::to_string(history.size()));
  }
  std::vector<const Proprioception*> proprios;
  for (const Observation& o : history) proprios.push_back(&o.proprio);
  return EncodeParts(history.back().image, proprios, cfg);
}

Embedding EncodeAt(std::span<const Observation> sequence, int index,
                   const EncoderConfig& cfg) {
  if (index < 0 || index >= static_cast<int>(sequence.size())) {
    throw ValidationError("encode index out of range");
  }
  std::vector<const Proprioception*> proprios;
  for (int h = cfg.history - 1; h >= 0; --h) {
    proprios.push_back(&sequence[std::max(index - h, 0)].proprio);
  }
  return EncodeParts(sequence[index].image, proprios, cfg);
}

Embedding EncodeAt(const Trajectory& trajectory, int index, const EncoderConfig& cfg) {
  if (index < 0 || index >= static_cast<int>(trajectory.pairs.size())) {
    throw ValidationError("encode index out of range");
  }
  std::vector<const Proprioception*> proprios;
  for (int h = cfg.history - 1; h >= 0; --h) {
    proprios.push_back(&trajectory.pairs[std::max(index - h, 0)].observation.proprio);
  }
  return EncodeParts(trajectory.pairs[index].observation.image, proprios, cfg);
}

Embedding VisualFeatures(const LabelGridImage& image, int pool_grid) {
  if (pool_grid <= 0 || image.width() % pool_grid != 0 ||
      image.height() % pool_grid != 0) {
    throw ValidationError("pool grid must divide the image size");
  }
  std::map<LabelId, int> counts;
  for (LabelId id : image.cells()) ++counts[id];
  LabelId dominant = 0;
  int best = -1;
  for (const auto& [id, n] : counts) {
    if (n > best) {
      best = n;
      dominant = id;
    }
  }
  const int g = pool_grid;
  const int bw = image.width() / g;
  const int bh = image.height() / g;
  const double inv = 1.0 / (bw * bh);
  Embedding f(2 * g * g, 0.0);
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      const LabelId id = image.at(r, c);
      if (id == dominant) continue;
      const int channel = id == kAgentLabel ? 1 : 0;
      f[(channel * g + r / bh) * g + c / bw] += inv;
    }
  }
  return f;
}

double CosineSimilarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("cosine of mismatched vectors");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw RuntimeFailure("cosine similarity of a zero-norm vector");
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace aba
