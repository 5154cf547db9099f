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

#ifndef ABA_ENCODER_H_
#define ABA_ENCODER_H_

#include <span>
#include <vector>

#include "aba/types.h"

namespace aba {

// Observation encoder. The embedding concatenates, for each of the
// known_labels + 1 channels (the last one collects every unregistered id),
// a pool_grid x pool_grid map of per-block occupancy fractions of the most
// recent image, followed by `history` proprioception triples (oldest first)
// with x and y divided by the grid size.
struct EncoderConfig {
  int pool_grid = 16;
  int history = 2;
  int known_labels = 0;
  int grid_width = 32;
  int grid_height = 32;

  int dimension() const {
    return (known_labels + 1) * pool_grid * pool_grid + 3 * history;
  }
  int image_dimension() const { return (known_labels + 1) * pool_grid * pool_grid; }
  void Validate() const;  // throws ValidationError

  bool operator==(const EncoderConfig&) const = default;
};

EncoderConfig DefaultEncoderConfig(const Dataset& dataset);

// `history` holds exactly cfg.history observations, most recent last.
Embedding Encode(std::span<const Observation> history, const EncoderConfig& cfg);

// Encodes position `index` of a sequence, repeating the first observation
// when fewer than cfg.history precede it.
Embedding EncodeAt(std::span<const Observation> sequence, int index,
                   const EncoderConfig& cfg);
Embedding EncodeAt(const Trajectory& trajectory, int index, const EncoderConfig& cfg);

// Label-agnostic visual features for the visual-retrieval baseline: pooled
// occupancy of (foreground, agent) where foreground is every label other than
// the image's most frequent one and the agent.
Embedding VisualFeatures(const LabelGridImage& image, int pool_grid);

double CosineSimilarity(std::span<const double> a, std::span<const double> b);

}  // namespace aba

#endif  // ABA_ENCODER_H_
