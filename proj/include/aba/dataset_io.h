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

#ifndef ABA_DATASET_IO_H_
#define ABA_DATASET_IO_H_

#include <string>

#include "aba/types.h"

namespace aba {

// Dataset files (.dslog) are line-delimited JSON. Line 1 is a header:
//
//   {"format":"aba-dataset","version":1,"task":...,"plan_length":T,
//    "grid":[W,H],"labels":[name0,name1,...],"config_hash":...,
//    "trajectories":N}
//
// followed by exactly N trajectory records:
//
//   {"environment_id":...,"mode_label":...,
//    "pairs":[{"t":0,"q":[x,y,g],"image":"...","plan":[[dx,dy,dg],...]},...]}
//
// "image" packs one base-36 digit per cell in row-major order, so label ids
// must stay below 36.
inline constexpr int kDatasetFormatVersion = 1;
inline constexpr double kActionBound = 1.0;

// Writes atomically through a sibling temporary file.
void SaveDataset(const Dataset& dataset, const std::string& path);
Dataset LoadDataset(const std::string& path);

// Checks every structural invariant; throws ValidationError naming the field.
void ValidateDataset(const Dataset& dataset);

std::string EncodeImageCells(const LabelGridImage& image);
LabelGridImage DecodeImageCells(const std::string& text, int width, int height);

}  // namespace aba

#endif  // ABA_DATASET_IO_H_
