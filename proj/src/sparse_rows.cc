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

#include "aba/sparse_rows.h"

#include <algorithm>
#include <map>
#include <string>

#include "aba/error.h"

namespace aba {

SparseRows::SparseRows(std::vector<double> base) : base_(std::move(base)) {}

std::vector<double> SparseRows::ColumnModes(const std::vector<Embedding>& rows, int sample) {
  if (rows.empty()) return {};
  const size_t dim = rows.front().size();
  const size_t n = std::min(rows.size(), static_cast<size_t>(std::max(sample, 1)));
  std::vector<double> modes(dim, 0.0);
  for (size_t c = 0; c < dim; ++c) {
    std::map<double, int> counts;
    for (size_t r = 0; r < n; ++r) ++counts[rows[r][c]];
    int best = 0;
    for (const auto& [value, count] : counts) {
      if (count > best) {
        best = count;
        modes[c] = value;
      }
    }
  }
  return modes;
}

SparseRows SparseRows::FromDense(const std::vector<Embedding>& rows) {
  SparseRows out(ColumnModes(rows));
  for (const Embedding& r : rows) out.Append(r);
  return out;
}

void SparseRows::Append(std::span<const double> row) {
  if (row.size() != base_.size()) {
    throw ValidationError("row of size " + std::to_string(row.size()) +
                          " does not match dimension " + std::to_string(base_.size()));
  }
  double norm2 = 0.0;
  for (size_t c = 0; c < row.size(); ++c) {
    norm2 += row[c] * row[c];
    if (row[c] != base_[c]) {
      columns_.push_back(static_cast<int>(c));
      deltas_.push_back(row[c] - base_[c]);
      values_.push_back(row[c]);
    }
  }
  offsets_.push_back(static_cast<int>(columns_.size()));
  squared_norms_.push_back(norm2);
}

Embedding SparseRows::Row(int i) const {
  Embedding out = base_;
  for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) out[columns_[k]] = values_[k];
  return out;
}

SparseRows::Query SparseRows::Prepare(std::span<const double> z) const {
  if (z.size() != base_.size()) {
    throw ValidationError("query of size " + std::to_string(z.size()) +
                          " does not match dimension " + std::to_string(base_.size()));
  }
  Query q;
  q.z = z;
  for (size_t c = 0; c < z.size(); ++c) {
    q.dot_base += z[c] * base_[c];
    const double d = z[c] - base_[c];
    q.distance_base2 += d * d;
  }
  return q;
}

double SparseRows::Dot(const Query& q, int i) const {
  double s = q.dot_base;
  for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) s += q.z[columns_[k]] * deltas_[k];
  return s;
}

double SparseRows::SquaredDistance(const Query& q, int i) const {
  double s = q.distance_base2;
  for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) {
    const int c = columns_[k];
    const double from_base = q.z[c] - base_[c];
    const double from_row = from_base - deltas_[k];
    s += from_row * from_row - from_base * from_base;
  }
  return std::max(s, 0.0);
}

}  // namespace aba
