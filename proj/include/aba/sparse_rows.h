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

#ifndef ABA_SPARSE_ROWS_H_
#define ABA_SPARSE_ROWS_H_

#include <span>
#include <vector>

#include "aba/types.h"

namespace aba {

// Row store for many embeddings of one dimension. Each row is kept as its
// deviation from a shared base vector, so rows that differ from the base in
// a few columns cost a few entries and a query against row i touches only
// those entries.
class SparseRows {
 public:
  SparseRows() = default;
  explicit SparseRows(std::vector<double> base);

  // Per-column most frequent value over the first `sample` rows.
  static std::vector<double> ColumnModes(const std::vector<Embedding>& rows, int sample = 256);
  static SparseRows FromDense(const std::vector<Embedding>& rows);

  void Append(std::span<const double> row);  // throws ValidationError on size mismatch

  int size() const { return static_cast<int>(offsets_.size()) - 1; }
  int dimension() const { return static_cast<int>(base_.size()); }
  const std::vector<double>& base() const { return base_; }
  Embedding Row(int i) const;
  double SquaredNorm(int i) const { return squared_norms_[i]; }

  // Query-side terms shared by every row.
  struct Query {
    std::span<const double> z;
    double dot_base = 0.0;         // z . base
    double distance_base2 = 0.0;   // |z - base|^2
  };
  Query Prepare(std::span<const double> z) const;  // throws ValidationError on size mismatch

  double Dot(const Query& q, int i) const;
  double SquaredDistance(const Query& q, int i) const;  // clamped at 0

 private:
  std::vector<double> base_;
  std::vector<int> offsets_ = {0};
  std::vector<int> columns_;
  std::vector<double> deltas_;
  std::vector<double> values_;
  std::vector<double> squared_norms_;
};

}  // namespace aba

#endif  // ABA_SPARSE_ROWS_H_
