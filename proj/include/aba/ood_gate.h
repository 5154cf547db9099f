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

#ifndef ABA_OOD_GATE_H_
#define ABA_OOD_GATE_H_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "aba/sparse_rows.h"
#include "aba/types.h"

namespace aba {

class PolicyModel;

// Unit-normalized in-distribution embeddings plus a calibrated threshold.
class IdIndex {
 public:
  IdIndex() = default;
  // Throws RuntimeFailure on a zero-norm embedding.
  explicit IdIndex(const std::vector<Embedding>& embeddings);

  explicit IdIndex(std::shared_ptr<const SparseRows> rows);

  int size() const { return rows_ ? rows_->size() : 0; }
  int dimension() const { return rows_ ? rows_->dimension() : 0; }
  const SparseRows& rows() const { return *rows_; }
  double norm(int i) const { return norms_[i]; }

  double threshold() const { return threshold_; }
  double percentile() const { return percentile_; }
  int held_out_size() const { return held_out_size_; }
  bool calibrated() const { return held_out_size_ > 0; }
  void SetCalibration(double threshold, double percentile, int held_out_size);

 private:
  std::shared_ptr<const SparseRows> rows_;
  std::vector<double> norms_;
  double threshold_ = 0.0;
  double percentile_ = 0.0;
  int held_out_size_ = 0;
};

IdIndex BuildIdIndex(const PolicyModel& model);

// Largest cosine similarity between z and any stored embedding. Throws
// ValidationError on an empty index and RuntimeFailure if z has zero norm.
double IdScore(std::span<const double> z, const IdIndex& index);

// Linearly interpolated empirical quantile, p in [0, 1].
double Quantile(std::vector<double> values, double p);

// Sets the threshold to the p-quantile of the held-out scores and returns it.
// p must lie in [0, 0.5]; an empty held-out set is a RuntimeFailure.
double Calibrate(IdIndex& index, const std::vector<Embedding>& held_out, double p);

struct OodVerdict {
  bool ood = false;
  double score = 0.0;
};

// A score equal to the threshold is nominal.
OodVerdict IsOod(std::span<const double> z, const IdIndex& index);

// models/<task>.idx: calibration metadata; embeddings come from the policy.
struct IndexFile {
  std::string dataset_hash;
  double threshold = 0.0;
  double percentile = 0.02;
  int held_out_size = 0;

  bool operator==(const IndexFile&) const = default;
};

void SaveIndexFile(const IndexFile& file, const std::string& path);
IndexFile LoadIndexFile(const std::string& path);

}  // namespace aba

#endif  // ABA_OOD_GATE_H_
