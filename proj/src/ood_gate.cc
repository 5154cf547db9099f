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

#include "aba/ood_gate.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "aba/error.h"
#include "aba/policy.h"

namespace aba {
namespace {

double Norm(std::span<const double> z) {
  double s = 0.0;
  for (double v : z) s += v * v;
  return std::sqrt(s);
}

}  // namespace

IdIndex::IdIndex(const std::vector<Embedding>& embeddings) {
  if (embeddings.empty()) return;
  for (const Embedding& z : embeddings) {
    if (z.size() != embeddings.front().size()) {
      throw ValidationError("index embeddings differ in dimension");
    }
  }
  *this = IdIndex(std::make_shared<SparseRows>(SparseRows::FromDense(embeddings)));
}

IdIndex::IdIndex(std::shared_ptr<const SparseRows> rows) : rows_(std::move(rows)) {
  norms_.reserve(rows_->size());
  for (int i = 0; i < rows_->size(); ++i) {
    const double n = std::sqrt(rows_->SquaredNorm(i));
    if (n == 0.0) throw RuntimeFailure("zero-norm embedding in the ID index");
    norms_.push_back(n);
  }
}

void IdIndex::SetCalibration(double threshold, double percentile, int held_out_size) {
  if (!(threshold >= -1.0 && threshold <= 1.0)) {
    throw ValidationError("threshold must lie in [-1, 1]");
  }
  threshold_ = threshold;
  percentile_ = percentile;
  held_out_size_ = held_out_size;
}

IdIndex BuildIdIndex(const PolicyModel& model) { return IdIndex(model.shared_rows()); }

double IdScore(std::span<const double> z, const IdIndex& index) {
  if (index.size() == 0) throw ValidationError("ID index is empty");
  if (static_cast<int>(z.size()) != index.dimension()) {
    throw ValidationError("query dimension does not match the ID index");
  }
  const double n = Norm(z);
  if (n == 0.0) throw RuntimeFailure("zero-norm query embedding");
  const SparseRows::Query q = index.rows().Prepare(z);
  double best = -1.0;
  for (int i = 0; i < index.size(); ++i) {
    best = std::max(best, index.rows().Dot(q, i) / index.norm(i));
  }
  return std::clamp(best / n, -1.0, 1.0);
}

double Quantile(std::vector<double> values, double p) {
  if (values.empty()) throw RuntimeFailure("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("quantile p must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

double Calibrate(IdIndex& index, const std::vector<Embedding>& held_out, double p) {
  if (!(p >= 0.0 && p <= 0.5)) throw ValidationError("percentile must lie in [0, 0.5]");
  if (held_out.empty()) throw RuntimeFailure("calibration needs held-out observations");
  std::vector<double> scores;
  scores.reserve(held_out.size());
  for (const Embedding& z : held_out) scores.push_back(IdScore(z, index));
  const double lambda = Quantile(std::move(scores), p);
  index.SetCalibration(lambda, p, static_cast<int>(held_out.size()));
  return lambda;
}

OodVerdict IsOod(std::span<const double> z, const IdIndex& index) {
  const double score = IdScore(z, index);
  return {score < index.threshold(), score};
}

void SaveIndexFile(const IndexFile& file, const std::string& path) {
  const nlohmann::json j = {{"format", "aba-index"},
                            {"version", 1},
                            {"dataset_hash", file.dataset_hash},
                            {"threshold", file.threshold},
                            {"percentile", file.percentile},
                            {"held_out_size", file.held_out_size}};
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write index file '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw RuntimeFailure("write failed for '" + path + "'");
}

IndexFile LoadIndexFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeFailure("cannot open index file '" + path + "'");
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.value("format", "") != "aba-index" || j.value("version", 0) != 1) {
      throw ValidationError("'" + path + "' is not a version-1 index file");
    }
    IndexFile f;
    f.dataset_hash = j.at("dataset_hash").get<std::string>();
    f.threshold = j.at("threshold").get<double>();
    f.percentile = j.at("percentile").get<double>();
    f.held_out_size = j.at("held_out_size").get<int>();
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("index file '" + path + "' is malformed: " + e.what());
  }
}

}  // namespace aba
