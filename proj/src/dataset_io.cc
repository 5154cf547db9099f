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

#include "aba/dataset_io.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aba/error.h"

namespace aba {
namespace {

using nlohmann::json;

constexpr char kDigits[] = "0123456789abcdefghijklmnopqrstuvwxyz";

json TrajectoryToJson(const Trajectory& trajectory) {
  json pairs = json::array();
  for (const StepPair& pair : trajectory.pairs) {
    json plan = json::array();
    for (const Action& a : pair.plan.steps) {
      plan.push_back({a.dx, a.dy, a.dgripper});
    }
    const Proprioception& q = pair.observation.proprio;
    pairs.push_back({{"t", pair.observation.timestep},
                     {"q", {q.x, q.y, q.gripper}},
                     {"image", EncodeImageCells(pair.observation.image)},
                     {"plan", std::move(plan)}});
  }
  return {{"environment_id", trajectory.environment_id},
          {"mode_label", trajectory.mode_label},
          {"pairs", std::move(pairs)}};
}

Trajectory TrajectoryFromJson(const json& record, const Dataset& header) {
  Trajectory trajectory;
  trajectory.environment_id = record.at("environment_id").get<std::string>();
  trajectory.mode_label = record.at("mode_label").get<std::string>();
  for (const json& p : record.at("pairs")) {
    StepPair pair;
    pair.observation.timestep = p.at("t").get<int>();
    const json& q = p.at("q");
    if (!q.is_array() || q.size() != 3) {
      throw ValidationError("field 'q' must hold 3 numbers");
    }
    pair.observation.proprio = {q[0].get<double>(), q[1].get<double>(),
                                q[2].get<double>()};
    pair.observation.image = DecodeImageCells(
        p.at("image").get<std::string>(), header.grid_width, header.grid_height);
    for (const json& a : p.at("plan")) {
      if (!a.is_array() || a.size() != 3) {
        throw ValidationError("field 'plan' steps must hold 3 numbers");
      }
      pair.plan.steps.push_back(
          {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()});
    }
    trajectory.pairs.push_back(std::move(pair));
  }
  return trajectory;
}

}  // namespace

std::string EncodeImageCells(const LabelGridImage& image) {
  std::string text;
  text.reserve(image.cells().size());
  for (LabelId id : image.cells()) {
    if (id >= 36) {
      throw ValidationError("label id " + std::to_string(id) +
                            " cannot be packed (max 35)");
    }
    text.push_back(kDigits[id]);
  }
  return text;
}

LabelGridImage DecodeImageCells(const std::string& text, int width, int height) {
  if (text.size() != static_cast<size_t>(width) * height) {
    throw ValidationError("field 'image' has " + std::to_string(text.size()) +
                          " cells, expected " + std::to_string(width * height));
  }
  std::vector<LabelId> cells(text.size());
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c >= '0' && c <= '9') {
      cells[i] = static_cast<LabelId>(c - '0');
    } else if (c >= 'a' && c <= 'z') {
      cells[i] = static_cast<LabelId>(10 + c - 'a');
    } else {
      throw ValidationError(std::string("field 'image' has invalid cell '") + c +
                            "'");
    }
  }
  return LabelGridImage(width, height, std::move(cells));
}

void ValidateDataset(const Dataset& dataset) {
  if (dataset.plan_length <= 0) {
    throw ValidationError("field 'plan_length' must be positive");
  }
  if (dataset.grid_width <= 0 || dataset.grid_height <= 0) {
    throw ValidationError("field 'grid' must be positive");
  }
  const int label_count = dataset.labels.size();
  for (size_t ti = 0; ti < dataset.trajectories.size(); ++ti) {
    const Trajectory& trajectory = dataset.trajectories[ti];
    const std::string where = "trajectory " + std::to_string(ti);
    if (trajectory.pairs.empty()) {
      throw ValidationError(where + ": field 'pairs' is empty");
    }
    if (trajectory.environment_id.empty()) {
      throw ValidationError(where + ": field 'environment_id' is empty");
    }
    int previous_t = -1;
    for (const StepPair& pair : trajectory.pairs) {
      const Observation& obs = pair.observation;
      if (obs.timestep <= previous_t) {
        throw ValidationError(where + ": field 't' not strictly increasing");
      }
      previous_t = obs.timestep;
      const Proprioception& q = obs.proprio;
      if (!std::isfinite(q.x) || !std::isfinite(q.y) || q.x < 0.0 ||
          q.y < 0.0 || q.x > dataset.grid_width - 1 ||
          q.y > dataset.grid_height - 1) {
        throw ValidationError(where + ": field 'q' outside workspace");
      }
      if (!(q.gripper >= 0.0 && q.gripper <= 1.0)) {
        throw ValidationError(where + ": field 'q' gripper outside [0,1]");
      }
      if (obs.image.width() != dataset.grid_width ||
          obs.image.height() != dataset.grid_height) {
        throw ValidationError(where + ": field 'image' has wrong size");
      }
      for (LabelId id : obs.image.cells()) {
        if (id >= label_count) {
          throw ValidationError(where + ": field 'image' has unregistered label id " +
                                std::to_string(id));
        }
      }
      if (static_cast<int>(pair.plan.steps.size()) != dataset.plan_length) {
        throw ValidationError(where + ": field 'plan' length " +
                              std::to_string(pair.plan.steps.size()) +
                              " != plan_length " +
                              std::to_string(dataset.plan_length));
      }
      for (const Action& a : pair.plan.steps) {
        for (double v : {a.dx, a.dy, a.dgripper}) {
          if (!std::isfinite(v) || std::abs(v) > kActionBound) {
            throw ValidationError(where + ": field 'plan' action out of bounds");
          }
        }
      }
    }
  }
}

void SaveDataset(const Dataset& dataset, const std::string& path) {
  ValidateDataset(dataset);
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  const fs::path temp = target.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot open '" + path + "' for writing");
    const json header = {{"format", "aba-dataset"},
                         {"version", kDatasetFormatVersion},
                         {"task", dataset.task},
                         {"plan_length", dataset.plan_length},
                         {"grid", {dataset.grid_width, dataset.grid_height}},
                         {"labels", dataset.labels.names()},
                         {"config_hash", dataset.config_hash},
                         {"trajectories", dataset.trajectories.size()}};
    out << header.dump() << '\n';
    for (const Trajectory& t : dataset.trajectories) {
      out << TrajectoryToJson(t).dump() << '\n';
    }
    out.flush();
    if (!out) {
      out.close();
      fs::remove(temp, ec);
      throw RuntimeFailure("write failed for '" + path + "'");
    }
  }
  fs::rename(temp, target, ec);
  if (ec) {
    fs::remove(temp, ec);
    throw RuntimeFailure("cannot move dataset into place at '" + path + "'");
  }
}

Dataset LoadDataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeFailure("cannot open dataset '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("dataset '" + path + "' is empty");
  }
  Dataset dataset;
  size_t expected = 0;
  try {
    const json header = json::parse(line);
    if (header.value("format", "") != "aba-dataset") {
      throw ValidationError("'" + path + "' is not a dataset file");
    }
    const int version = header.at("version").get<int>();
    if (version != kDatasetFormatVersion) {
      throw ValidationError("dataset format version " + std::to_string(version) +
                            " unsupported (expected " +
                            std::to_string(kDatasetFormatVersion) + ")");
    }
    dataset.task = header.at("task").get<std::string>();
    dataset.plan_length = header.at("plan_length").get<int>();
    dataset.grid_width = header.at("grid").at(0).get<int>();
    dataset.grid_height = header.at("grid").at(1).get<int>();
    dataset.labels =
        LabelRegistry(header.at("labels").get<std::vector<std::string>>());
    dataset.config_hash = header.at("config_hash").get<std::string>();
    expected = header.at("trajectories").get<size_t>();
    dataset.trajectories.reserve(expected);
    while (dataset.trajectories.size() < expected && std::getline(in, line)) {
      dataset.trajectories.push_back(TrajectoryFromJson(json::parse(line), dataset));
    }
  } catch (const json::exception& e) {
    throw ValidationError("dataset '" + path + "' is malformed: " + e.what());
  }
  if (dataset.trajectories.size() != expected) {
    throw ValidationError("dataset '" + path + "' is truncated: " +
                          std::to_string(dataset.trajectories.size()) + " of " +
                          std::to_string(expected) + " trajectories");
  }
  ValidateDataset(dataset);
  return dataset;
}

}  // namespace aba
