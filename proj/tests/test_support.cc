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

#include "test_support.h"

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace aba::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::string pattern = (fs::temp_directory_path() / "aba-test-XXXXXX").string();
  if (mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string TempDir::Join(const std::string& name) const {
  return (fs::path(path_) / name).string();
}

namespace {

struct Prepared {
  TempDir dir;
  std::unique_ptr<Workspace> ws;
  std::map<Task, RuntimeModels> models;
  std::map<Task, std::vector<Scenario>> suites;
};

Prepared& Instance() {
  static std::once_flag once;
  static Prepared instance;
  Prepared* prepared = &instance;
  std::call_once(once, [prepared] {
    prepared->ws = std::make_unique<Workspace>(prepared->dir.path());
    for (Task task : {Task::kSweepSort, Task::kPlaceInCup}) {
      GenData(*prepared->ws, task, DefaultDemosPerMode(task), 1);
      Fit(*prepared->ws, task);
      CalibrateTask(*prepared->ws, task, 0.02);
      prepared->models[task] = LoadModels(*prepared->ws, task);
      prepared->suites[task] = prepared->ws->Suite(task);
    }
  });
  return instance;
}

}  // namespace

const Workspace& PreparedWorkspace() { return *Instance().ws; }
const RuntimeModels& PreparedModels(Task task) { return Instance().models.at(task); }
const std::vector<Scenario>& Suite(Task task) { return Instance().suites.at(task); }

LabelResolver NameResolver(std::vector<std::string> names) {
  return [names = std::move(names)](const std::string& name) -> std::optional<LabelId> {
    for (size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return static_cast<LabelId>(i);
    }
    return std::nullopt;
  };
}

LabelGridImage ImageFromRows(const std::vector<std::string>& rows) {
  const int h = static_cast<int>(rows.size());
  const int w = h == 0 ? 0 : static_cast<int>(rows.front().size());
  LabelGridImage image(w, h, 0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const char ch = rows[r][c];
      image.set(r, c, ch == '.' ? 0 : static_cast<LabelId>(ch - '0'));
    }
  }
  return image;
}

}  // namespace aba::testing
