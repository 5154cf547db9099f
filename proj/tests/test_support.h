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

#ifndef ABA_TESTS_TEST_SUPPORT_H_
#define ABA_TESTS_TEST_SUPPORT_H_

#include <string>
#include <vector>

#include "aba/bench.h"
#include "aba/correspondence.h"
#include "aba/types.h"

namespace aba::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::string& path() const { return path_; }
  std::string Join(const std::string& name) const;

 private:
  std::string path_;
};

// Workspace with both tasks generated at their default size (seed 1),
// fitted and calibrated at p = 0.02. Built once per process.
const Workspace& PreparedWorkspace();
const RuntimeModels& PreparedModels(Task task);
const std::vector<Scenario>& Suite(Task task);

// Resolver over a fixed name list; index i resolves to id i.
LabelResolver NameResolver(std::vector<std::string> names);

// Image from rows of characters: '.' is label 0, a digit d is label d.
LabelGridImage ImageFromRows(const std::vector<std::string>& rows);

}  // namespace aba::testing

#endif  // ABA_TESTS_TEST_SUPPORT_H_
