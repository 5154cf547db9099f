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

#ifndef ABA_ERROR_H_
#define ABA_ERROR_H_

#include <stdexcept>
#include <string>

namespace aba {

// Coarse error classes. The numeric values double as CLI exit codes.
enum class ErrorKind {
  kUsage = 1,
  kValidation = 2,
  kRuntime = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// invalid input data, schema or invariant violations
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorKind::kValidation, message) {}
};

// I/O, simulator and numeric failures
class RuntimeFailure : public Error {
 public:
  explicit RuntimeFailure(const std::string& message)
      : Error(ErrorKind::kRuntime, message) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message)
      : Error(ErrorKind::kUsage, message) {}
};

// Grammar errors carry the zero-based token position that failed.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& message, int position)
      : ValidationError(message + " (token " + std::to_string(position) + ")"),
        position_(position) {}
  int position() const { return position_; }

 private:
  int position_;
};

}  // namespace aba

#endif  // ABA_ERROR_H_
