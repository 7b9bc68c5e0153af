// Copyright 2026 The mpbench Authors. All Rights Reserved.
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

#pragma once

#include <stdexcept>
#include <string>

namespace mpbench {

/// Failure categories. The CLI maps usage/config to exit code 2 and the rest
/// to exit code 1.
enum class ErrorKind {
  config,
  usage,
  measurement,
  corruption,
  deadlock,
  runtime,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class MeasurementError : public Error {
 public:
  explicit MeasurementError(const std::string& what)
      : Error(ErrorKind::measurement, what) {}
};

class CorruptionError : public Error {
 public:
  explicit CorruptionError(const std::string& what)
      : Error(ErrorKind::corruption, what) {}
};

class DeadlockError : public Error {
 public:
  explicit DeadlockError(const std::string& what)
      : Error(ErrorKind::deadlock, what) {}
};

/// Throws the subclass matching `kind`.
[[noreturn]] void throw_error(ErrorKind kind, const std::string& what);

}  // namespace mpbench
