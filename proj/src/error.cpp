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

#include "mpbench/error.hpp"

namespace mpbench {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config:
      return "configuration error";
    case ErrorKind::usage:
      return "usage error";
    case ErrorKind::measurement:
      return "measurement error";
    case ErrorKind::corruption:
      return "corruption error";
    case ErrorKind::deadlock:
      return "deadlock";
    case ErrorKind::runtime:
      return "runtime error";
  }
  return "error";
}

void throw_error(ErrorKind kind, const std::string& what) {
  switch (kind) {
    case ErrorKind::config:
      throw ConfigError(what);
    case ErrorKind::usage:
      throw UsageError(what);
    case ErrorKind::measurement:
      throw MeasurementError(what);
    case ErrorKind::corruption:
      throw CorruptionError(what);
    case ErrorKind::deadlock:
      throw DeadlockError(what);
    case ErrorKind::runtime:
      break;
  }
  throw Error(ErrorKind::runtime, what);
}

}  // namespace mpbench
