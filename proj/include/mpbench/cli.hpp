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

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mpbench/benches.hpp"
#include "mpbench/core.hpp"
#include "mpbench/mlbench.hpp"

namespace mpbench {

enum class Transport { sim, mpi };

std::string_view name_of(Transport t) noexcept;

struct CliArgs {
  BenchConfig config;
  Transport transport = Transport::sim;
  /// True when --np was given on the command line.
  bool np_explicit = false;
  bool help = false;
  std::string help_text;
};

/// Parses `args` (without the program name). `env_seed` is the value of
/// MPBENCH_SEED, if set; --seed takes precedence. Throws UsageError or
/// ConfigError.
CliArgs parse_args(const std::vector<std::string>& args,
                   const std::optional<std::string>& env_seed = std::nullopt);

std::string render_report(const BenchReport& report);
std::string render_speedup(const SpeedupResult& result);

/// Whole program: parse, run, render. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::optional<std::string>& env_seed = std::nullopt);

bool mpi_transport_available() noexcept;

}  // namespace mpbench
