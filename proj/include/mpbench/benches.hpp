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

#include <cstddef>
#include <variant>
#include <vector>

#include "mpbench/core.hpp"
#include "mpbench/mlbench.hpp"
#include "mpbench/transport.hpp"

namespace mpbench {

struct BenchReport {
  Benchmark benchmark = Benchmark::latency;
  BufferMode buffer_mode = BufferMode::direct;
  int np = 2;
  std::vector<BenchRecord> records;

  bool operator==(const BenchReport&) const = default;
};

/// Ping-pong between ranks 0 and 1; one-way latency from rank 0's clock.
BenchReport run_latency(const BenchConfig& cfg);
/// Rank 0 streams windows of cfg.window messages, rank 1 acks each window.
BenchReport run_bandwidth(const BenchConfig& cfg);
/// Both ranks stream windows at once; reports the sum of both directions.
BenchReport run_bibw(const BenchConfig& cfg);
/// run_bibw with rank 1 sending `reverse_window` messages per window instead
/// of cfg.window. A reverse window of 0 reduces to run_bandwidth.
BenchReport run_bibw(const BenchConfig& cfg, std::size_t reverse_window);
/// Concurrent ping-pong on pairs (i, i + P/2), aggregated across pairs.
BenchReport run_mult_lat(const BenchConfig& cfg);
/// Any blocking collective or vector variant, including barrier.
BenchReport run_collective(const BenchConfig& cfg);

/// One rank's share of a communication benchmark. The report is complete on
/// rank 0 and empty elsewhere. Works over any Communicator.
BenchReport run_on_rank(Communicator& comm, const BenchConfig& cfg);

/// Counts per rank for vector-variant benchmarks: rank i gets
/// floor(size * (i + 1) / (P (P + 1) / 2)) bytes, the remainder goes to rank 0.
std::vector<std::size_t> weighted_counts(std::size_t size, int np);

using BenchOutcome = std::variant<BenchReport, SpeedupResult>;

/// Validates `cfg` and routes it to the matching driver on the simulated
/// transport.
BenchOutcome run_benchmark(const BenchConfig& cfg);

}  // namespace mpbench
