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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpbench/channel.hpp"

namespace mpbench {

enum class Benchmark {
  latency,
  bw,
  bibw,
  mult_lat,
  allgather,
  allreduce,
  alltoall,
  barrier,
  bcast,
  gather,
  reduce_scatter,
  reduce,
  scatter,
  allgatherv,
  alltoallv,
  gatherv,
  scatterv,
  knn,
  kmeans_sweep,
  matmul,
};

enum class BenchFamily { point_to_point, collective, ml };

std::string_view name_of(Benchmark b) noexcept;
std::optional<Benchmark> parse_benchmark(std::string_view name) noexcept;
BenchFamily family_of(Benchmark b) noexcept;

/// All benchmarks, in declaration order.
std::span<const Benchmark> all_benchmarks() noexcept;

enum class BufferMode { direct, serialized };

std::string_view name_of(BufferMode mode) noexcept;
std::optional<BufferMode> parse_buffer_mode(std::string_view name) noexcept;

struct MessageSizeSweep {
  std::size_t lower_limit = 1;
  std::size_t upper_limit = std::size_t{1} << 20;
};

/// lower_limit * 2^k for every k that stays within upper_limit.
std::vector<std::size_t> sweep_sizes(const MessageSizeSweep& sweep);

struct SampleStats {
  double avg_us = 0.0;
  double min_us = 0.0;
  double max_us = 0.0;

  bool operator==(const SampleStats&) const = default;
};

SampleStats summarize(std::span<const double> samples);

/// MB is 10^6 bytes, so MB/s is bytes per microsecond.
double bandwidth_mbps(double total_bytes, double elapsed_us);

enum class MetricKind { latency_us, bandwidth_mbps };

struct BenchRecord {
  std::size_t size = 0;
  MetricKind metric_kind = MetricKind::latency_us;
  SampleStats value;

  bool operator==(const BenchRecord&) const = default;
};

/// Knobs for the machine-learning benchmarks. Defaults match the fixtures
/// used by the acceptance suite.
struct MlOptions {
  std::size_t knn_k = 5;
  std::size_t knn_train = 500;
  std::size_t knn_test = 100;
  std::size_t features = 20;
  std::size_t kmeans_points = 400;
  std::size_t clusters = 16;  ///< k-means sweeps k = 1..clusters
  std::size_t max_iter = 100;
  std::size_t matmul_m = 64;
  std::size_t matmul_n = 48;
  std::size_t matmul_p = 32;
  double us_per_flop = 0.001;
  std::optional<std::string> dataset_path;  ///< CSV, label in column 0
};

struct BenchConfig {
  Benchmark benchmark = Benchmark::latency;
  int np = 2;
  std::size_t iterations = 1000;
  std::size_t warmup = 100;
  MessageSizeSweep sweep;
  BufferMode buffer_mode = BufferMode::direct;
  ChannelModel channel;
  std::uint64_t seed = 0;
  std::size_t window = 64;  ///< messages per bw/bibw window
  MlOptions ml;
};

/// Throws ConfigError naming the violated constraint.
void validate(const BenchConfig& cfg);

}  // namespace mpbench
