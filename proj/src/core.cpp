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

#include "mpbench/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include <fmt/format.h>

#include "mpbench/error.hpp"

namespace mpbench {
namespace {

constexpr std::array<std::pair<Benchmark, std::string_view>, 20> kBenchmarkNames{{
    {Benchmark::latency, "latency"},
    {Benchmark::bw, "bw"},
    {Benchmark::bibw, "bibw"},
    {Benchmark::mult_lat, "mult_lat"},
    {Benchmark::allgather, "allgather"},
    {Benchmark::allreduce, "allreduce"},
    {Benchmark::alltoall, "alltoall"},
    {Benchmark::barrier, "barrier"},
    {Benchmark::bcast, "bcast"},
    {Benchmark::gather, "gather"},
    {Benchmark::reduce_scatter, "reduce_scatter"},
    {Benchmark::reduce, "reduce"},
    {Benchmark::scatter, "scatter"},
    {Benchmark::allgatherv, "allgatherv"},
    {Benchmark::alltoallv, "alltoallv"},
    {Benchmark::gatherv, "gatherv"},
    {Benchmark::scatterv, "scatterv"},
    {Benchmark::knn, "knn"},
    {Benchmark::kmeans_sweep, "kmeans_sweep"},
    {Benchmark::matmul, "matmul"},
}};

constexpr auto kAllBenchmarks = [] {
  std::array<Benchmark, kBenchmarkNames.size()> out{};
  for (std::size_t i = 0; i < kBenchmarkNames.size(); ++i) {
    out[i] = kBenchmarkNames[i].first;
  }
  return out;
}();

}  // namespace

std::string_view name_of(Benchmark b) noexcept {
  for (const auto& [id, name] : kBenchmarkNames) {
    if (id == b) return name;
  }
  return "?";
}

std::optional<Benchmark> parse_benchmark(std::string_view name) noexcept {
  for (const auto& [id, n] : kBenchmarkNames) {
    if (n == name) return id;
  }
  return std::nullopt;
}

std::span<const Benchmark> all_benchmarks() noexcept { return kAllBenchmarks; }

BenchFamily family_of(Benchmark b) noexcept {
  switch (b) {
    case Benchmark::latency:
    case Benchmark::bw:
    case Benchmark::bibw:
    case Benchmark::mult_lat:
      return BenchFamily::point_to_point;
    case Benchmark::knn:
    case Benchmark::kmeans_sweep:
    case Benchmark::matmul:
      return BenchFamily::ml;
    default:
      return BenchFamily::collective;
  }
}

std::string_view name_of(BufferMode mode) noexcept {
  return mode == BufferMode::direct ? "direct" : "serialized";
}

std::optional<BufferMode> parse_buffer_mode(std::string_view name) noexcept {
  if (name == "direct") return BufferMode::direct;
  if (name == "serialized") return BufferMode::serialized;
  return std::nullopt;
}

std::vector<std::size_t> sweep_sizes(const MessageSizeSweep& sweep) {
  if (sweep.lower_limit < 1) {
    throw ConfigError("lower limit must be at least 1 byte");
  }
  if (sweep.upper_limit < sweep.lower_limit) {
    throw ConfigError(fmt::format("upper limit {} is below lower limit {}",
                                  sweep.upper_limit, sweep.lower_limit));
  }
  std::vector<std::size_t> sizes;
  for (std::size_t s = sweep.lower_limit; s <= sweep.upper_limit; s *= 2) {
    sizes.push_back(s);
    if (s > std::numeric_limits<std::size_t>::max() / 2) break;
  }
  return sizes;
}

SampleStats summarize(std::span<const double> samples) {
  if (samples.empty()) {
    throw ConfigError("cannot summarize an empty sample list");
  }
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  const double sum = std::accumulate(samples.begin(), samples.end(), 0.0);
  const double avg = sum / static_cast<double>(samples.size());
  // Rounding in the mean can land a hair outside [min, max].
  return {std::clamp(avg, *lo, *hi), *lo, *hi};
}

double bandwidth_mbps(double total_bytes, double elapsed_us) {
  if (!(elapsed_us > 0.0)) {
    throw MeasurementError(
        fmt::format("elapsed time must be positive, got {} us", elapsed_us));
  }
  return total_bytes / elapsed_us;
}

void validate(const ChannelModel& channel) {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ConfigError(
          fmt::format("channel {} must be finite and nonnegative, got {}", name, v));
    }
  };
  check(channel.alpha, "alpha");
  check(channel.beta, "beta");
  check(channel.sigma, "sigma");
}

void validate(const BenchConfig& cfg) {
  const auto name = name_of(cfg.benchmark);
  switch (cfg.benchmark) {
    case Benchmark::latency:
    case Benchmark::bw:
    case Benchmark::bibw:
      if (cfg.np != 2) {
        throw ConfigError(fmt::format("{} requires np = 2, got np = {}", name, cfg.np));
      }
      break;
    case Benchmark::mult_lat:
      if (cfg.np < 2 || cfg.np % 2 != 0) {
        throw ConfigError(
            fmt::format("mult_lat requires an even np >= 2, got np = {}", cfg.np));
      }
      break;
    default:
      if (family_of(cfg.benchmark) == BenchFamily::ml) {
        if (cfg.np < 1) {
          throw ConfigError(fmt::format("{} requires np >= 1, got np = {}", name, cfg.np));
        }
      } else if (cfg.np < 2) {
        throw ConfigError(fmt::format("{} requires np >= 2, got np = {}", name, cfg.np));
      }
      break;
  }
  if (cfg.iterations < 1) {
    throw ConfigError("iterations must be at least 1");
  }
  if ((cfg.benchmark == Benchmark::bw || cfg.benchmark == Benchmark::bibw) &&
      cfg.window < 1) {
    throw ConfigError("bandwidth window must be at least 1 message");
  }
  validate(cfg.channel);
  sweep_sizes(cfg.sweep);
  if (family_of(cfg.benchmark) == BenchFamily::ml && !(cfg.ml.us_per_flop >= 0.0 &&
                                                       std::isfinite(cfg.ml.us_per_flop))) {
    throw ConfigError("per-flop cost must be finite and nonnegative");
  }
}

}  // namespace mpbench
