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

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <variant>

#include "mpbench/benches.hpp"
#include "mpbench/error.hpp"

using namespace mpbench;

namespace {

BenchConfig make_cfg(Benchmark b, int np, double alpha, double beta, double sigma = 0.0) {
  BenchConfig cfg;
  cfg.benchmark = b;
  cfg.np = np;
  cfg.iterations = 20;
  cfg.warmup = 3;
  cfg.sweep = {1, 1u << 12};
  cfg.channel = {alpha, beta, sigma};
  return cfg;
}

bool rel_close(double got, double want, double tol = 1e-9) {
  if (want == 0.0) return got == 0.0;
  return std::fabs(got - want) <= tol * std::fabs(want);
}

// One ack-terminated window of w messages of n bytes on an idle link.
double window_time(const ChannelModel& ch, std::size_t w, std::size_t n) {
  return ch.alpha + static_cast<double>(w) * ch.beta * static_cast<double>(n) + ch.alpha +
         ch.beta * 4.0;
}

}  // namespace

TEST_CASE("latency equals alpha + beta * n") {
  const auto cfg = make_cfg(Benchmark::latency, 2, 1.0, 0.001);
  const auto report = run_latency(cfg);
  REQUIRE(report.records.size() == sweep_sizes(cfg.sweep).size());
  for (const auto& rec : report.records) {
    CHECK(rec.metric_kind == MetricKind::latency_us);
    CHECK(rel_close(rec.value.avg_us, 1.0 + 0.001 * static_cast<double>(rec.size)));
    CHECK(rec.value.min_us == rec.value.avg_us);
    CHECK(rec.value.max_us == rec.value.avg_us);
  }
  CHECK(rel_close(report.records[10].value.avg_us, 2.024));
}

TEST_CASE("latency on a free channel is zero") {
  for (const auto& rec : run_latency(make_cfg(Benchmark::latency, 2, 0.0, 0.0)).records) {
    CHECK(rec.value.avg_us == 0.0);
  }
}

TEST_CASE("serialized latency adds encode and decode per direction") {
  auto cfg = make_cfg(Benchmark::latency, 2, 1.0, 0.0, 0.01);
  cfg.sweep = {1000, 1000};
  cfg.buffer_mode = BufferMode::serialized;
  CHECK(rel_close(run_latency(cfg).records.at(0).value.avg_us, 21.0));
}

TEST_CASE("serialization overhead is 2 sigma n") {
  for (double sigma : {0.0, 0.01, 0.25}) {
    auto direct = make_cfg(Benchmark::latency, 2, 1.0, 0.001, sigma);
    auto serialized = direct;
    serialized.buffer_mode = BufferMode::serialized;
    const auto a = run_latency(direct);
    const auto b = run_latency(serialized);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      const double diff = b.records[i].value.avg_us - a.records[i].value.avg_us;
      const double want = 2.0 * sigma * static_cast<double>(a.records[i].size);
      if (sigma == 0.0) {
        CHECK(diff == 0.0);
      } else {
        CHECK(rel_close(diff, want, 1e-9));
      }
    }
  }
}

TEST_CASE("latency is nondecreasing in message size") {
  const auto report = run_latency(make_cfg(Benchmark::latency, 2, 0.3, 0.02, 0.001));
  for (std::size_t i = 1; i < report.records.size(); ++i) {
    CHECK(report.records[i].value.avg_us >= report.records[i - 1].value.avg_us);
  }
}

TEST_CASE("bandwidth matches the streaming formula and tends to 1/beta") {
  auto cfg = make_cfg(Benchmark::bw, 2, 0.0, 0.001);
  cfg.sweep = {1, 1u << 20};
  cfg.iterations = 5;
  cfg.warmup = 1;
  const auto report = run_bandwidth(cfg);
  REQUIRE(report.records.size() == 21);
  double previous = 0.0;
  for (const auto& rec : report.records) {
    CHECK(rec.metric_kind == MetricKind::bandwidth_mbps);
    const double want = 64.0 * static_cast<double>(rec.size) / window_time(cfg.channel, 64, rec.size);
    CHECK(rel_close(rec.value.avg_us, want, 1e-9));
    CHECK(rec.value.avg_us > previous);
    previous = rec.value.avg_us;
  }
  CHECK(report.records.back().value.avg_us == doctest::Approx(1000.0).epsilon(1e-3));
}

TEST_CASE("bandwidth with a single-message window") {
  auto cfg = make_cfg(Benchmark::bw, 2, 2.0, 0.01);
  cfg.window = 1;
  for (const auto& rec : run_bandwidth(cfg).records) {
    const double n = static_cast<double>(rec.size);
    CHECK(rel_close(rec.value.avg_us, n / (2.0 + 0.01 * n + 2.0 + 0.01 * 4.0)));
  }
}

TEST_CASE("bandwidth grows linearly with size when beta is zero") {
  const auto report = run_bandwidth(make_cfg(Benchmark::bw, 2, 1.0, 0.0));
  for (std::size_t i = 1; i < report.records.size(); ++i) {
    CHECK(rel_close(report.records[i].value.avg_us, 2.0 * report.records[i - 1].value.avg_us));
  }
}

TEST_CASE("bibw on a symmetric channel is twice bw") {
  const auto bw = run_bandwidth(make_cfg(Benchmark::bw, 2, 1.0, 0.001));
  const auto bibw = run_bibw(make_cfg(Benchmark::bibw, 2, 1.0, 0.001));
  REQUIRE(bw.records.size() == bibw.records.size());
  for (std::size_t i = 0; i < bw.records.size(); ++i) {
    CHECK(rel_close(bibw.records[i].value.avg_us, 2.0 * bw.records[i].value.avg_us, 1e-12));
  }
}

TEST_CASE("bibw with a silent reverse direction equals bw") {
  const auto bw = run_bandwidth(make_cfg(Benchmark::bw, 2, 1.0, 0.001, 0.01));
  auto cfg = make_cfg(Benchmark::bibw, 2, 1.0, 0.001, 0.01);
  const auto one_way = run_bibw(cfg, 0);
  CHECK(one_way.records == bw.records);
}

TEST_CASE("bandwidth on a free channel is a measurement error") {
  CHECK_THROWS_AS(run_bandwidth(make_cfg(Benchmark::bw, 2, 0.0, 0.0)), MeasurementError);
  CHECK_THROWS_AS(run_bibw(make_cfg(Benchmark::bibw, 2, 0.0, 0.0)), MeasurementError);
}

TEST_CASE("mult_lat") {
  SUBCASE("single pair equals latency") {
    auto lat = make_cfg(Benchmark::latency, 2, 1.0, 0.001);
    auto multi = lat;
    multi.benchmark = Benchmark::mult_lat;
    const auto a = run_mult_lat(multi);
    const auto b = run_latency(lat);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      CHECK(a.records[i].size == b.records[i].size);
      CHECK(rel_close(a.records[i].value.avg_us, b.records[i].value.avg_us, 1e-12));
      CHECK(a.records[i].value.min_us == a.records[i].value.max_us);
    }
  }
  SUBCASE("homogeneous pairs agree with the analytic value") {
    for (int np : {4, 6, 8}) {
      const auto report = run_mult_lat(make_cfg(Benchmark::mult_lat, np, 1.0, 0.001));
      for (const auto& rec : report.records) {
        CHECK(rec.value.min_us == rec.value.max_us);
        CHECK(rec.value.avg_us == rec.value.min_us);
        CHECK(rel_close(rec.value.avg_us, 1.0 + 0.001 * static_cast<double>(rec.size)));
      }
    }
  }
  SUBCASE("odd rank count is rejected") {
    CHECK_THROWS_AS(run_mult_lat(make_cfg(Benchmark::mult_lat, 3, 1.0, 0.0)), ConfigError);
  }
}

TEST_CASE("weighted counts for vector variants") {
  CHECK(weighted_counts(10, 3) == std::vector<std::size_t>{2, 3, 5});
  CHECK(weighted_counts(1, 4) == std::vector<std::size_t>{1, 0, 0, 0});
  for (std::size_t size : {1u, 7u, 100u, 4096u}) {
    for (int p = 2; p <= 9; ++p) {
      const auto c = weighted_counts(size, p);
      CHECK(std::accumulate(c.begin(), c.end(), std::size_t{0}) == size);
    }
  }
}

TEST_CASE("collective benchmarks") {
  SUBCASE("barrier is one round at P = 2") {
    const auto report = run_collective(make_cfg(Benchmark::barrier, 2, 1.0, 0.0));
    REQUIRE(report.records.size() == 1);
    CHECK(report.records[0].size == 0);
    CHECK(report.records[0].value == SampleStats{1.0, 1.0, 1.0});
  }
  SUBCASE("barrier rounds scale with log2 P") {
    const auto report = run_collective(make_cfg(Benchmark::barrier, 5, 1.0, 0.0));
    CHECK(report.records[0].value == SampleStats{3.0, 3.0, 3.0});
  }
  SUBCASE("bcast at P = 2 costs one message at the non-root") {
    const auto report = run_collective(make_cfg(Benchmark::bcast, 2, 1.0, 0.001));
    for (const auto& rec : report.records) {
      const double one_way = 1.0 + 0.001 * static_cast<double>(rec.size);
      CHECK(rel_close(rec.value.max_us, one_way));
      CHECK(rec.value.min_us == 0.0);
      CHECK(rel_close(rec.value.avg_us, one_way / 2.0));
    }
  }
  SUBCASE("symmetric algorithms report min == max") {
    for (auto b : {Benchmark::allgather, Benchmark::alltoall, Benchmark::barrier}) {
      for (const auto& rec : run_collective(make_cfg(b, 6, 1.0, 0.001)).records) {
        CHECK(rec.value.min_us == rec.value.max_us);
      }
    }
  }
  SUBCASE("every collective emits one ordered record per size") {
    for (auto b : all_benchmarks()) {
      if (family_of(b) != BenchFamily::collective) continue;
      CAPTURE(name_of(b));
      auto cfg = make_cfg(b, 3, 1.0, 0.001, 0.01);
      cfg.sweep = {3, 200};
      const auto report = run_collective(cfg);
      const auto sizes = sweep_sizes(cfg.sweep);
      if (b == Benchmark::barrier) {
        CHECK(report.records.size() == 1);
      } else {
        REQUIRE(report.records.size() == sizes.size());
        for (std::size_t i = 0; i < sizes.size(); ++i) CHECK(report.records[i].size == sizes[i]);
      }
      for (const auto& rec : report.records) {
        CHECK(rec.value.min_us <= rec.value.avg_us);
        CHECK(rec.value.avg_us <= rec.value.max_us);
        CHECK(rec.value.min_us >= 0.0);
        CHECK(std::isfinite(rec.value.max_us));
      }
    }
  }
  SUBCASE("wrong driver is a configuration error") {
    CHECK_THROWS_AS(run_collective(make_cfg(Benchmark::latency, 2, 1.0, 0.0)), ConfigError);
    CHECK_THROWS_AS(run_latency(make_cfg(Benchmark::bw, 2, 1.0, 0.0)), ConfigError);
    CHECK_THROWS_AS(run_latency(make_cfg(Benchmark::latency, 3, 1.0, 0.0)), ConfigError);
  }
}

TEST_CASE("warm-up count does not change reports") {
  // Dyadic parameters keep every clock value exact.
  for (auto b : all_benchmarks()) {
    if (family_of(b) == BenchFamily::ml) continue;
    CAPTURE(name_of(b));
    const int np = family_of(b) == BenchFamily::collective || b == Benchmark::mult_lat ? 4 : 2;
    auto cold = make_cfg(b, np, 1.0, 0x1p-10, 0x1p-7);
    cold.buffer_mode = BufferMode::serialized;
    cold.sweep = {1, 1024};
    cold.iterations = 4;
    cold.warmup = 0;
    auto warm = cold;
    warm.warmup = 10;
    CHECK(std::get<BenchReport>(run_benchmark(cold)) == std::get<BenchReport>(run_benchmark(warm)));
  }
}

TEST_CASE("run_benchmark routes and is deterministic") {
  const auto cfg = make_cfg(Benchmark::latency, 2, 1.0, 0.001);
  CHECK(std::get<BenchReport>(run_benchmark(cfg)) == run_latency(cfg));

  auto knn = make_cfg(Benchmark::knn, 2, 1.0, 0.001);
  knn.ml.knn_train = 60;
  knn.ml.knn_test = 20;
  knn.ml.features = 4;
  const auto outcome = run_benchmark(knn);
  REQUIRE(std::holds_alternative<SpeedupResult>(outcome));
  CHECK(std::get<SpeedupResult>(outcome).correct);

  auto coll = make_cfg(Benchmark::allreduce, 5, 0.7, 0.003, 0.01);
  coll.buffer_mode = BufferMode::serialized;
  CHECK(run_benchmark(coll) == run_benchmark(coll));
}
