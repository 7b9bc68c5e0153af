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

#include <algorithm>
#include <fstream>
#include <sstream>

#include "mpbench/cli.hpp"
#include "mpbench/error.hpp"

using namespace mpbench;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args,
        const std::optional<std::string>& env_seed = std::nullopt) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err, env_seed);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const std::vector<std::string> kCommunicationNames = {
    "latency", "bw",     "bibw",    "mult_lat",       "allgather", "allreduce",
    "alltoall", "barrier", "bcast", "gather",         "reduce_scatter", "reduce",
    "scatter", "alltoallv", "allgatherv", "scatterv", "gatherv"};

}  // namespace

TEST_CASE("defaults") {
  const auto args = parse_args({"--benchmark", "latency"});
  const BenchConfig& c = args.config;
  CHECK(c.benchmark == Benchmark::latency);
  CHECK(c.iterations == 1000);
  CHECK(c.warmup == 100);
  CHECK(c.sweep.lower_limit == 1);
  CHECK(c.sweep.upper_limit == (1u << 20));
  CHECK(c.np == 2);
  CHECK(c.buffer_mode == BufferMode::direct);
  CHECK(c.channel == ChannelModel{1.0, 0.001, 0.01});
  CHECK(c.seed == 0);
  CHECK(args.transport == Transport::sim);
  CHECK_FALSE(args.np_explicit);

  CHECK(parse_args({"--benchmark", "allreduce"}).config.np == 4);
  CHECK(parse_args({"--benchmark", "barrier"}).config.np == 4);
  CHECK(parse_args({"--benchmark", "matmul"}).config.np == 2);
}

TEST_CASE("flag mapping") {
  const auto args = parse_args({"--benchmark", "allreduce", "--np", "8", "--lower-limit", "4",
                                "--upper-limit", "64"});
  CHECK(args.config.np == 8);
  CHECK(args.np_explicit);
  CHECK(sweep_sizes(args.config.sweep) == std::vector<std::size_t>{4, 8, 16, 32, 64});

  const auto more = parse_args({"--benchmark=bw", "--buffer", "serialized", "--iterations", "7",
                                "--warm-up", "0", "--alpha", "0.5", "--beta", "0.25", "--sigma",
                                "0", "--window", "8", "--device", "cpu"});
  CHECK(more.config.buffer_mode == BufferMode::serialized);
  CHECK(more.config.iterations == 7);
  CHECK(more.config.warmup == 0);
  CHECK(more.config.channel == ChannelModel{0.5, 0.25, 0.0});
  CHECK(more.config.window == 8);
}

TEST_CASE("seed precedence") {
  CHECK(parse_args({"--benchmark", "knn"}).config.seed == 0);
  CHECK(parse_args({"--benchmark", "knn"}, "17").config.seed == 17);
  CHECK(parse_args({"--benchmark", "knn", "--seed", "3"}, "17").config.seed == 3);
  CHECK_THROWS_AS(parse_args({"--benchmark", "knn"}, "abc"), UsageError);
}

TEST_CASE("rejected arguments") {
  CHECK_THROWS_WITH_AS(parse_args({"--benchmark", "latenzy"}), doctest::Contains("allgatherv"),
                       UsageError);
  CHECK_THROWS_WITH_AS(parse_args({"--benchmark", "latency", "--device", "gpu"}),
                       doctest::Contains("unsupported in this build"), UsageError);
  for (const char* py : {"numpy", "cupy", "pycuda", "numba", "bytearray"}) {
    CHECK_THROWS_WITH_AS(parse_args({"--benchmark", "latency", "--buffer", py}),
                         doctest::Contains("direct or --buffer serialized"), UsageError);
  }
  CHECK_THROWS_AS(parse_args({"--benchmark", "latency", "--buffer", "shm"}), UsageError);
  CHECK_THROWS_AS(parse_args({"--benchmark", "latency", "--transport", "tcp"}), UsageError);
  CHECK_THROWS_AS(parse_args({"--benchmark", "latency", "--dataset", "x.csv"}), UsageError);
  CHECK_THROWS_AS(parse_args({"--benchmark", "latency", "--iterations", "lots"}), UsageError);
  CHECK_THROWS_AS(parse_args({}), UsageError);
  CHECK_THROWS_WITH_AS(parse_args({"--benchmark", "latency", "--np", "3"}),
                       doctest::Contains("np = 2"), ConfigError);
  CHECK_THROWS_AS(parse_args({"--benchmark", "latency", "--lower-limit", "0"}), ConfigError);
  CHECK_THROWS_AS(parse_args({"--benchmark", "latency", "--beta", "-1"}), ConfigError);
}

TEST_CASE("exit codes") {
  SUBCASE("success") {
    const auto r = run({"--benchmark", "latency", "--iterations", "2", "--upper-limit", "8"});
    CHECK(r.code == 0);
    CHECK(r.err.empty());
  }
  SUBCASE("usage") {
    const auto r = run({"--benchmark", "latenzy"});
    CHECK(r.code == 2);
    CHECK(r.out.empty());
    CHECK(r.err.find("valid names") != std::string::npos);
  }
  SUBCASE("constraint") {
    const auto r = run({"--benchmark", "latency", "--np", "3"});
    CHECK(r.code == 2);
    CHECK(r.err.find("np = 2") != std::string::npos);
  }
  SUBCASE("gpu") {
    CHECK(run({"--benchmark", "bw", "--device", "gpu"}).code == 2);
  }
  SUBCASE("runtime measurement failure") {
    const auto r = run({"--benchmark", "bw", "--alpha", "0", "--beta", "0", "--sigma", "0",
                        "--iterations", "1", "--upper-limit", "4"});
    CHECK(r.code == 1);
  }
  SUBCASE("bad dataset is a configuration error") {
    CHECK(run({"--benchmark", "knn", "--dataset", "/nonexistent/d.csv"}).code == 2);
  }
  SUBCASE("help") {
    const auto r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("--benchmark") != std::string::npos);
  }
  SUBCASE("mpi transport without the adapter") {
    if (!mpi_transport_available()) {
      CHECK(run({"--benchmark", "latency", "--transport", "mpi"}).code == 2);
    }
    CHECK(run({"--benchmark", "matmul", "--transport", "mpi"}).code == 2);
  }
}

TEST_CASE("render format") {
  BenchReport lat;
  lat.benchmark = Benchmark::latency;
  lat.records = {{1024, MetricKind::latency_us, {2.024, 2.024, 2.024}}};
  CHECK(render_report(lat) ==
        "# latency  np=2  buffer=direct\n# Size(B)  Avg  Min  Max\n1024          2.02  2.02  2.02\n");

  BenchReport bw;
  bw.benchmark = Benchmark::bw;
  bw.buffer_mode = BufferMode::serialized;
  bw.records = {{65536, MetricKind::bandwidth_mbps, {2048.0, 2048.0, 2048.0}}};
  CHECK(render_report(bw) ==
        "# bw  np=2  buffer=serialized\n# Size(B)  MB/s\n65536         2048.00\n");

  BenchReport barrier;
  barrier.benchmark = Benchmark::barrier;
  barrier.np = 4;
  barrier.records = {{0, MetricKind::latency_us, {2.0, 1.5, 2.5}}};
  CHECK(render_report(barrier) ==
        "# barrier  np=4  buffer=direct\n# Size(B)  Avg  Min  Max\n-             2.00  1.50  2.50\n");

  SpeedupResult s;
  s.benchmark = Benchmark::matmul;
  s.np = 4;
  s.sequential_us = 196.608;
  s.distributed_us = 49.152;
  s.speedup = 4.0;
  s.correct = true;
  CHECK(render_speedup(s) ==
        "# matmul  np=4\n# Sequential(us)  Distributed(us)  Speedup  Correct\n196.61  49.15  4.00  yes\n");
}

TEST_CASE("golden latency tables") {
  const auto direct = run({"--benchmark", "latency", "--iterations", "10", "--warm-up", "2",
                           "--lower-limit", "1", "--upper-limit", "65536", "--sigma", "0.25"});
  CHECK(direct.code == 0);
  CHECK(direct.out == slurp(MPBENCH_GOLDEN_DIR "/latency_direct.txt"));

  const auto serialized = run({"--benchmark", "latency", "--iterations", "10", "--warm-up", "2",
                               "--lower-limit", "1", "--upper-limit", "65536", "--buffer",
                               "serialized"});
  CHECK(serialized.code == 0);
  CHECK(serialized.out == slurp(MPBENCH_GOLDEN_DIR "/latency_serialized.txt"));
}

TEST_CASE("every communication benchmark parses and runs") {
  for (const auto& name : kCommunicationNames) {
    CAPTURE(name);
    const auto r = run({"--benchmark", name, "--iterations", "3", "--warm-up", "1",
                        "--upper-limit", "256", "--np", name == "latency" || name == "bw" || name == "bibw" ? "2" : "4"});
    CHECK(r.code == 0);
    CHECK(r.err.empty());
    const auto rows = static_cast<std::size_t>(std::count(r.out.begin(), r.out.end(), '\n')) - 2;
    CHECK(rows == (name == "barrier" ? 1u : 9u));
    CHECK(r.out.rfind("# " + name + "  np=", 0) == 0);
  }
}

TEST_CASE("ml benchmarks through the cli") {
  for (const char* name : {"knn", "kmeans_sweep", "matmul"}) {
    CAPTURE(name);
    const auto r = run({"--benchmark", name, "--np", "3"});
    CHECK(r.code == 0);
    CHECK(r.out.find("yes\n") != std::string::npos);
  }
}

TEST_CASE("identical argv gives identical bytes") {
  const std::vector<std::string> args = {"--benchmark", "alltoallv", "--np", "5", "--buffer",
                                         "serialized", "--iterations", "4", "--upper-limit", "512"};
  const auto first = run(args);
  CHECK(first.code == 0);
  CHECK(run(args).out == first.out);
  CHECK(run(args).out == first.out);
}
