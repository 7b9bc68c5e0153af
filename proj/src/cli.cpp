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

#include "mpbench/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <charconv>
#include <ostream>
#include <string_view>
#include <variant>

#include "mpbench/error.hpp"

#ifdef MPBENCH_HAVE_MPI
#include "mpbench/mpi_transport.hpp"
#endif

namespace mpbench {
namespace {

constexpr std::array<std::string_view, 5> kPythonBuffers = {"numpy", "cupy", "pycuda", "numba",
                                                            "bytearray"};

std::string valid_benchmark_names() {
  std::string out;
  for (auto b : all_benchmarks()) {
    if (!out.empty()) out += ", ";
    out += name_of(b);
  }
  return out;
}

std::uint64_t parse_seed(std::string_view text, std::string_view origin) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size() || text.empty()) {
    throw UsageError(fmt::format("{} '{}' is not a non-negative integer", origin, text));
  }
  return v;
}

std::string row_size(std::size_t size) { return fmt::format("{:<12}", size); }

}  // namespace

std::string_view name_of(Transport t) noexcept { return t == Transport::sim ? "sim" : "mpi"; }

bool mpi_transport_available() noexcept {
#ifdef MPBENCH_HAVE_MPI
  return true;
#else
  return false;
#endif
}

CliArgs parse_args(const std::vector<std::string>& args,
                   const std::optional<std::string>& env_seed) {
  CLI::App app{"Message-passing micro-benchmarks over a simulated or MPI transport", "mpbench"};
  BenchConfig cfg;
  CliArgs out;

  std::string benchmark;
  std::string device = "cpu";
  std::string buffer = "direct";
  std::string transport = "sim";
  std::optional<int> np;
  std::optional<std::uint64_t> seed;
  std::string dataset;

  app.add_option("--benchmark", benchmark, "Benchmark to run")->required();
  app.add_option("--device", device, "cpu (gpu is not supported in this build)");
  app.add_option("--buffer", buffer, "direct or serialized");
  app.add_option("--lower-limit", cfg.sweep.lower_limit, "Smallest message size in bytes");
  app.add_option("--upper-limit", cfg.sweep.upper_limit, "Largest message size in bytes");
  app.add_option("--iterations", cfg.iterations, "Timed iterations per size");
  app.add_option("--warm-up", cfg.warmup, "Untimed iterations per size");
  app.add_option("--np", np, "Number of ranks (default 2, collectives 4)");
  app.add_option("--alpha", cfg.channel.alpha, "Per-message latency, us");
  app.add_option("--beta", cfg.channel.beta, "Per-byte transfer cost, us/B");
  app.add_option("--sigma", cfg.channel.sigma, "Per-byte serialization cost, us/B");
  app.add_option("--seed", seed, "Seed for generated data (overrides MPBENCH_SEED)");
  app.add_option("--transport", transport, "sim or mpi");
  app.add_option("--dataset", dataset, "CSV dataset for knn and kmeans_sweep");
  app.add_option("--window", cfg.window, "Messages per bw/bibw window");
  app.add_option("--us-per-flop", cfg.ml.us_per_flop, "Compute cost of ML kernels, us");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out.help = true;
    out.help_text = app.help();
    return out;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  const auto bench = parse_benchmark(benchmark);
  if (!bench) {
    throw UsageError(fmt::format("unknown benchmark '{}'; valid names: {}", benchmark,
                                 valid_benchmark_names()));
  }
  cfg.benchmark = *bench;

  if (device == "gpu") {
    throw UsageError("device 'gpu' is unsupported in this build; use --device cpu");
  }
  if (device != "cpu") throw UsageError(fmt::format("unknown device '{}'; use cpu", device));

  if (std::find(kPythonBuffers.begin(), kPythonBuffers.end(), buffer) != kPythonBuffers.end()) {
    throw UsageError(fmt::format(
        "buffer '{}' is a Python buffer type; use --buffer direct or --buffer serialized", buffer));
  }
  const auto mode = parse_buffer_mode(buffer);
  if (!mode) {
    throw UsageError(fmt::format("unknown buffer '{}'; use direct or serialized", buffer));
  }
  cfg.buffer_mode = *mode;

  if (transport == "sim") {
    out.transport = Transport::sim;
  } else if (transport == "mpi") {
    out.transport = Transport::mpi;
  } else {
    throw UsageError(fmt::format("unknown transport '{}'; use sim or mpi", transport));
  }

  out.np_explicit = np.has_value();
  cfg.np = np.value_or(family_of(cfg.benchmark) == BenchFamily::collective ? 4 : 2);

  if (seed) {
    cfg.seed = *seed;
  } else if (env_seed) {
    cfg.seed = parse_seed(*env_seed, "MPBENCH_SEED");
  }

  if (!dataset.empty()) {
    if (cfg.benchmark != Benchmark::knn && cfg.benchmark != Benchmark::kmeans_sweep) {
      throw UsageError("--dataset applies only to knn and kmeans_sweep");
    }
    cfg.ml.dataset_path = dataset;
  }

  validate(cfg);
  out.config = cfg;
  return out;
}

std::string render_report(const BenchReport& report) {
  std::string text = fmt::format("# {}  np={}  buffer={}\n", name_of(report.benchmark), report.np,
                                 name_of(report.buffer_mode));
  const bool bandwidth =
      !report.records.empty() && report.records.front().metric_kind == MetricKind::bandwidth_mbps;
  text += bandwidth ? "# Size(B)  MB/s\n" : "# Size(B)  Avg  Min  Max\n";
  for (const auto& rec : report.records) {
    text += report.benchmark == Benchmark::barrier ? fmt::format("{:<12}", "-") : row_size(rec.size);
    if (rec.metric_kind == MetricKind::bandwidth_mbps) {
      text += fmt::format("  {:.2f}\n", rec.value.avg_us);
    } else {
      text += fmt::format("  {:.2f}  {:.2f}  {:.2f}\n", rec.value.avg_us, rec.value.min_us,
                          rec.value.max_us);
    }
  }
  return text;
}

std::string render_speedup(const SpeedupResult& result) {
  return fmt::format(
      "# {}  np={}\n# Sequential(us)  Distributed(us)  Speedup  Correct\n{:.2f}  {:.2f}  {:.2f}  {}\n",
      name_of(result.benchmark), result.np, result.sequential_us, result.distributed_us,
      result.speedup, result.correct ? "yes" : "no");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::optional<std::string>& env_seed) {
  try {
    const CliArgs parsed = parse_args(args, env_seed);
    if (parsed.help) {
      out << parsed.help_text;
      return 0;
    }
    const BenchConfig& cfg = parsed.config;

    if (parsed.transport == Transport::mpi) {
      if (family_of(cfg.benchmark) == BenchFamily::ml) {
        throw UsageError(fmt::format("{} runs on the simulated transport only", name_of(cfg.benchmark)));
      }
#ifdef MPBENCH_HAVE_MPI
      if (const auto report = run_over_mpi(cfg, parsed.np_explicit)) out << render_report(*report);
      return 0;
#else
      throw UsageError("transport 'mpi' is not available in this build; use --transport sim");
#endif
    }

    const BenchOutcome outcome = run_benchmark(cfg);
    if (const auto* report = std::get_if<BenchReport>(&outcome)) {
      out << render_report(*report);
      return 0;
    }
    const auto& result = std::get<SpeedupResult>(outcome);
    out << render_speedup(result);
    if (!result.correct) {
      err << "mpbench: error: distributed result differs from the sequential baseline\n";
      return 1;
    }
    return 0;
  } catch (const Error& e) {
    err << "mpbench: error: " << e.what() << '\n';
    return e.kind() == ErrorKind::config || e.kind() == ErrorKind::usage ? 2 : 1;
  } catch (const std::exception& e) {
    err << "mpbench: error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mpbench
