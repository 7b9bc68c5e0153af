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

#include "mpbench/benches.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "mpbench/collectives.hpp"
#include "mpbench/error.hpp"

namespace mpbench {
namespace {

constexpr Tag kDataTag = 1;
constexpr Tag kAckTag = 2;
constexpr std::size_t kAckBytes = 4;
constexpr ReduceOp kSum{ReduceKind::sum, ElementType::float64};

// Benchmark payloads go through the selected buffer path; control messages
// (acks, barriers, aggregation) never do.
class MessagePath {
 public:
  MessagePath(Communicator& comm, BufferMode mode) : comm_(comm), mode_(mode) {}

  void send(int dst, std::span<const std::byte> payload) {
    if (mode_ == BufferMode::serialized) {
      comm_.send(dst, kDataTag, encode_payload(comm_, payload));
    } else {
      comm_.send(dst, kDataTag, payload);
    }
  }

  Bytes recv(int src) {
    Bytes got = comm_.recv(src, kDataTag);
    if (mode_ == BufferMode::serialized) return decode_payload(comm_, got);
    return got;
  }

 private:
  Communicator& comm_;
  BufferMode mode_;
};

Bytes fill(std::size_t n) { return Bytes(n, std::byte{'a'}); }

Bytes fill_doubles(std::size_t count) {
  Bytes out(count * sizeof(double));
  const double one = 1.0;
  for (std::size_t i = 0; i < count; ++i) std::memcpy(out.data() + i * sizeof(double), &one, sizeof(double));
  return out;
}

BenchReport empty_report(const Communicator& comm, const BenchConfig& cfg) {
  BenchReport report;
  report.benchmark = cfg.benchmark;
  report.buffer_mode = cfg.buffer_mode;
  report.np = comm.size();
  return report;
}

BenchRecord latency_record(std::size_t size, const SampleStats& stats) {
  return {size, MetricKind::latency_us, stats};
}

BenchRecord bandwidth_record(std::size_t size, double mbps) {
  return {size, MetricKind::bandwidth_mbps, {mbps, mbps, mbps}};
}

// Starts every size from a common time so records do not depend on what ran
// before them.
void synchronize(Communicator& comm) {
  barrier(comm);
  comm.align_clocks();
}

// Blocking ping-pong with `peer`. The initiator returns the one-way latency
// over the timed iterations; the responder returns 0.
double ping_pong(Communicator& comm, MessagePath& path, int peer, bool initiator,
                 std::size_t size, std::size_t warmup, std::size_t iterations) {
  const Bytes s_buf = fill(size);
  auto round_trip = [&] {
    if (initiator) {
      path.send(peer, s_buf);
      path.recv(peer);
    } else {
      path.recv(peer);
      path.send(peer, s_buf);
    }
  };
  for (std::size_t i = 0; i < warmup; ++i) round_trip();
  const double start = comm.now();
  for (std::size_t i = 0; i < iterations; ++i) round_trip();
  const double end = comm.now();
  return initiator ? (end - start) / (2.0 * static_cast<double>(iterations)) : 0.0;
}

// Cross-rank min/avg/max of `local`, summed over `contributors` ranks. Ranks
// with contributes == false are neutral. Result is meaningful at rank 0.
SampleStats aggregate(Communicator& comm, double local, bool contributes, int contributors) {
  auto one = [&](ReduceKind kind, double v) {
    Bytes in(sizeof(double));
    std::memcpy(in.data(), &v, sizeof v);
    const Bytes out = reduce(comm, in, {kind, ElementType::float64}, 0);
    double r = 0.0;
    if (!out.empty()) std::memcpy(&r, out.data(), sizeof r);
    return r;
  };
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double sum = one(ReduceKind::sum, contributes ? local : 0.0);
  const double lo = one(ReduceKind::min, contributes ? local : inf);
  const double hi = one(ReduceKind::max, contributes ? local : -inf);
  if (comm.rank() != 0) return {};
  const double avg = sum / static_cast<double>(contributors);
  return {std::clamp(avg, lo, hi), lo, hi};
}

BenchReport latency_on_rank(Communicator& comm, const BenchConfig& cfg) {
  BenchReport report = empty_report(comm, cfg);
  MessagePath path(comm, cfg.buffer_mode);
  const bool initiator = comm.rank() == 0;
  for (std::size_t size : sweep_sizes(cfg.sweep)) {
    synchronize(comm);
    const double lat =
        ping_pong(comm, path, 1 - comm.rank(), initiator, size, cfg.warmup, cfg.iterations);
    if (initiator) report.records.push_back(latency_record(size, {lat, lat, lat}));
  }
  return report;
}

BenchReport mult_lat_on_rank(Communicator& comm, const BenchConfig& cfg) {
  BenchReport report = empty_report(comm, cfg);
  MessagePath path(comm, cfg.buffer_mode);
  const int half = comm.size() / 2;
  const bool initiator = comm.rank() < half;
  const int peer = initiator ? comm.rank() + half : comm.rank() - half;
  for (std::size_t size : sweep_sizes(cfg.sweep)) {
    synchronize(comm);
    const double lat = ping_pong(comm, path, peer, initiator, size, cfg.warmup, cfg.iterations);
    const auto stats = aggregate(comm, lat, initiator, half);
    if (comm.rank() == 0) report.records.push_back(latency_record(size, stats));
  }
  return report;
}

// One window round: send `send_count` messages, take `recv_count` from the
// peer, then exchange acks. With recv_count == 0 on one side and send_count
// == 0 on the other this is the one-way streaming protocol.
void window_round(Communicator& comm, MessagePath& path, int peer, const Bytes& s_buf,
                  std::size_t send_count, std::size_t recv_count, bool send_ack,
                  bool wait_ack) {
  for (std::size_t i = 0; i < send_count; ++i) path.send(peer, s_buf);
  for (std::size_t i = 0; i < recv_count; ++i) path.recv(peer);
  if (send_ack) comm.send(peer, kAckTag, Bytes(kAckBytes));
  if (wait_ack) comm.recv(peer, kAckTag);
}

BenchReport bandwidth_on_rank(Communicator& comm, const BenchConfig& cfg) {
  BenchReport report = empty_report(comm, cfg);
  MessagePath path(comm, cfg.buffer_mode);
  const bool sender = comm.rank() == 0;
  const int peer = 1 - comm.rank();
  const std::size_t w = cfg.window;
  for (std::size_t size : sweep_sizes(cfg.sweep)) {
    const Bytes s_buf = fill(size);
    auto round = [&] {
      if (sender) {
        window_round(comm, path, peer, s_buf, w, 0, false, true);
      } else {
        window_round(comm, path, peer, s_buf, 0, w, true, false);
      }
    };
    synchronize(comm);
    for (std::size_t i = 0; i < cfg.warmup; ++i) round();
    const double start = comm.now();
    for (std::size_t i = 0; i < cfg.iterations; ++i) round();
    const double elapsed = comm.now() - start;
    if (sender) {
      const double bytes = static_cast<double>(w * cfg.iterations * size);
      report.records.push_back(bandwidth_record(size, bandwidth_mbps(bytes, elapsed)));
    }
  }
  return report;
}

BenchReport bibw_on_rank(Communicator& comm, const BenchConfig& cfg, std::size_t reverse_window) {
  BenchReport report = empty_report(comm, cfg);
  MessagePath path(comm, cfg.buffer_mode);
  const int peer = 1 - comm.rank();
  const std::size_t w_self = comm.rank() == 0 ? cfg.window : reverse_window;
  const std::size_t w_peer = comm.rank() == 0 ? reverse_window : cfg.window;
  for (std::size_t size : sweep_sizes(cfg.sweep)) {
    const Bytes s_buf = fill(size);
    auto round = [&] { window_round(comm, path, peer, s_buf, w_self, w_peer, true, true); };
    synchronize(comm);
    for (std::size_t i = 0; i < cfg.warmup; ++i) round();
    const double start = comm.now();
    for (std::size_t i = 0; i < cfg.iterations; ++i) round();
    const double elapsed = comm.now() - start;
    if (comm.rank() == 0) {
      const double bytes = static_cast<double>((cfg.window + reverse_window) * cfg.iterations * size);
      report.records.push_back(bandwidth_record(size, bandwidth_mbps(bytes, elapsed)));
    }
  }
  return report;
}

// Builds the operation timed for one message size.
std::function<void()> collective_op(Communicator& comm, Benchmark b, std::size_t size) {
  const int p = comm.size();
  const auto pu = static_cast<std::size_t>(p);

  const std::size_t elements = std::max<std::size_t>(1, size / sizeof(double));

  switch (b) {
    case Benchmark::barrier:
      return [&comm] { barrier(comm); };
    case Benchmark::bcast:
      return [&comm, buf = fill(size)]() mutable { bcast(comm, buf, 0); };
    case Benchmark::gather:
      return [&comm, buf = fill(size)] { gather(comm, buf, 0); };
    case Benchmark::scatter: {
      std::vector<Bytes> chunks;
      if (comm.rank() == 0) chunks.assign(pu, fill(size));
      return [&comm, chunks = std::move(chunks)] { scatter(comm, chunks, 0); };
    }
    case Benchmark::allgather:
      return [&comm, buf = fill(size)] { allgather(comm, buf); };
    case Benchmark::alltoall:
      return [&comm, chunks = std::vector<Bytes>(pu, fill(size))] { alltoall(comm, chunks); };
    case Benchmark::reduce:
      return [&comm, buf = fill_doubles(elements)] { reduce(comm, buf, kSum, 0); };
    case Benchmark::allreduce:
      return [&comm, buf = fill_doubles(elements)] { allreduce(comm, buf, kSum); };
    case Benchmark::reduce_scatter: {
      std::vector<std::size_t> counts;
      for (int r = 0; r < p; ++r) counts.push_back(split_rows(elements, p, r).size());
      return [&comm, buf = fill_doubles(elements), counts = std::move(counts)] {
        reduce_scatter(comm, buf, kSum, counts);
      };
    }
    case Benchmark::gatherv: {
      auto layout = VectorLayout::packed(weighted_counts(size, p));
      return [&comm, buf = fill(layout.bytes(comm.rank())), layout = std::move(layout)] {
        gatherv(comm, buf, layout, 0);
      };
    }
    case Benchmark::scatterv: {
      auto layout = VectorLayout::packed(weighted_counts(size, p));
      Bytes buf = comm.rank() == 0 ? fill(layout.extent_bytes()) : Bytes{};
      return [&comm, buf = std::move(buf), layout = std::move(layout)] {
        scatterv(comm, buf, layout, 0);
      };
    }
    case Benchmark::allgatherv: {
      auto layout = VectorLayout::packed(weighted_counts(size, p));
      return [&comm, buf = fill(layout.bytes(comm.rank())), layout = std::move(layout)] {
        allgatherv(comm, buf, layout);
      };
    }
    case Benchmark::alltoallv: {
      // Every rank sends count[j] bytes to rank j, so rank j receives
      // count[j] bytes from each source.
      const auto counts = weighted_counts(size, p);
      auto send_layout = VectorLayout::packed(counts);
      auto recv_layout =
          VectorLayout::packed(std::vector<std::size_t>(pu, counts[static_cast<std::size_t>(comm.rank())]));
      return [&comm, buf = fill(send_layout.extent_bytes()), send_layout = std::move(send_layout),
              recv_layout = std::move(recv_layout)] {
        alltoallv(comm, buf, send_layout, recv_layout);
      };
    }
    default:
      throw ConfigError(fmt::format("{} is not a collective benchmark", name_of(b)));
  }
}

BenchReport collective_on_rank(Communicator& comm, const BenchConfig& cfg) {
  BenchReport report = empty_report(comm, cfg);
  // Barrier ignores the sweep and reports a single size-less record.
  const std::vector<std::size_t> sizes =
      cfg.benchmark == Benchmark::barrier ? std::vector<std::size_t>{0} : sweep_sizes(cfg.sweep);
  for (std::size_t size : sizes) {
    const auto op = collective_op(comm, cfg.benchmark, size);
    synchronize(comm);
    for (std::size_t i = 0; i < cfg.warmup; ++i) {
      comm.align_clocks();
      op();
    }
    double total = 0.0;
    for (std::size_t i = 0; i < cfg.iterations; ++i) {
      comm.align_clocks();
      const double start = comm.now();
      op();
      total += comm.now() - start;
    }
    const double local = total / static_cast<double>(cfg.iterations);
    const auto stats = aggregate(comm, local, true, comm.size());
    if (comm.rank() == 0) report.records.push_back(latency_record(size, stats));
  }
  return report;
}

BenchReport on_rank(Communicator& comm, const BenchConfig& cfg, std::size_t reverse_window) {
  switch (cfg.benchmark) {
    case Benchmark::latency:
      return latency_on_rank(comm, cfg);
    case Benchmark::bw:
      return bandwidth_on_rank(comm, cfg);
    case Benchmark::bibw:
      return bibw_on_rank(comm, cfg, reverse_window);
    case Benchmark::mult_lat:
      return mult_lat_on_rank(comm, cfg);
    default:
      if (family_of(cfg.benchmark) == BenchFamily::ml) {
        throw ConfigError(fmt::format("{} is not a communication benchmark", name_of(cfg.benchmark)));
      }
      return collective_on_rank(comm, cfg);
  }
}

BenchReport simulate(const BenchConfig& cfg, std::size_t reverse_window) {
  validate(cfg);
  return spawn_world(cfg.np, cfg.channel,
                     [&](RankContext& ctx) { return on_rank(ctx, cfg, reverse_window); })
      .front();
}

void expect(const BenchConfig& cfg, std::initializer_list<Benchmark> allowed, const char* driver) {
  if (std::find(allowed.begin(), allowed.end(), cfg.benchmark) == allowed.end()) {
    throw ConfigError(fmt::format("{} cannot run benchmark {}", driver, name_of(cfg.benchmark)));
  }
}

}  // namespace

std::vector<std::size_t> weighted_counts(std::size_t size, int np) {
  const auto p = static_cast<std::size_t>(np);
  const std::size_t weights = p * (p + 1) / 2;
  std::vector<std::size_t> counts(p);
  for (std::size_t i = 0; i < p; ++i) counts[i] = size * (i + 1) / weights;
  counts[0] += size - std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  return counts;
}

BenchReport run_on_rank(Communicator& comm, const BenchConfig& cfg) {
  return on_rank(comm, cfg, cfg.window);
}

BenchReport run_latency(const BenchConfig& cfg) {
  expect(cfg, {Benchmark::latency}, "run_latency");
  return simulate(cfg, cfg.window);
}

BenchReport run_bandwidth(const BenchConfig& cfg) {
  expect(cfg, {Benchmark::bw}, "run_bandwidth");
  return simulate(cfg, cfg.window);
}

BenchReport run_bibw(const BenchConfig& cfg) { return run_bibw(cfg, cfg.window); }

BenchReport run_bibw(const BenchConfig& cfg, std::size_t reverse_window) {
  expect(cfg, {Benchmark::bibw}, "run_bibw");
  return simulate(cfg, reverse_window);
}

BenchReport run_mult_lat(const BenchConfig& cfg) {
  expect(cfg, {Benchmark::mult_lat}, "run_mult_lat");
  return simulate(cfg, cfg.window);
}

BenchReport run_collective(const BenchConfig& cfg) {
  if (family_of(cfg.benchmark) != BenchFamily::collective) {
    throw ConfigError(fmt::format("run_collective cannot run benchmark {}", name_of(cfg.benchmark)));
  }
  return simulate(cfg, cfg.window);
}

BenchOutcome run_benchmark(const BenchConfig& cfg) {
  validate(cfg);
  switch (family_of(cfg.benchmark)) {
    case BenchFamily::ml:
      return run_ml_benchmark(cfg);
    case BenchFamily::point_to_point:
    case BenchFamily::collective:
      break;
  }
  return simulate(cfg, cfg.window);
}

}  // namespace mpbench
