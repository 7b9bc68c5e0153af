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
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "mpbench/channel.hpp"

namespace mpbench {

using Bytes = std::vector<std::byte>;
using Tag = std::uint32_t;

/// Tags with this bit set belong to collective operations.
inline constexpr Tag kReservedTagBit = Tag{1} << 31;

/// Length prefix carried by every serialized frame.
inline constexpr std::size_t kFrameHeaderBytes = 8;

/// A payload wrapped for the serialized buffer path: an 8-byte little-endian
/// length prefix followed by the payload bytes.
struct Frame {
  Bytes bytes;

  std::size_t payload_size() const noexcept {
    return bytes.size() >= kFrameHeaderBytes ? bytes.size() - kFrameHeaderBytes : 0;
  }
};

/// Rank-local handle to a message-passing transport.
///
/// Sends are eager: they enqueue and return without touching the caller's
/// clock. Receives match on (source, tag) only and are FIFO per
/// (source, destination, tag).
class Communicator {
 public:
  virtual ~Communicator() = default;

  virtual int rank() const noexcept = 0;
  virtual int size() const noexcept = 0;
  virtual const ChannelModel& channel() const noexcept = 0;

  /// Current time in microseconds. Monotone nondecreasing.
  virtual double now() const = 0;
  /// Charges `cost_us` of local work. Throws UsageError when negative.
  virtual void advance(double cost_us) = 0;
  /// Brings every rank to a common start time. All ranks must call it.
  virtual void align_clocks() = 0;

  void send(int dst, Tag tag, std::span<const std::byte> payload) {
    do_send(dst, tag, Bytes(payload.begin(), payload.end()), payload.size());
  }
  void send(int dst, Tag tag, Bytes&& payload) {
    const auto n = payload.size();
    do_send(dst, tag, std::move(payload), n);
  }
  /// The frame header is metadata; only the payload is billed by the channel.
  void send(int dst, Tag tag, const Frame& frame) {
    do_send(dst, tag, frame.bytes, frame.payload_size());
  }

  Bytes recv(int src, Tag tag) { return do_recv(src, tag); }

  /// Fresh tag in the reserved space. Every rank calls collectives in the
  /// same order, so the sequence agrees across ranks.
  Tag next_collective_tag() noexcept {
    return kReservedTagBit | (collective_seq_++ & ~kReservedTagBit);
  }

 protected:
  virtual void do_send(int dst, Tag tag, Bytes payload, std::size_t billable_bytes) = 0;
  virtual Bytes do_recv(int src, Tag tag) = 0;

 private:
  Tag collective_seq_ = 0;
};

/// Wraps `payload` in a length-prefixed frame and charges sigma per byte.
Frame encode_payload(Communicator& comm, std::span<const std::byte> payload);
/// Strips and validates the length prefix, charging sigma per payload byte.
/// Throws CorruptionError when the prefix disagrees with the frame length.
Bytes decode_payload(Communicator& comm, std::span<const std::byte> framed);

/// A message in flight inside the simulated world.
struct Envelope {
  int src = 0;
  int dst = 0;
  Tag tag = 0;
  Bytes payload;
  double depart_time = 0.0;         ///< time the message enters the link
  std::size_t billable_bytes = 0;   ///< bytes charged at beta
};

namespace sim {
class World;
}

/// Simulated rank. Time is a logical clock driven by the channel model:
///
///   depart  = max(sender clock, time the sender->receiver link is free)
///   arrival = depart + alpha + beta * n
///   receiver clock after recv = max(receiver clock, arrival)
///
/// The link stays busy for beta * n after each departure, so a burst of
/// back-to-back sends streams at 1/beta bytes per microsecond.
class RankContext final : public Communicator {
 public:
  RankContext(sim::World& world, int rank);

  int rank() const noexcept override { return rank_; }
  int size() const noexcept override;
  const ChannelModel& channel() const noexcept override;

  double now() const override { return clock_; }
  void advance(double cost_us) override;
  void align_clocks() override;

 protected:
  void do_send(int dst, Tag tag, Bytes payload, std::size_t billable_bytes) override;
  Bytes do_recv(int src, Tag tag) override;

 private:
  void check_peer(int peer, const char* what) const;

  sim::World& world_;
  int rank_;
  double clock_ = 0.0;
  std::vector<double> link_free_;
};

namespace detail {
void check_world_size(int np);
void run_world(int np, const ChannelModel& channel,
               const std::function<void(RankContext&)>& body,
               std::vector<double>* final_clocks);
}  // namespace detail

/// Runs `program(ctx)` once per rank, each on its own thread, and returns
/// the per-rank results indexed by rank.
///
/// A rank that throws aborts the world; the error is rethrown with the same
/// kind and a "rank N: " prefix. If every live rank is blocked with nothing
/// deliverable, a DeadlockError names the blocked ranks.
template <class Program>
auto spawn_world(int np, const ChannelModel& channel, Program&& program,
                 std::vector<double>* final_clocks = nullptr) {
  using Result = std::invoke_result_t<Program&, RankContext&>;
  if constexpr (std::is_void_v<Result>) {
    detail::run_world(np, channel, [&](RankContext& ctx) { program(ctx); }, final_clocks);
  } else {
    detail::check_world_size(np);
    std::vector<std::optional<Result>> slots(static_cast<std::size_t>(np));
    detail::run_world(
        np, channel,
        [&](RankContext& ctx) { slots[static_cast<std::size_t>(ctx.rank())].emplace(program(ctx)); },
        final_clocks);
    std::vector<Result> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
  }
}

}  // namespace mpbench
