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

#include "mpbench/transport.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <exception>
#include <map>
#include <mutex>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "mpbench/error.hpp"

namespace mpbench {

// ---------------------------------------------------------------------------
// Framing

Frame encode_payload(Communicator& comm, std::span<const std::byte> payload) {
  Frame frame;
  frame.bytes.resize(kFrameHeaderBytes + payload.size());
  auto n = static_cast<std::uint64_t>(payload.size());
  for (std::size_t i = 0; i < kFrameHeaderBytes; ++i) {
    frame.bytes[i] = static_cast<std::byte>(n & 0xffu);
    n >>= 8;
  }
  if (!payload.empty()) {
    std::memcpy(frame.bytes.data() + kFrameHeaderBytes, payload.data(), payload.size());
  }
  comm.advance(comm.channel().sigma * static_cast<double>(payload.size()));
  return frame;
}

Bytes decode_payload(Communicator& comm, std::span<const std::byte> framed) {
  if (framed.size() < kFrameHeaderBytes) {
    throw CorruptionError(
        fmt::format("frame of {} bytes is shorter than its header", framed.size()));
  }
  std::uint64_t n = 0;
  for (std::size_t i = kFrameHeaderBytes; i-- > 0;) {
    n = (n << 8) | std::to_integer<std::uint64_t>(framed[i]);
  }
  const auto body = framed.subspan(kFrameHeaderBytes);
  if (n != body.size()) {
    throw CorruptionError(
        fmt::format("frame header announces {} bytes but carries {}", n, body.size()));
  }
  comm.advance(comm.channel().sigma * static_cast<double>(body.size()));
  return Bytes(body.begin(), body.end());
}

// ---------------------------------------------------------------------------
// Simulated world

namespace sim {
namespace {

// Thrown into ranks that are blocked when the world aborts.
struct WorldAborted {};

std::string describe_tag(Tag tag) {
  if (tag & kReservedTagBit) return fmt::format("collective#{}", tag & ~kReservedTagBit);
  return fmt::format("{}", tag);
}

}  // namespace

class World {
 public:
  World(int np, const ChannelModel& channel)
      : channel_(channel), slots_(static_cast<std::size_t>(np)), running_(np) {}

  int size() const noexcept { return static_cast<int>(slots_.size()); }
  const ChannelModel& channel() const noexcept { return channel_; }

  void deliver(Envelope env) {
    std::lock_guard lock(mu_);
    if (aborted_) throw WorldAborted{};
    auto& slot = slots_[static_cast<std::size_t>(env.dst)];
    const Key key{env.src, env.tag};
    slot.inbox[key].push_back(std::move(env));
    if (slot.state == State::blocked_recv && slot.want == key) {
      slot.state = State::running;
      ++running_;
      slot.cv.notify_one();
    }
  }

  Envelope take(int rank, int src, Tag tag) {
    std::unique_lock lock(mu_);
    if (aborted_) throw WorldAborted{};
    auto& slot = slots_[static_cast<std::size_t>(rank)];
    const Key key{src, tag};
    auto it = slot.inbox.find(key);
    if (it == slot.inbox.end()) {
      slot.state = State::blocked_recv;
      slot.want = key;
      --running_;
      check_deadlock();
      slot.cv.wait(lock, [&] { return aborted_ || slot.state == State::running; });
      if (aborted_) throw WorldAborted{};
      it = slot.inbox.find(key);
    }
    Envelope env = std::move(it->second.front());
    it->second.pop_front();
    if (it->second.empty()) slot.inbox.erase(it);
    return env;
  }

  double align(int rank, double clock) {
    std::unique_lock lock(mu_);
    if (aborted_) throw WorldAborted{};
    align_max_ = std::max(align_max_, clock);
    if (++align_waiting_ == size()) {
      align_result_ = align_max_;
      align_max_ = 0.0;
      align_waiting_ = 0;
      ++align_generation_;
      for (auto& s : slots_) {
        if (s.state == State::blocked_align) {
          s.state = State::running;
          ++running_;
          s.cv.notify_one();
        }
      }
      return align_result_;
    }
    auto& slot = slots_[static_cast<std::size_t>(rank)];
    const auto generation = align_generation_;
    slot.state = State::blocked_align;
    --running_;
    check_deadlock();
    slot.cv.wait(lock, [&] { return aborted_ || align_generation_ != generation; });
    if (aborted_) throw WorldAborted{};
    return align_result_;
  }

  void finish(int rank) {
    std::lock_guard lock(mu_);
    auto& slot = slots_[static_cast<std::size_t>(rank)];
    slot.state = State::finished;
    --running_;
    ++finished_;
    check_deadlock();
  }

  void fail(int rank, ErrorKind kind, std::string what) {
    std::lock_guard lock(mu_);
    auto& slot = slots_[static_cast<std::size_t>(rank)];
    if (slot.state == State::running) --running_;
    slot.state = State::finished;
    ++finished_;
    failures_.push_back({rank, kind, std::move(what)});
    abort_locked();
  }

  void aborted_exit(int rank) {
    std::lock_guard lock(mu_);
    auto& slot = slots_[static_cast<std::size_t>(rank)];
    slot.state = State::finished;
    ++finished_;
  }

  // Called after every thread has joined.
  void raise_if_failed() const {
    if (!failures_.empty()) {
      const auto first = std::min_element(
          failures_.begin(), failures_.end(),
          [](const Failure& a, const Failure& b) { return a.rank < b.rank; });
      throw_error(first->kind, fmt::format("rank {}: {}", first->rank, first->what));
    }
    if (!deadlock_.empty()) throw DeadlockError(deadlock_);
  }

 private:
  enum class State { running, blocked_recv, blocked_align, finished };
  using Key = std::pair<int, Tag>;

  struct Slot {
    State state = State::running;
    Key want{-1, 0};
    std::condition_variable cv;
    std::map<Key, std::deque<Envelope>> inbox;
  };

  struct Failure {
    int rank;
    ErrorKind kind;
    std::string what;
  };

  // Blocked-in-recv ranks never have a deliverable message (deliver() wakes
  // them), so no running rank means no rank can make progress.
  void check_deadlock() {
    if (running_ > 0 || finished_ == size() || aborted_) return;
    std::string msg = "deadlock: no rank can make progress;";
    for (std::size_t r = 0; r < slots_.size(); ++r) {
      const auto& s = slots_[r];
      if (s.state == State::blocked_recv) {
        msg += fmt::format(" rank {} blocked in recv(src={}, tag={});", r, s.want.first,
                           describe_tag(s.want.second));
      } else if (s.state == State::blocked_align) {
        msg += fmt::format(" rank {} blocked in clock alignment;", r);
      }
    }
    msg.pop_back();
    deadlock_ = std::move(msg);
    abort_locked();
  }

  void abort_locked() {
    aborted_ = true;
    for (auto& s : slots_) s.cv.notify_all();
  }

  ChannelModel channel_;
  std::mutex mu_;
  std::vector<Slot> slots_;
  int running_;
  int finished_ = 0;
  bool aborted_ = false;
  int align_waiting_ = 0;
  double align_max_ = 0.0;
  double align_result_ = 0.0;
  std::uint64_t align_generation_ = 0;
  std::vector<Failure> failures_;
  std::string deadlock_;
};

}  // namespace sim

// ---------------------------------------------------------------------------
// RankContext

RankContext::RankContext(sim::World& world, int rank)
    : world_(world), rank_(rank), link_free_(static_cast<std::size_t>(world.size()), 0.0) {}

int RankContext::size() const noexcept { return world_.size(); }

const ChannelModel& RankContext::channel() const noexcept { return world_.channel(); }

void RankContext::advance(double cost_us) {
  if (!(cost_us >= 0.0) || !std::isfinite(cost_us)) {
    throw UsageError(fmt::format("advance() needs a finite nonnegative cost, got {}", cost_us));
  }
  clock_ += cost_us;
}

void RankContext::align_clocks() { clock_ = std::max(clock_, world_.align(rank_, clock_)); }

void RankContext::check_peer(int peer, const char* what) const {
  if (peer < 0 || peer >= size()) {
    throw UsageError(fmt::format("{}: rank {} is outside [0, {})", what, peer, size()));
  }
  if (peer == rank_) {
    throw UsageError(fmt::format("{}: rank {} cannot address itself", what, peer));
  }
}

void RankContext::do_send(int dst, Tag tag, Bytes payload, std::size_t billable_bytes) {
  check_peer(dst, "send");
  const auto& ch = channel();
  auto& link = link_free_[static_cast<std::size_t>(dst)];
  Envelope env;
  env.src = rank_;
  env.dst = dst;
  env.tag = tag;
  env.payload = std::move(payload);
  env.depart_time = std::max(clock_, link);
  env.billable_bytes = billable_bytes;
  link = env.depart_time + ch.beta * static_cast<double>(billable_bytes);
  world_.deliver(std::move(env));
}

Bytes RankContext::do_recv(int src, Tag tag) {
  check_peer(src, "recv");
  Envelope env = world_.take(rank_, src, tag);
  const auto& ch = channel();
  const double arrival =
      env.depart_time + ch.alpha + ch.beta * static_cast<double>(env.billable_bytes);
  clock_ = std::max(clock_, arrival);
  return std::move(env.payload);
}

// ---------------------------------------------------------------------------
// World driver

namespace detail {

void check_world_size(int np) {
  if (np < 1) throw ConfigError(fmt::format("world size must be at least 1, got {}", np));
}

void run_world(int np, const ChannelModel& channel,
               const std::function<void(RankContext&)>& body,
               std::vector<double>* final_clocks) {
  check_world_size(np);
  validate(channel);
  sim::World world(np, channel);
  std::vector<double> clocks(static_cast<std::size_t>(np), 0.0);

  auto rank_main = [&](int r) {
    RankContext ctx(world, r);
    try {
      body(ctx);
      clocks[static_cast<std::size_t>(r)] = ctx.now();
      world.finish(r);
    } catch (const sim::WorldAborted&) {
      world.aborted_exit(r);
    } catch (const Error& e) {
      world.fail(r, e.kind(), e.what());
    } catch (const std::exception& e) {
      world.fail(r, ErrorKind::runtime, e.what());
    } catch (...) {
      world.fail(r, ErrorKind::runtime, "unknown exception");
    }
  };

  {
    std::vector<std::jthread> threads;
    threads.reserve(static_cast<std::size_t>(np));
    for (int r = 0; r < np; ++r) threads.emplace_back(rank_main, r);
  }
  world.raise_if_failed();
  if (final_clocks) *final_clocks = std::move(clocks);
}

}  // namespace detail
}  // namespace mpbench
