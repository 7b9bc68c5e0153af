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

#include "mpbench/mpi_transport.hpp"

#include <fmt/format.h>

#include <climits>
#include <cmath>
#include <iostream>

#include "mpbench/error.hpp"

namespace mpbench {
namespace {

struct MpiSession {
  bool owned = false;

  MpiSession() {
    int ready = 0;
    MPI_Initialized(&ready);
    if (!ready) {
      MPI_Init(nullptr, nullptr);
      owned = true;
    }
  }
  ~MpiSession() {
    int done = 0;
    MPI_Finalized(&done);
    if (owned && !done) MPI_Finalize();
  }
};

}  // namespace

MpiCommunicator::MpiCommunicator(MPI_Comm comm, const ChannelModel& channel) : channel_(channel) {
  MPI_Comm_dup(comm, &p2p_);
  MPI_Comm_dup(comm, &coll_);
  MPI_Comm_rank(p2p_, &rank_);
  MPI_Comm_size(p2p_, &size_);
  int* ub = nullptr;
  int found = 0;
  MPI_Comm_get_attr(p2p_, MPI_TAG_UB, &ub, &found);
  if (found && ub) tag_ub_ = *ub;
  MPI_Barrier(p2p_);
  origin_ = MPI_Wtime();
}

MpiCommunicator::~MpiCommunicator() {
  for (auto& p : pending_) MPI_Wait(&p.request, MPI_STATUS_IGNORE);
  MPI_Comm_free(&coll_);
  MPI_Comm_free(&p2p_);
}

double MpiCommunicator::now() const { return (MPI_Wtime() - origin_) * 1e6; }

void MpiCommunicator::advance(double cost_us) {
  if (!(cost_us >= 0.0) || !std::isfinite(cost_us)) {
    throw UsageError(fmt::format("advance: cost {} must be finite and nonnegative", cost_us));
  }
}

void MpiCommunicator::align_clocks() { MPI_Barrier(p2p_); }

std::pair<MPI_Comm, int> MpiCommunicator::route(Tag tag) const {
  const auto bound = static_cast<Tag>(tag_ub_) + 1;
  if (tag & kReservedTagBit) return {coll_, static_cast<int>((tag & ~kReservedTagBit) % bound)};
  return {p2p_, static_cast<int>(tag % bound)};
}

void MpiCommunicator::check_peer(int peer) const {
  if (peer < 0 || peer >= size_ || peer == rank_) {
    throw UsageError(fmt::format("rank {}: invalid peer {} in a world of {}", rank_, peer, size_));
  }
}

void MpiCommunicator::reap() {
  for (auto it = pending_.begin(); it != pending_.end();) {
    int done = 0;
    MPI_Test(&it->request, &done, MPI_STATUS_IGNORE);
    it = done ? pending_.erase(it) : std::next(it);
  }
}

void MpiCommunicator::do_send(int dst, Tag tag, Bytes payload, std::size_t) {
  check_peer(dst);
  if (payload.size() > static_cast<std::size_t>(INT_MAX)) {
    throw UsageError(fmt::format("message of {} bytes exceeds the MPI count limit", payload.size()));
  }
  reap();
  auto [comm, mpi_tag] = route(tag);
  auto& p = pending_.emplace_back();
  p.buffer = std::move(payload);
  MPI_Isend(p.buffer.data(), static_cast<int>(p.buffer.size()), MPI_BYTE, dst, mpi_tag, comm,
            &p.request);
}

Bytes MpiCommunicator::do_recv(int src, Tag tag) {
  check_peer(src);
  auto [comm, mpi_tag] = route(tag);
  MPI_Status status;
  MPI_Probe(src, mpi_tag, comm, &status);
  int count = 0;
  MPI_Get_count(&status, MPI_BYTE, &count);
  Bytes out(static_cast<std::size_t>(count));
  MPI_Recv(out.data(), count, MPI_BYTE, src, mpi_tag, comm, MPI_STATUS_IGNORE);
  reap();
  return out;
}

std::optional<BenchReport> run_over_mpi(BenchConfig cfg, bool np_explicit) {
  static MpiSession session;
  int world = 1;
  MPI_Comm_size(MPI_COMM_WORLD, &world);
  if (np_explicit && cfg.np != world) {
    throw ConfigError(fmt::format("--np {} does not match the MPI world size {}", cfg.np, world));
  }
  cfg.np = world;
  validate(cfg);
  if (family_of(cfg.benchmark) == BenchFamily::ml) {
    throw ConfigError(fmt::format("{} runs on the simulated transport only", name_of(cfg.benchmark)));
  }

  MpiCommunicator comm(MPI_COMM_WORLD, cfg.channel);
  try {
    BenchReport report = run_on_rank(comm, cfg);
    if (comm.rank() != 0) return std::nullopt;
    return report;
  } catch (const std::exception& e) {
    std::cerr << "mpbench: error: rank " << comm.rank() << ": " << e.what() << '\n';
    MPI_Abort(MPI_COMM_WORLD, 1);
    throw;
  }
}

}  // namespace mpbench
