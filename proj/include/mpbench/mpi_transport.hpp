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

#include <mpi.h>

#include <list>
#include <optional>

#include "mpbench/benches.hpp"
#include "mpbench/transport.hpp"

namespace mpbench {

/// Communicator over a native MPI library. Time is wall-clock from
/// MPI_Wtime; advance() only validates, since real work takes real time.
/// Sends are eager (MPI_Isend with an owned buffer), matching the simulated
/// semantics. Collective traffic uses a duplicated communicator.
class MpiCommunicator final : public Communicator {
 public:
  MpiCommunicator(MPI_Comm comm, const ChannelModel& channel);
  ~MpiCommunicator() override;
  MpiCommunicator(const MpiCommunicator&) = delete;
  MpiCommunicator& operator=(const MpiCommunicator&) = delete;

  int rank() const noexcept override { return rank_; }
  int size() const noexcept override { return size_; }
  const ChannelModel& channel() const noexcept override { return channel_; }
  double now() const override;
  void advance(double cost_us) override;
  void align_clocks() override;

 protected:
  void do_send(int dst, Tag tag, Bytes payload, std::size_t billable_bytes) override;
  Bytes do_recv(int src, Tag tag) override;

 private:
  struct Pending {
    MPI_Request request = MPI_REQUEST_NULL;
    Bytes buffer;
  };

  std::pair<MPI_Comm, int> route(Tag tag) const;
  void reap();
  void check_peer(int peer) const;

  MPI_Comm p2p_ = MPI_COMM_NULL;
  MPI_Comm coll_ = MPI_COMM_NULL;
  int rank_ = 0;
  int size_ = 1;
  int tag_ub_ = 32767;
  ChannelModel channel_;
  double origin_ = 0.0;
  std::list<Pending> pending_;
};

/// Runs a communication benchmark on MPI_COMM_WORLD, initializing MPI on
/// first use. The world size becomes np; an explicit, different np is a
/// ConfigError. Returns the report on rank 0 and nullopt elsewhere. A
/// runtime failure on any rank aborts the MPI job.
std::optional<BenchReport> run_over_mpi(BenchConfig cfg, bool np_explicit);

}  // namespace mpbench
