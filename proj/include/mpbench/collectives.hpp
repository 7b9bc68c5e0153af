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
#include <span>
#include <vector>

#include "mpbench/transport.hpp"

namespace mpbench {

enum class ReduceKind { sum, min, max };
enum class ElementType { int64, float64 };

struct ReduceOp {
  ReduceKind kind = ReduceKind::sum;
  ElementType element_type = ElementType::float64;

  static constexpr std::size_t element_width() noexcept { return 8; }
};

/// Per-rank counts and displacements, both in elements of `element_size`
/// bytes.
struct VectorLayout {
  std::vector<std::size_t> counts;
  std::vector<std::size_t> displacements;
  std::size_t element_size = 1;

  /// Back-to-back regions in rank order.
  static VectorLayout packed(std::vector<std::size_t> counts, std::size_t element_size = 1);

  std::size_t bytes(int rank) const;
  std::size_t offset_bytes(int rank) const;
  /// Smallest buffer, in bytes, that holds every region.
  std::size_t extent_bytes() const;
};

// All collectives are blocking and must be called by every rank in the same
// order. Reductions combine contributions in ascending rank order, so float64
// results are bitwise reproducible.

/// Dissemination barrier: ceil(log2 P) rounds of one-byte tokens.
void barrier(Communicator& comm);

/// Binomial-tree broadcast in place. Every rank passes a buffer of the
/// root's size; a size disagreement raises CorruptionError.
void bcast(Communicator& comm, std::span<std::byte> buffer, int root = 0);

/// Binomial-tree reduction. Returns the result at `root`, empty elsewhere.
Bytes reduce(Communicator& comm, std::span<const std::byte> payload, const ReduceOp& op,
             int root = 0);

/// Reduce to rank 0, then broadcast.
Bytes allreduce(Communicator& comm, std::span<const std::byte> payload, const ReduceOp& op);

/// Linear gather: concatenation in rank order at `root`, empty elsewhere.
Bytes gather(Communicator& comm, std::span<const std::byte> payload, int root = 0);

/// Linear scatter of P equal chunks supplied by `root`. Other ranks may pass
/// an empty span.
Bytes scatter(Communicator& comm, std::span<const Bytes> chunks, int root = 0);

/// Ring allgather, P-1 rounds.
Bytes allgather(Communicator& comm, std::span<const std::byte> payload);

/// Pairwise exchange. `chunks[j]` goes to rank j; the result holds one chunk
/// per source rank.
std::vector<Bytes> alltoall(Communicator& comm, std::span<const Bytes> chunks);

/// Reduce to rank 0, then scatter `counts[r]` elements to rank r.
Bytes reduce_scatter(Communicator& comm, std::span<const std::byte> payload,
                     const ReduceOp& op, std::span<const std::size_t> counts);

Bytes gatherv(Communicator& comm, std::span<const std::byte> payload,
              const VectorLayout& layout, int root = 0);
Bytes scatterv(Communicator& comm, std::span<const std::byte> payload,
               const VectorLayout& layout, int root = 0);
Bytes allgatherv(Communicator& comm, std::span<const std::byte> payload,
                 const VectorLayout& layout);
/// `send_layout` slices the local buffer per destination; `recv_layout`
/// places each source's block in the result.
Bytes alltoallv(Communicator& comm, std::span<const std::byte> payload,
                const VectorLayout& send_layout, const VectorLayout& recv_layout);

/// Element-wise `acc = acc op in`.
void combine(const ReduceOp& op, std::span<std::byte> acc, std::span<const std::byte> in);

}  // namespace mpbench
