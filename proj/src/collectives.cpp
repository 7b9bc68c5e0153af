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

#include "mpbench/collectives.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <numeric>

#include <fmt/format.h>

#include "mpbench/error.hpp"

namespace mpbench {
namespace {

int wrap(int r, int p) { return ((r % p) + p) % p; }

void check_root(const Communicator& comm, int root, const char* what) {
  if (root < 0 || root >= comm.size()) {
    throw UsageError(fmt::format("{}: root {} is outside [0, {})", what, root, comm.size()));
  }
}

void expect_size(std::size_t got, std::size_t want, const char* what, int src) {
  if (got != want) {
    throw CorruptionError(fmt::format("{}: rank {} sent {} bytes, expected {}", what, src,
                                      got, want));
  }
}

void append(Bytes& out, std::span<const std::byte> in) { out.insert(out.end(), in.begin(), in.end()); }

template <class T>
void combine_typed(ReduceKind kind, std::span<std::byte> acc, std::span<const std::byte> in) {
  const std::size_t n = acc.size() / sizeof(T);
  for (std::size_t i = 0; i < n; ++i) {
    T a;
    T b;
    std::memcpy(&a, acc.data() + i * sizeof(T), sizeof(T));
    std::memcpy(&b, in.data() + i * sizeof(T), sizeof(T));
    switch (kind) {
      case ReduceKind::sum:
        a = a + b;
        break;
      case ReduceKind::min:
        a = std::min(a, b);
        break;
      case ReduceKind::max:
        a = std::max(a, b);
        break;
    }
    std::memcpy(acc.data() + i * sizeof(T), &a, sizeof(T));
  }
}

void validate_layout(const Communicator& comm, const VectorLayout& layout, const char* what) {
  const auto p = static_cast<std::size_t>(comm.size());
  if (layout.counts.size() != p || layout.displacements.size() != p) {
    throw UsageError(fmt::format("{}: layout has {} counts and {} displacements for {} ranks",
                                 what, layout.counts.size(), layout.displacements.size(), p));
  }
  if (layout.element_size == 0) {
    throw UsageError(fmt::format("{}: element size must be positive", what));
  }
}

// Target regions must not overlap; zero-length regions never conflict.
void validate_disjoint(const VectorLayout& layout, const char* what) {
  std::vector<std::pair<std::size_t, std::size_t>> regions;
  for (std::size_t i = 0; i < layout.counts.size(); ++i) {
    if (layout.counts[i] > 0) {
      regions.emplace_back(layout.displacements[i], layout.displacements[i] + layout.counts[i]);
    }
  }
  std::sort(regions.begin(), regions.end());
  for (std::size_t i = 1; i < regions.size(); ++i) {
    if (regions[i].first < regions[i - 1].second) {
      throw UsageError(fmt::format("{}: layout regions [{}, {}) and [{}, {}) overlap", what,
                                   regions[i - 1].first, regions[i - 1].second,
                                   regions[i].first, regions[i].second));
    }
  }
}

void validate_within(const VectorLayout& layout, std::size_t buffer_bytes, const char* what) {
  for (std::size_t i = 0; i < layout.counts.size(); ++i) {
    const int r = static_cast<int>(i);
    if (layout.counts[i] > 0 && layout.offset_bytes(r) + layout.bytes(r) > buffer_bytes) {
      throw UsageError(fmt::format("{}: region of rank {} ends at byte {} past buffer of {}",
                                   what, i, layout.offset_bytes(r) + layout.bytes(r),
                                   buffer_bytes));
    }
  }
}

// Zero-count regions may sit past the end of the buffer.
std::span<const std::byte> region(std::span<const std::byte> buffer, const VectorLayout& layout,
                                  int r) {
  if (layout.bytes(r) == 0) return {};
  return buffer.subspan(layout.offset_bytes(r), layout.bytes(r));
}

void check_own_size(const Communicator& comm, std::span<const std::byte> payload,
                    const VectorLayout& layout, const char* what) {
  if (payload.size() != layout.bytes(comm.rank())) {
    throw UsageError(fmt::format("{}: rank {} passes {} bytes but its layout count is {}",
                                 what, comm.rank(), payload.size(),
                                 layout.bytes(comm.rank())));
  }
}

void place(Bytes& out, const VectorLayout& layout, int r, std::span<const std::byte> block) {
  if (!block.empty()) std::memcpy(out.data() + layout.offset_bytes(r), block.data(), block.size());
}

}  // namespace

VectorLayout VectorLayout::packed(std::vector<std::size_t> counts, std::size_t element_size) {
  VectorLayout layout;
  layout.displacements.resize(counts.size());
  std::exclusive_scan(counts.begin(), counts.end(), layout.displacements.begin(),
                      std::size_t{0});
  layout.counts = std::move(counts);
  layout.element_size = element_size;
  return layout;
}

std::size_t VectorLayout::bytes(int rank) const {
  return counts[static_cast<std::size_t>(rank)] * element_size;
}

std::size_t VectorLayout::offset_bytes(int rank) const {
  return displacements[static_cast<std::size_t>(rank)] * element_size;
}

std::size_t VectorLayout::extent_bytes() const {
  std::size_t end = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) end = std::max(end, (displacements[i] + counts[i]) * element_size);
  }
  return end;
}

void combine(const ReduceOp& op, std::span<std::byte> acc, std::span<const std::byte> in) {
  if (acc.size() != in.size()) {
    throw CorruptionError(
        fmt::format("reduction operands differ in length: {} vs {}", acc.size(), in.size()));
  }
  if (op.element_type == ElementType::int64) {
    combine_typed<std::int64_t>(op.kind, acc, in);
  } else {
    combine_typed<double>(op.kind, acc, in);
  }
}

void barrier(Communicator& comm) {
  const int p = comm.size();
  const int me = comm.rank();
  const Tag tag = comm.next_collective_tag();
  const std::byte token[1] = {std::byte{0}};
  for (int dist = 1; dist < p; dist <<= 1) {
    comm.send(wrap(me + dist, p), tag, std::span<const std::byte>(token));
    comm.recv(wrap(me - dist, p), tag);
  }
}

void bcast(Communicator& comm, std::span<std::byte> buffer, int root) {
  check_root(comm, root, "bcast");
  const int p = comm.size();
  const int vr = wrap(comm.rank() - root, p);
  const Tag tag = comm.next_collective_tag();

  int mask = 1;
  while (mask < p) {
    if (vr & mask) {
      const int parent = wrap(vr - mask + root, p);
      const Bytes got = comm.recv(parent, tag);
      expect_size(got.size(), buffer.size(), "bcast", parent);
      std::copy(got.begin(), got.end(), buffer.begin());
      break;
    }
    mask <<= 1;
  }
  for (mask >>= 1; mask > 0; mask >>= 1) {
    if (vr + mask < p) comm.send(wrap(vr + mask + root, p), tag, buffer);
  }
}

// Contributions travel up the binomial tree unreduced, as contiguous blocks of
// virtual ranks, so the root can fold them in ascending rank order.
Bytes reduce(Communicator& comm, std::span<const std::byte> payload, const ReduceOp& op,
             int root) {
  check_root(comm, root, "reduce");
  if (payload.size() % ReduceOp::element_width() != 0) {
    throw UsageError(fmt::format("reduce: payload of {} bytes is not a whole number of {}-byte "
                                 "elements",
                                 payload.size(), ReduceOp::element_width()));
  }
  const int p = comm.size();
  const int vr = wrap(comm.rank() - root, p);
  const std::size_t n = payload.size();
  const Tag tag = comm.next_collective_tag();

  Bytes block(payload.begin(), payload.end());
  for (int mask = 1; mask < p; mask <<= 1) {
    if (vr & mask) {
      comm.send(wrap(vr - mask + root, p), tag, std::move(block));
      return {};
    }
    const int child = vr + mask;
    if (child < p) {
      const int src = wrap(child + root, p);
      const Bytes got = comm.recv(src, tag);
      const auto members = static_cast<std::size_t>(std::min(mask, p - child));
      expect_size(got.size(), members * n, "reduce", src);
      append(block, got);
    }
  }

  // block holds virtual ranks 0..p-1; real rank r sits at virtual (r - root).
  auto contribution = [&](int r) {
    return std::span<const std::byte>(block).subspan(static_cast<std::size_t>(wrap(r - root, p)) * n, n);
  };
  const auto first = contribution(0);
  Bytes result(first.begin(), first.end());
  for (int r = 1; r < p; ++r) combine(op, result, contribution(r));
  return result;
}

Bytes allreduce(Communicator& comm, std::span<const std::byte> payload, const ReduceOp& op) {
  Bytes result = reduce(comm, payload, op, 0);
  if (comm.rank() != 0) result.resize(payload.size());
  bcast(comm, result, 0);
  return result;
}

Bytes gather(Communicator& comm, std::span<const std::byte> payload, int root) {
  check_root(comm, root, "gather");
  const int p = comm.size();
  const Tag tag = comm.next_collective_tag();
  if (comm.rank() != root) {
    comm.send(root, tag, payload);
    return {};
  }
  Bytes out;
  out.reserve(payload.size() * static_cast<std::size_t>(p));
  for (int r = 0; r < p; ++r) {
    if (r == root) {
      append(out, payload);
      continue;
    }
    const Bytes got = comm.recv(r, tag);
    expect_size(got.size(), payload.size(), "gather", r);
    append(out, got);
  }
  return out;
}

Bytes scatter(Communicator& comm, std::span<const Bytes> chunks, int root) {
  check_root(comm, root, "scatter");
  const int p = comm.size();
  if (comm.rank() == root) {
    if (chunks.size() != static_cast<std::size_t>(p)) {
      throw UsageError(
          fmt::format("scatter: root supplied {} chunks for {} ranks", chunks.size(), p));
    }
    for (const auto& c : chunks) {
      if (c.size() != chunks.front().size()) {
        throw UsageError("scatter: chunks must all have the same size");
      }
    }
  }
  const Tag tag = comm.next_collective_tag();
  if (comm.rank() != root) return comm.recv(root, tag);
  for (int r = 0; r < p; ++r) {
    if (r != root) comm.send(r, tag, chunks[static_cast<std::size_t>(r)]);
  }
  return chunks[static_cast<std::size_t>(root)];
}

Bytes allgather(Communicator& comm, std::span<const std::byte> payload) {
  const int p = comm.size();
  const int me = comm.rank();
  const int right = wrap(me + 1, p);
  const int left = wrap(me - 1, p);
  const Tag tag = comm.next_collective_tag();

  std::vector<Bytes> blocks(static_cast<std::size_t>(p));
  blocks[static_cast<std::size_t>(me)].assign(payload.begin(), payload.end());
  for (int step = 0; step + 1 < p; ++step) {
    comm.send(right, tag, blocks[static_cast<std::size_t>(wrap(me - step, p))]);
    const int incoming = wrap(me - step - 1, p);
    Bytes got = comm.recv(left, tag);
    expect_size(got.size(), payload.size(), "allgather", left);
    blocks[static_cast<std::size_t>(incoming)] = std::move(got);
  }
  Bytes out;
  out.reserve(payload.size() * static_cast<std::size_t>(p));
  for (const auto& b : blocks) append(out, b);
  return out;
}

std::vector<Bytes> alltoall(Communicator& comm, std::span<const Bytes> chunks) {
  const int p = comm.size();
  const int me = comm.rank();
  if (chunks.size() != static_cast<std::size_t>(p)) {
    throw UsageError(fmt::format("alltoall: {} chunks for {} ranks", chunks.size(), p));
  }
  const std::size_t n = chunks.front().size();
  for (const auto& c : chunks) {
    if (c.size() != n) throw UsageError("alltoall: chunks must all have the same size");
  }
  const Tag tag = comm.next_collective_tag();

  std::vector<Bytes> out(static_cast<std::size_t>(p));
  out[static_cast<std::size_t>(me)] = chunks[static_cast<std::size_t>(me)];
  for (int step = 1; step < p; ++step) {
    const int dst = wrap(me + step, p);
    const int src = wrap(me - step, p);
    comm.send(dst, tag, chunks[static_cast<std::size_t>(dst)]);
    Bytes got = comm.recv(src, tag);
    expect_size(got.size(), n, "alltoall", src);
    out[static_cast<std::size_t>(src)] = std::move(got);
  }
  return out;
}

Bytes reduce_scatter(Communicator& comm, std::span<const std::byte> payload,
                     const ReduceOp& op, std::span<const std::size_t> counts) {
  const auto p = static_cast<std::size_t>(comm.size());
  if (counts.size() != p) {
    throw UsageError(fmt::format("reduce_scatter: {} counts for {} ranks", counts.size(), p));
  }
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total * ReduceOp::element_width() != payload.size()) {
    throw UsageError(fmt::format("reduce_scatter: counts cover {} elements but payload has {} "
                                 "bytes",
                                 total, payload.size()));
  }
  const Bytes full = reduce(comm, payload, op, 0);
  const auto layout = VectorLayout::packed({counts.begin(), counts.end()}, ReduceOp::element_width());
  return scatterv(comm, full, layout, 0);
}

Bytes gatherv(Communicator& comm, std::span<const std::byte> payload,
              const VectorLayout& layout, int root) {
  check_root(comm, root, "gatherv");
  validate_layout(comm, layout, "gatherv");
  check_own_size(comm, payload, layout, "gatherv");
  if (comm.rank() == root) validate_disjoint(layout, "gatherv");
  const int p = comm.size();
  const Tag tag = comm.next_collective_tag();
  if (comm.rank() != root) {
    comm.send(root, tag, payload);
    return {};
  }
  Bytes out(layout.extent_bytes(), std::byte{0});
  for (int r = 0; r < p; ++r) {
    if (r == root) {
      place(out, layout, r, payload);
      continue;
    }
    const Bytes got = comm.recv(r, tag);
    expect_size(got.size(), layout.bytes(r), "gatherv", r);
    place(out, layout, r, got);
  }
  return out;
}

Bytes scatterv(Communicator& comm, std::span<const std::byte> payload,
               const VectorLayout& layout, int root) {
  check_root(comm, root, "scatterv");
  validate_layout(comm, layout, "scatterv");
  if (comm.rank() == root) validate_within(layout, payload.size(), "scatterv");
  const int p = comm.size();
  const Tag tag = comm.next_collective_tag();
  auto slice = [&](int r) { return region(payload, layout, r); };
  if (comm.rank() != root) {
    Bytes got = comm.recv(root, tag);
    expect_size(got.size(), layout.bytes(comm.rank()), "scatterv", root);
    return got;
  }
  for (int r = 0; r < p; ++r) {
    if (r != root) comm.send(r, tag, slice(r));
  }
  const auto mine = slice(root);
  return Bytes(mine.begin(), mine.end());
}

Bytes allgatherv(Communicator& comm, std::span<const std::byte> payload,
                 const VectorLayout& layout) {
  validate_layout(comm, layout, "allgatherv");
  check_own_size(comm, payload, layout, "allgatherv");
  validate_disjoint(layout, "allgatherv");
  const int p = comm.size();
  const int me = comm.rank();
  const int right = wrap(me + 1, p);
  const int left = wrap(me - 1, p);
  const Tag tag = comm.next_collective_tag();

  std::vector<Bytes> blocks(static_cast<std::size_t>(p));
  blocks[static_cast<std::size_t>(me)].assign(payload.begin(), payload.end());
  for (int step = 0; step + 1 < p; ++step) {
    comm.send(right, tag, blocks[static_cast<std::size_t>(wrap(me - step, p))]);
    const int incoming = wrap(me - step - 1, p);
    Bytes got = comm.recv(left, tag);
    expect_size(got.size(), layout.bytes(incoming), "allgatherv", left);
    blocks[static_cast<std::size_t>(incoming)] = std::move(got);
  }
  Bytes out(layout.extent_bytes(), std::byte{0});
  for (int r = 0; r < p; ++r) place(out, layout, r, blocks[static_cast<std::size_t>(r)]);
  return out;
}

Bytes alltoallv(Communicator& comm, std::span<const std::byte> payload,
                const VectorLayout& send_layout, const VectorLayout& recv_layout) {
  validate_layout(comm, send_layout, "alltoallv");
  validate_layout(comm, recv_layout, "alltoallv");
  validate_within(send_layout, payload.size(), "alltoallv");
  validate_disjoint(recv_layout, "alltoallv");
  const int p = comm.size();
  const int me = comm.rank();
  const Tag tag = comm.next_collective_tag();
  auto slice = [&](int r) {
    return region(payload, send_layout, r);
  };

  Bytes out(recv_layout.extent_bytes(), std::byte{0});
  const auto own = slice(me);
  expect_size(own.size(), recv_layout.bytes(me), "alltoallv", me);
  place(out, recv_layout, me, own);
  for (int step = 1; step < p; ++step) {
    const int dst = wrap(me + step, p);
    const int src = wrap(me - step, p);
    comm.send(dst, tag, slice(dst));
    const Bytes got = comm.recv(src, tag);
    expect_size(got.size(), recv_layout.bytes(src), "alltoallv", src);
    place(out, recv_layout, src, got);
  }
  return out;
}

}  // namespace mpbench
