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

// Single-threaded reference results for the collectives, computed directly
// from every rank's input. Nothing here touches the transport.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <string_view>
#include <vector>

#include "mpbench/collectives.hpp"

namespace mpbench::testing {

inline Bytes random_bytes(std::mt19937_64& rng, std::size_t n) {
  Bytes out(n);
  for (auto& b : out) b = static_cast<std::byte>(rng() & 0xffu);
  return out;
}

/// n elements of the given type, encoded as native 8-byte values. Doubles
/// span several magnitudes so that regrouping a sum changes its rounding.
inline Bytes random_elements(std::mt19937_64& rng, std::size_t n, ElementType type) {
  Bytes out(n * 8);
  for (std::size_t i = 0; i < n; ++i) {
    if (type == ElementType::int64) {
      const auto v = static_cast<std::int64_t>(rng() % 2000001) - 1000000;
      std::memcpy(out.data() + i * 8, &v, 8);
    } else {
      const double mantissa = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
      const int exponent = static_cast<int>(rng() % 40) - 20;
      const double v = std::ldexp(mantissa, exponent);
      std::memcpy(out.data() + i * 8, &v, 8);
    }
  }
  return out;
}

inline Bytes ref_concat(const std::vector<Bytes>& inputs) {
  Bytes out;
  for (const auto& in : inputs) out.insert(out.end(), in.begin(), in.end());
  return out;
}

/// Left fold over ranks 0, 1, ..., P-1.
inline Bytes ref_reduce(const std::vector<Bytes>& inputs, ReduceKind kind, ElementType type) {
  Bytes acc = inputs.front();
  const std::size_t n = acc.size() / 8;
  for (std::size_t r = 1; r < inputs.size(); ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      if (type == ElementType::int64) {
        std::int64_t a, b;
        std::memcpy(&a, acc.data() + 8 * i, 8);
        std::memcpy(&b, inputs[r].data() + 8 * i, 8);
        a = kind == ReduceKind::sum ? a + b : kind == ReduceKind::min ? (b < a ? b : a) : (b > a ? b : a);
        std::memcpy(acc.data() + 8 * i, &a, 8);
      } else {
        double a, b;
        std::memcpy(&a, acc.data() + 8 * i, 8);
        std::memcpy(&b, inputs[r].data() + 8 * i, 8);
        a = kind == ReduceKind::sum ? a + b : kind == ReduceKind::min ? (b < a ? b : a) : (b > a ? b : a);
        std::memcpy(acc.data() + 8 * i, &a, 8);
      }
    }
  }
  return acc;
}

/// out[i][j] = in[j][i]
inline std::vector<std::vector<Bytes>> ref_transpose(const std::vector<std::vector<Bytes>>& in) {
  const std::size_t p = in.size();
  std::vector<std::vector<Bytes>> out(p, std::vector<Bytes>(p));
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) out[i][j] = in[j][i];
  return out;
}

/// Buffer of the layout's extent with block r copied to its displacement.
inline Bytes ref_assemble(const std::vector<Bytes>& blocks, const VectorLayout& layout) {
  std::size_t extent = 0;
  for (std::size_t r = 0; r < blocks.size(); ++r) {
    if (layout.counts[r] > 0) {
      extent = std::max(extent, (layout.displacements[r] + layout.counts[r]) * layout.element_size);
    }
  }
  Bytes out(extent, std::byte{0});
  for (std::size_t r = 0; r < blocks.size(); ++r) {
    std::copy(blocks[r].begin(), blocks[r].end(),
              out.begin() + static_cast<std::ptrdiff_t>(layout.displacements[r] * layout.element_size));
  }
  return out;
}

inline Bytes ref_slice(const Bytes& buffer, const VectorLayout& layout, std::size_t r) {
  const auto off = static_cast<std::ptrdiff_t>(layout.displacements[r] * layout.element_size);
  const auto len = static_cast<std::ptrdiff_t>(layout.counts[r] * layout.element_size);
  return Bytes(buffer.begin() + off, buffer.begin() + off + len);
}

/// Random disjoint layout: counts in [0, max_count], shuffled region order,
/// random gaps between regions.
inline VectorLayout random_layout(std::mt19937_64& rng, int p, std::size_t max_count,
                                  std::size_t element_size = 1) {
  VectorLayout layout;
  layout.element_size = element_size;
  layout.counts.resize(static_cast<std::size_t>(p));
  layout.displacements.resize(static_cast<std::size_t>(p));
  for (auto& c : layout.counts) c = max_count == 0 ? 0 : rng() % (max_count + 1);
  std::vector<std::size_t> order(static_cast<std::size_t>(p));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;
  for (auto r : order) {
    cursor += rng() % 3;
    layout.displacements[r] = cursor;
    cursor += layout.counts[r];
  }
  return layout;
}

inline double as_double(const Bytes& b, std::size_t i = 0) {
  double v;
  std::memcpy(&v, b.data() + 8 * i, 8);
  return v;
}

inline std::int64_t as_int64(const Bytes& b, std::size_t i = 0) {
  std::int64_t v;
  std::memcpy(&v, b.data() + 8 * i, 8);
  return v;
}

template <class T>
Bytes encode_values(std::initializer_list<T> values) {
  Bytes out(values.size() * sizeof(T));
  std::size_t i = 0;
  for (T v : values) std::memcpy(out.data() + sizeof(T) * i++, &v, sizeof(T));
  return out;
}

inline Bytes text(std::string_view s) {
  Bytes out(s.size());
  std::memcpy(out.data(), s.data(), s.size());
  return out;
}

}  // namespace mpbench::testing
