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

#include "mpbench/mlbench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "mpbench/collectives.hpp"
#include "mpbench/error.hpp"

namespace mpbench {
namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double standard_normal(std::mt19937_64& rng) {
  // Box-Muller on our own uniforms keeps generated data identical across
  // standard library implementations.
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::size_t count_correct(const Dataset& train, const Dataset& test, std::size_t k,
                          RowBlock rows) {
  std::size_t correct = 0;
  for (std::size_t i = rows.begin; i < rows.end; ++i) {
    if (knn_predict(train, test.features.row(i), k) == test.labels[i]) ++correct;
  }
  return correct;
}

void check_knn_inputs(const Dataset& train, const Dataset& test, std::size_t k) {
  if (test.size() == 0) throw UsageError("knn: test set is empty");
  if (k < 1 || k > train.size()) {
    throw UsageError(fmt::format("knn: k = {} must lie in [1, {}]", k, train.size()));
  }
  if (train.labels.size() != train.size() || test.labels.size() != test.size()) {
    throw UsageError("knn: both datasets need one label per row");
  }
  if (train.dims() != test.dims()) {
    throw UsageError(fmt::format("knn: train has {} features, test has {}", train.dims(),
                                 test.dims()));
  }
}

void check_matmul_shapes(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) {
    throw UsageError(fmt::format("matmul: cannot multiply {}x{} by {}x{}", a.rows, a.cols,
                                 b.rows, b.cols));
  }
}

void multiply_rows(const Matrix& a, const Matrix& b, RowBlock rows, std::span<double> out) {
  for (std::size_t i = rows.begin; i < rows.end; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < a.cols; ++t) s += a(i, t) * b(t, j);
      out[(i - rows.begin) * b.cols + j] = s;
    }
  }
}

template <class T>
void put(Bytes& out, T v) {
  const auto at = out.size();
  out.resize(at + sizeof(T));
  std::memcpy(out.data() + at, &v, sizeof(T));
}

template <class T>
T get(std::span<const std::byte> in, std::size_t at) {
  T v;
  std::memcpy(&v, in.data() + at, sizeof(T));
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Data

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  return a.rows == b.rows && a.cols == b.cols && bitwise_equal(a.values, b.values);
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  Dataset out;
  out.features = Matrix(end - begin, dims());
  std::copy(features.values.begin() + static_cast<std::ptrdiff_t>(begin * dims()),
            features.values.begin() + static_cast<std::ptrdiff_t>(end * dims()),
            out.features.values.begin());
  if (!labels.empty()) {
    out.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(begin),
                      labels.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

Dataset parse_csv(std::istream& in, std::string_view source) {
  Dataset data;
  std::vector<double> values;
  std::size_t width = 0;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    auto fail = [&](const std::string& why) {
      throw ConfigError(fmt::format("{}:{}: {}", source, lineno, why));
    };
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() < 2) fail("expected a label and at least one feature");
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      fail(fmt::format("expected {} columns, found {}", width, fields.size()));
    }
    int label = 0;
    const auto lf = fields[0];
    if (auto [p, ec] = std::from_chars(lf.data(), lf.data() + lf.size(), label);
        ec != std::errc{} || p != lf.data() + lf.size()) {
      fail(fmt::format("label '{}' is not an integer", lf));
    }
    data.labels.push_back(label);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      const auto f = fields[c];
      double v = 0.0;
      if (auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
          ec != std::errc{} || p != f.data() + f.size() || !std::isfinite(v)) {
        fail(fmt::format("column {}: '{}' is not a finite number", c + 1, f));
      }
      values.push_back(v);
    }
  }
  if (data.labels.empty()) throw ConfigError(fmt::format("{}: no data rows", source));
  data.features.rows = data.labels.size();
  data.features.cols = width - 1;
  data.features.values = std::move(values);
  return data;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open dataset '{}'", path));
  return parse_csv(in, path);
}

void write_csv(std::ostream& out, const Dataset& data) {
  char buf[64];
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << (data.labels.empty() ? 0 : data.labels[i]);
    for (double v : data.features.row(i)) {
      const auto res = std::to_chars(buf, buf + sizeof buf, v);
      out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

Dataset make_blobs(std::size_t n, std::size_t dims, std::size_t centers, std::uint64_t seed,
                   double spread) {
  if (n < 1 || dims < 1 || centers < 1) throw UsageError("make_blobs: sizes must be positive");
  std::mt19937_64 rng(seed);
  Matrix middle(centers, dims);
  for (auto& v : middle.values) v = -10.0 + 20.0 * uniform01(rng);
  Dataset data;
  data.features = Matrix(n, dims);
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % centers;
    data.labels[i] = static_cast<int>(c);
    for (std::size_t d = 0; d < dims; ++d) {
      data.features(i, d) = middle(c, d) + spread * standard_normal(rng);
    }
  }
  return data;
}

Dataset group_by_label(const Dataset& data) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data.labels[a] < data.labels[b]; });
  Dataset out;
  out.features = Matrix(data.size(), data.dims());
  out.labels.reserve(data.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto src = data.features.row(order[r]);
    std::copy(src.begin(), src.end(), out.features.values.begin() + static_cast<std::ptrdiff_t>(r * data.dims()));
    out.labels.push_back(data.labels[order[r]]);
  }
  return out;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix m(rows, cols);
  for (auto& v : m.values) v = 2.0 * uniform01(rng) - 1.0;
  return m;
}

RowBlock split_rows(std::size_t total, int parts, int part) {
  const auto p = static_cast<std::size_t>(parts);
  const auto i = static_cast<std::size_t>(part);
  const std::size_t base = total / p;
  const std::size_t extra = total % p;
  const std::size_t begin = i * base + std::min(i, extra);
  return {begin, begin + base + (i < extra ? 1 : 0)};
}

double knn_flops(std::size_t train_rows, std::size_t dims, std::size_t test_rows) {
  return 3.0 * static_cast<double>(train_rows) * static_cast<double>(dims) *
         static_cast<double>(test_rows);
}

double matmul_flops(std::size_t rows, std::size_t inner, std::size_t cols) {
  return 2.0 * static_cast<double>(rows) * static_cast<double>(inner) * static_cast<double>(cols);
}

// ---------------------------------------------------------------------------
// k-NN

int knn_predict(const Dataset& train, std::span<const double> point, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> order(train.size());
  for (std::size_t j = 0; j < train.size(); ++j) {
    order[j] = {squared_distance(train.features.row(j), point), j};
  }
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
  std::map<int, std::size_t> votes;
  for (std::size_t j = 0; j < k; ++j) ++votes[train.labels[order[j].second]];
  int best = votes.begin()->first;
  std::size_t best_votes = 0;
  for (const auto& [label, n] : votes) {
    if (n > best_votes) {
      best = label;
      best_votes = n;
    }
  }
  return best;
}

double knn_sequential(const Dataset& train, const Dataset& test, std::size_t k) {
  check_knn_inputs(train, test, k);
  const auto correct = count_correct(train, test, k, {0, test.size()});
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

std::optional<double> knn_distributed(Communicator& comm, const Dataset& train,
                                      const Dataset& test, std::size_t k,
                                      const ComputeModel& compute) {
  check_knn_inputs(train, test, k);
  if (static_cast<std::size_t>(comm.size()) > test.size()) {
    throw UsageError(fmt::format("knn: {} ranks but only {} test rows", comm.size(),
                                 test.size()));
  }
  const auto rows = split_rows(test.size(), comm.size(), comm.rank());
  const auto correct = static_cast<std::int64_t>(count_correct(train, test, k, rows));
  comm.advance(compute.us_per_flop * knn_flops(train.size(), train.dims(), rows.size()));

  Bytes payload;
  put(payload, correct);
  const Bytes total = reduce(comm, payload, {ReduceKind::sum, ElementType::int64}, 0);
  if (comm.rank() != 0) return std::nullopt;
  return static_cast<double>(get<std::int64_t>(total, 0)) / static_cast<double>(test.size());
}

// ---------------------------------------------------------------------------
// k-means

KMeansResult kmeans_lloyd(const Matrix& data, std::size_t k, std::size_t max_iter) {
  const std::size_t n = data.rows;
  const std::size_t dims = data.cols;
  if (k < 1 || k > n) {
    throw UsageError(fmt::format("kmeans: k = {} must lie in [1, {}]", k, n));
  }
  if (max_iter < 1) throw UsageError("kmeans: max_iter must be at least 1");

  Matrix centroids(k, dims);
  for (std::size_t j = 0; j < k; ++j) {
    const auto src = data.row(j * n / k);
    std::copy(src.begin(), src.end(), centroids.values.begin() + static_cast<std::ptrdiff_t>(j * dims));
  }

  std::vector<std::size_t> assigned(n, 0);
  std::vector<double> dist(n, 0.0);
  KMeansResult result;

  // Nearest centroid per point, lowest index on ties. Returns true when any
  // assignment moved.
  auto assign = [&] {
    ++result.assignment_passes;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = squared_distance(data.row(i), centroids.row(0));
      for (std::size_t j = 1; j < k; ++j) {
        const double d = squared_distance(data.row(i), centroids.row(j));
        if (d < best_d) {
          best = j;
          best_d = d;
        }
      }
      changed = changed || best != assigned[i];
      assigned[i] = best;
      dist[i] = best_d;
    }
    return changed;
  };

  auto update = [&] {
    ++result.updates;
    Matrix sums(k, dims);
    std::vector<std::size_t> members(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++members[assigned[i]];
      for (std::size_t d = 0; d < dims; ++d) sums(assigned[i], d) += data(i, d);
    }
    std::vector<bool> taken(n, false);
    for (std::size_t j = 0; j < k; ++j) {
      if (members[j] > 0) {
        for (std::size_t d = 0; d < dims; ++d) {
          centroids(j, d) = sums(j, d) / static_cast<double>(members[j]);
        }
        continue;
      }
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i] && (far == n || dist[i] > dist[far])) far = i;
      }
      taken[far] = true;
      const auto src = data.row(far);
      std::copy(src.begin(), src.end(), centroids.values.begin() + static_cast<std::ptrdiff_t>(j * dims));
    }
  };

  bool converged = false;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    const bool changed = assign();
    if (iter > 0 && !changed) {
      converged = true;
      break;
    }
    update();
  }
  if (!converged) assign();

  for (double d : dist) result.inertia += d;
  return result;
}

double kmeans_flops(std::size_t rows, std::size_t dims, std::size_t k, const KMeansResult& run) {
  const double nd = static_cast<double>(rows) * static_cast<double>(dims);
  return static_cast<double>(run.assignment_passes) * 3.0 * nd * static_cast<double>(k) +
         static_cast<double>(run.updates) * nd;
}

std::vector<double> kmeans_sweep_sequential(const Matrix& data, std::size_t max_k,
                                            std::size_t max_iter) {
  if (max_k < 1) throw UsageError("kmeans sweep: K must be at least 1");
  std::vector<double> out;
  out.reserve(max_k);
  for (std::size_t k = 1; k <= max_k; ++k) out.push_back(kmeans_lloyd(data, k, max_iter).inertia);
  return out;
}

SweepAssignment snake_assignment(std::size_t max_k, int parts) {
  if (parts < 1) throw UsageError("snake_assignment: need at least one rank");
  const auto p = static_cast<std::size_t>(parts);
  SweepAssignment out(p);
  for (std::size_t t = 0; t < max_k; ++t) {
    const std::size_t pass = t / p;
    const std::size_t slot = t % p;
    out[pass % 2 == 0 ? slot : p - 1 - slot].push_back(max_k - t);
  }
  return out;
}

std::optional<std::vector<double>> kmeans_sweep_distributed(Communicator& comm,
                                                            const Matrix& data,
                                                            std::size_t max_k,
                                                            std::size_t max_iter,
                                                            const ComputeModel& compute) {
  if (max_k < 1) throw UsageError("kmeans sweep: K must be at least 1");
  const auto assignment = snake_assignment(max_k, comm.size());
  constexpr std::size_t kEntry = sizeof(std::int64_t) + sizeof(double);

  Bytes mine;
  for (std::size_t k : assignment[static_cast<std::size_t>(comm.rank())]) {
    const auto run = kmeans_lloyd(data, k, max_iter);
    comm.advance(compute.us_per_flop * kmeans_flops(data.rows, data.cols, k, run));
    put(mine, static_cast<std::int64_t>(k));
    put(mine, run.inertia);
  }

  std::vector<std::size_t> counts;
  for (const auto& ks : assignment) counts.push_back(ks.size());
  const Bytes all = gatherv(comm, mine, VectorLayout::packed(std::move(counts), kEntry), 0);
  if (comm.rank() != 0) return std::nullopt;

  std::vector<double> inertia(max_k, 0.0);
  for (std::size_t at = 0; at < all.size(); at += kEntry) {
    const auto k = static_cast<std::size_t>(get<std::int64_t>(all, at));
    inertia[k - 1] = get<double>(all, at + sizeof(std::int64_t));
  }
  return inertia;
}

// ---------------------------------------------------------------------------
// Matrix multiplication

Matrix matmul_sequential(const Matrix& a, const Matrix& b) {
  check_matmul_shapes(a, b);
  Matrix c(a.rows, b.cols);
  multiply_rows(a, b, {0, a.rows}, c.values);
  return c;
}

std::optional<Matrix> matmul_distributed(Communicator& comm, const Matrix& a, const Matrix& b,
                                         const ComputeModel& compute) {
  check_matmul_shapes(a, b);
  const auto rows = split_rows(a.rows, comm.size(), comm.rank());
  std::vector<double> block(rows.size() * b.cols);
  multiply_rows(a, b, rows, block);
  comm.advance(compute.us_per_flop * matmul_flops(rows.size(), a.cols, b.cols));

  std::vector<std::size_t> counts;
  for (int r = 0; r < comm.size(); ++r) counts.push_back(split_rows(a.rows, comm.size(), r).size());
  const auto bytes = std::as_bytes(std::span<const double>(block));
  const Bytes all =
      gatherv(comm, bytes, VectorLayout::packed(std::move(counts), b.cols * sizeof(double)), 0);
  if (comm.rank() != 0) return std::nullopt;

  Matrix c(a.rows, b.cols);
  if (!all.empty()) std::memcpy(c.values.data(), all.data(), all.size());
  return c;
}

// ---------------------------------------------------------------------------
// Harness

namespace {

struct KnnFixture {
  Dataset train;
  Dataset test;
};

KnnFixture knn_fixture(const BenchConfig& cfg) {
  const auto& ml = cfg.ml;
  if (ml.dataset_path) {
    const Dataset all = load_csv(*ml.dataset_path);
    if (all.size() < 2) throw ConfigError("knn: dataset needs at least two rows");
    const std::size_t test_rows = std::max<std::size_t>(1, all.size() / 5);
    return {all.slice(0, all.size() - test_rows), all.slice(all.size() - test_rows, all.size())};
  }
  const Dataset all = make_blobs(ml.knn_train + ml.knn_test, ml.features, 3, cfg.seed, 4.0);
  return {all.slice(0, ml.knn_train), all.slice(ml.knn_train, all.size())};
}

Matrix kmeans_fixture(const BenchConfig& cfg) {
  if (cfg.ml.dataset_path) return load_csv(*cfg.ml.dataset_path).features;
  return group_by_label(make_blobs(cfg.ml.kmeans_points, cfg.ml.features, 10, cfg.seed, 1.0))
      .features;
}

}  // namespace

SpeedupResult run_ml_benchmark(const BenchConfig& cfg, const OutputTamper& tamper) {
  validate(cfg);
  if (family_of(cfg.benchmark) != BenchFamily::ml) {
    throw ConfigError(fmt::format("{} is not a machine-learning benchmark", name_of(cfg.benchmark)));
  }
  const ComputeModel compute{cfg.ml.us_per_flop};
  SpeedupResult out;
  out.benchmark = cfg.benchmark;
  out.np = cfg.np;
  std::vector<double> clocks;
  std::vector<double> expected;
  std::vector<double> produced;

  switch (cfg.benchmark) {
    case Benchmark::knn: {
      const auto fx = knn_fixture(cfg);
      expected = {knn_sequential(fx.train, fx.test, cfg.ml.knn_k)};
      out.sequential_us =
          compute.us_per_flop * knn_flops(fx.train.size(), fx.train.dims(), fx.test.size());
      auto got = spawn_world(
          cfg.np, cfg.channel,
          [&](RankContext& c) { return knn_distributed(c, fx.train, fx.test, cfg.ml.knn_k, compute); },
          &clocks);
      produced = {*got[0]};
      break;
    }
    case Benchmark::kmeans_sweep: {
      const Matrix data = kmeans_fixture(cfg);
      for (std::size_t k = 1; k <= cfg.ml.clusters; ++k) {
        const auto run = kmeans_lloyd(data, k, cfg.ml.max_iter);
        expected.push_back(run.inertia);
        out.sequential_us += compute.us_per_flop * kmeans_flops(data.rows, data.cols, k, run);
      }
      auto got = spawn_world(
          cfg.np, cfg.channel,
          [&](RankContext& c) {
            return kmeans_sweep_distributed(c, data, cfg.ml.clusters, cfg.ml.max_iter, compute);
          },
          &clocks);
      produced = std::move(*got[0]);
      break;
    }
    default: {
      const Matrix a = random_matrix(cfg.ml.matmul_m, cfg.ml.matmul_n, cfg.seed);
      const Matrix b = random_matrix(cfg.ml.matmul_n, cfg.ml.matmul_p, cfg.seed + 1);
      expected = matmul_sequential(a, b).values;
      out.sequential_us = compute.us_per_flop * matmul_flops(a.rows, a.cols, b.cols);
      auto got = spawn_world(
          cfg.np, cfg.channel,
          [&](RankContext& c) { return matmul_distributed(c, a, b, compute); }, &clocks);
      produced = std::move(got[0]->values);
      break;
    }
  }

  if (tamper) tamper(produced);
  out.correct = bitwise_equal(produced, expected);
  out.distributed_us = clocks[0];
  if (!(out.distributed_us > 0.0)) {
    throw MeasurementError("distributed run took no simulated time; speedup is undefined");
  }
  out.speedup = out.sequential_us / out.distributed_us;
  return out;
}

}  // namespace mpbench
