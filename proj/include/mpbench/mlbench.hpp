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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpbench/core.hpp"
#include "mpbench/transport.hpp"

namespace mpbench {

/// Dense row-major matrix of float64.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values).subspan(r * cols, cols);
  }

  static Matrix identity(std::size_t n);
};

/// True when both matrices have the same shape and identical bit patterns.
bool bitwise_equal(const Matrix& a, const Matrix& b);
bool bitwise_equal(std::span<const double> a, std::span<const double> b);

/// Labelled feature matrix. `labels` is empty for unlabelled data.
struct Dataset {
  Matrix features;
  std::vector<int> labels;

  std::size_t size() const noexcept { return features.rows; }
  std::size_t dims() const noexcept { return features.cols; }
  /// Rows [begin, end) as a new dataset.
  Dataset slice(std::size_t begin, std::size_t end) const;
};

/// CSV without header: integer label in column 0, float features after it.
/// Malformed rows raise ConfigError with `source:line`.
Dataset parse_csv(std::istream& in, std::string_view source = "<input>");
Dataset load_csv(const std::string& path);
/// Shortest round-trip decimal form, so parse_csv(write_csv(d)) == d.
void write_csv(std::ostream& out, const Dataset& data);

/// Isotropic Gaussian blobs. Point i belongs to blob i % centers.
Dataset make_blobs(std::size_t n, std::size_t dims, std::size_t centers, std::uint64_t seed,
                   double spread = 1.0);

/// Rows reordered by ascending label, stable within a label.
Dataset group_by_label(const Dataset& data);
/// Entries uniform in [-1, 1).
Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed);

/// Contiguous block of rows owned by `part` when `total` rows are split over
/// `parts`; the first total % parts blocks get one extra row.
struct RowBlock {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
};
RowBlock split_rows(std::size_t total, int parts, int part);

/// Simulated compute charge for distributed kernels, applied via advance().
struct ComputeModel {
  double us_per_flop = 0.0;
};

double knn_flops(std::size_t train_rows, std::size_t dims, std::size_t test_rows);
double matmul_flops(std::size_t rows, std::size_t inner, std::size_t cols);

// --- k-nearest neighbours -------------------------------------------------

/// Neighbours ordered by (squared distance, train index); majority vote with
/// ties going to the smallest label.
int knn_predict(const Dataset& train, std::span<const double> point, std::size_t k);
double knn_sequential(const Dataset& train, const Dataset& test, std::size_t k);
/// Every rank holds both datasets; rank r scores its block of test rows and
/// the correct-prediction counts are summed at rank 0. Empty on other ranks.
std::optional<double> knn_distributed(Communicator& comm, const Dataset& train,
                                      const Dataset& test, std::size_t k,
                                      const ComputeModel& compute = {});

// --- k-means ----------------------------------------------------------------

struct KMeansResult {
  double inertia = 0.0;
  std::size_t assignment_passes = 0;
  std::size_t updates = 0;
};

/// Lloyd's algorithm with centroid j seeded from row floor(j * N / k). An
/// empty cluster is re-seeded at the point farthest from its own centroid.
KMeansResult kmeans_lloyd(const Matrix& data, std::size_t k, std::size_t max_iter);
double kmeans_flops(std::size_t rows, std::size_t dims, std::size_t k, const KMeansResult& run);

/// Inertia for k = 1..max_k, index k-1.
std::vector<double> kmeans_sweep_sequential(const Matrix& data, std::size_t max_k,
                                            std::size_t max_iter);

/// assignment[r] lists the k values handled by rank r.
using SweepAssignment = std::vector<std::vector<std::size_t>>;

/// Deals k = K..1 over ranks 0..P-1, then P-1..0, and so on, so that costly
/// and cheap k values mix on every rank.
SweepAssignment snake_assignment(std::size_t max_k, int parts);

std::optional<std::vector<double>> kmeans_sweep_distributed(Communicator& comm,
                                                            const Matrix& data,
                                                            std::size_t max_k,
                                                            std::size_t max_iter,
                                                            const ComputeModel& compute = {});

// --- matrix multiplication ------------------------------------------------

Matrix matmul_sequential(const Matrix& a, const Matrix& b);
/// Rank r multiplies its block of A's rows; blocks are gathered at rank 0.
std::optional<Matrix> matmul_distributed(Communicator& comm, const Matrix& a, const Matrix& b,
                                         const ComputeModel& compute = {});

// --- benchmark harness ----------------------------------------------------

struct SpeedupResult {
  Benchmark benchmark = Benchmark::matmul;
  int np = 1;
  double sequential_us = 0.0;
  double distributed_us = 0.0;
  double speedup = 0.0;
  bool correct = false;

  bool operator==(const SpeedupResult&) const = default;
};

/// Hook applied to the distributed output before it is compared with the
/// baseline. Tests use it to inject faults.
using OutputTamper = std::function<void(std::span<double>)>;

/// Runs the sequential baseline and the distributed version on the simulated
/// transport and compares them bit for bit.
SpeedupResult run_ml_benchmark(const BenchConfig& cfg, const OutputTamper& tamper = {});

}  // namespace mpbench
