// Copyright 2026 The cpd authors.
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

#include <cstdint>
#include <span>
#include <vector>

namespace cpd {

// A time series of T observations, each a d-dimensional real vector.
// Time indices are 1-based by default (start_index), the usual convention
// in the change-point literature. Immutable after construction and safe to
// read from multiple threads.
class TimeSeries {
 public:
  // values is row-major T x dim. Throws std::invalid_argument on empty
  // input, on a size that is not a multiple of dim, or on non-finite
  // entries; NaNs are rejected at ingestion rather than imputed.
  TimeSeries(std::vector<double> values, int64_t dim, int64_t start_index = 1);

  int64_t length() const { return static_cast<int64_t>(values_.size()) / dim_; }
  int64_t dim() const { return dim_; }
  int64_t start_index() const { return start_; }
  int64_t last_index() const { return start_ + length() - 1; }

  // Observation at global time index t (start_index-based).
  std::span<const double> row(int64_t t) const;
  double value(int64_t t, int64_t j) const { return row(t)[static_cast<size_t>(j)]; }
  std::span<const double> raw() const { return values_; }

 private:
  std::vector<double> values_;
  int64_t dim_;
  int64_t start_;
};

// One combined vector X(t) = [x(t); x(t-1); ...; x(t-k+1)], length k*d.
struct CombinedVector {
  std::vector<double> data;
  int64_t time_index = 0;
};

// Lazy view of the k-lag autoregressive embedding of a series. Combined
// vectors are materialized on demand so memory stays O(T*d) regardless of
// k. The source series must outlive the view.
class EmbeddedSeries {
 public:
  EmbeddedSeries(const TimeSeries& series, int64_t k);

  int64_t k() const { return k_; }
  int64_t dim() const { return k_ * series_->dim(); }
  int64_t first_index() const { return series_->start_index() + k_ - 1; }
  int64_t last_index() const { return series_->last_index(); }
  int64_t size() const { return series_->length() - k_ + 1; }
  bool contains(int64_t t) const { return t >= first_index() && t <= last_index(); }

  // Writes X(t) into out (size must be k*d). Throws std::out_of_range if t
  // is outside the embedded range.
  void copy_into(int64_t t, std::span<double> out) const;
  CombinedVector at(int64_t t) const;

  const TimeSeries& series() const { return *series_; }

 private:
  const TimeSeries* series_;
  int64_t k_;
};

// n consecutive combined vectors ending at a time index, ordered
// X(t), X(t-1), ..., X(t-n+1).
struct MiniBatch {
  std::vector<CombinedVector> vectors;

  int64_t size() const { return static_cast<int64_t>(vectors.size()); }
  int64_t end_index() const { return vectors.front().time_index; }
};

// Sorted list of true change-point positions.
struct Annotation {
  std::vector<int64_t> true_cps;

  Annotation() = default;
  // Throws std::invalid_argument unless positions are strictly increasing
  // and >= 1.
  explicit Annotation(std::vector<int64_t> cps);
};

// Autoregressive embedding with depth k >= 1. Requires T >= k.
EmbeddedSeries embed(const TimeSeries& series, int64_t k);

// The n vectors at indices t, t-1, ..., t-n+1. All indices must exist in
// the embedded range.
MiniBatch mini_batch(const EmbeddedSeries& embedded, int64_t t, int64_t n);

}  // namespace cpd
