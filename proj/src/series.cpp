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

#include "cpd/series.hpp"

#include <cmath>
#include <stdexcept>

namespace cpd {

TimeSeries::TimeSeries(std::vector<double> values, int64_t dim, int64_t start_index)
    : values_(std::move(values)), dim_(dim), start_(start_index) {
  if (dim_ < 1) {
    throw std::invalid_argument("series dimension must be >= 1");
  }
  if (values_.empty() || values_.size() % static_cast<size_t>(dim_) != 0) {
    throw std::invalid_argument("series values must be a non-empty T x d matrix");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("series contains non-finite values");
    }
  }
}

std::span<const double> TimeSeries::row(int64_t t) const {
  if (t < start_ || t > last_index()) {
    throw std::out_of_range("time index outside series range");
  }
  const size_t offset = static_cast<size_t>(t - start_) * static_cast<size_t>(dim_);
  return {values_.data() + offset, static_cast<size_t>(dim_)};
}

EmbeddedSeries::EmbeddedSeries(const TimeSeries& series, int64_t k)
    : series_(&series), k_(k) {}

void EmbeddedSeries::copy_into(int64_t t, std::span<double> out) const {
  if (!contains(t)) {
    throw std::out_of_range("time index outside embedded range");
  }
  const int64_t d = series_->dim();
  for (int64_t i = 0; i < k_; ++i) {
    const auto src = series_->row(t - i);
    std::copy(src.begin(), src.end(), out.begin() + static_cast<size_t>(i * d));
  }
}

CombinedVector EmbeddedSeries::at(int64_t t) const {
  CombinedVector v;
  v.time_index = t;
  v.data.resize(static_cast<size_t>(dim()));
  copy_into(t, v.data);
  return v;
}

Annotation::Annotation(std::vector<int64_t> cps) : true_cps(std::move(cps)) {
  for (size_t i = 0; i < true_cps.size(); ++i) {
    if (true_cps[i] < 1) {
      throw std::invalid_argument("change-point positions must be >= 1");
    }
    if (i > 0 && true_cps[i] <= true_cps[i - 1]) {
      throw std::invalid_argument("change-point positions must be strictly increasing");
    }
  }
}

EmbeddedSeries embed(const TimeSeries& series, int64_t k) {
  if (k < 1) {
    throw std::invalid_argument("embedding depth k must be >= 1");
  }
  if (series.length() < k) {
    throw std::invalid_argument("series too short for embedding");
  }
  return EmbeddedSeries(series, k);
}

MiniBatch mini_batch(const EmbeddedSeries& embedded, int64_t t, int64_t n) {
  if (n < 1) {
    throw std::invalid_argument("mini-batch size must be >= 1");
  }
  if (!embedded.contains(t) || !embedded.contains(t - n + 1)) {
    throw std::out_of_range("batch window out of range");
  }
  MiniBatch batch;
  batch.vectors.reserve(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    batch.vectors.push_back(embedded.at(t - i));
  }
  return batch;
}

}  // namespace cpd
