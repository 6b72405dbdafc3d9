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

#include "cpd/datagen.hpp"

#include <cmath>
#include <stdexcept>

#include "cpd/rng.hpp"

namespace cpd {

namespace {

void check_geometry(const SyntheticSpec& spec) {
  if (spec.segment_length < 1) {
    throw std::invalid_argument("segment_length must be >= 1");
  }
  if (spec.num_segments < 2) {
    throw std::invalid_argument("num_segments must be >= 2");
  }
}

Annotation segment_annotation(int64_t segment_length, int64_t num_segments) {
  std::vector<int64_t> cps;
  cps.reserve(static_cast<size_t>(num_segments - 1));
  for (int64_t j = 1; j < num_segments; ++j) {
    cps.push_back(segment_length * j);
  }
  return Annotation(std::move(cps));
}

}  // namespace

Family family_from_name(const std::string& name) {
  if (name == "mean_jumps") {
    return Family::kMeanJumps;
  }
  if (name == "variance_jumps") {
    return Family::kVarianceJumps;
  }
  if (name == "cov_jumps") {
    return Family::kCovJumps;
  }
  if (name == "class_alternation") {
    return Family::kClassAlternation;
  }
  throw std::invalid_argument("unknown synthetic family: " + name);
}

std::string family_name(Family family) {
  switch (family) {
    case Family::kMeanJumps:
      return "mean_jumps";
    case Family::kVarianceJumps:
      return "variance_jumps";
    case Family::kCovJumps:
      return "cov_jumps";
    case Family::kClassAlternation:
      return "class_alternation";
  }
  return "unknown";
}

GeneratedSeries gen_mean_jumps(const SyntheticSpec& spec) {
  check_geometry(spec);
  SeededRng rng(spec.seed);
  std::vector<double> values;
  values.reserve(static_cast<size_t>(spec.segment_length * spec.num_segments));
  double mu = 0.0;
  for (int64_t segment = 1; segment <= spec.num_segments; ++segment) {
    if (segment > 1) {
      mu += 0.2 * static_cast<double>(segment);
    }
    for (int64_t i = 0; i < spec.segment_length; ++i) {
      values.push_back(mu + rng.gaussian());
    }
  }
  return {TimeSeries(std::move(values), 1),
          segment_annotation(spec.segment_length, spec.num_segments), false};
}

GeneratedSeries gen_variance_jumps(const SyntheticSpec& spec) {
  check_geometry(spec);
  SeededRng rng(spec.seed);
  std::vector<double> values;
  values.reserve(static_cast<size_t>(spec.segment_length * spec.num_segments));
  for (int64_t segment = 1; segment <= spec.num_segments; ++segment) {
    const double sigma =
        segment % 2 == 1 ? 1.0 : 1.0 + 0.25 * static_cast<double>(segment);
    for (int64_t i = 0; i < spec.segment_length; ++i) {
      values.push_back(sigma * rng.gaussian());
    }
  }
  return {TimeSeries(std::move(values), 1),
          segment_annotation(spec.segment_length, spec.num_segments), false};
}

GeneratedSeries gen_cov_jumps(const SyntheticSpec& spec) {
  check_geometry(spec);
  if (spec.num_segments > 10) {
    throw std::invalid_argument(
        "degenerate covariance: |0.1 N| > 1 beyond 10 segments");
  }
  SeededRng rng(spec.seed);
  std::vector<double> values;
  values.reserve(static_cast<size_t>(2 * spec.segment_length * spec.num_segments));
  bool degenerate = false;
  for (int64_t segment = 1; segment <= spec.num_segments; ++segment) {
    const double rho = (segment % 2 == 1 ? -0.1 : 0.1) * static_cast<double>(segment);
    if (std::abs(rho) >= 1.0) {
      degenerate = true;
    }
    // 2x2 Cholesky-style factor: x1 = z1, x2 = rho z1 + sqrt(1-rho^2) z2.
    const double cross = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    for (int64_t i = 0; i < spec.segment_length; ++i) {
      const double z1 = rng.gaussian();
      const double z2 = rng.gaussian();
      values.push_back(z1);
      values.push_back(rho * z1 + cross * z2);
    }
  }
  return {TimeSeries(std::move(values), 2),
          segment_annotation(spec.segment_length, spec.num_segments), degenerate};
}

GeneratedSeries gen_class_alternation(const LabeledPool& pool, int64_t segment_length,
                                      int64_t num_segments, double noise_sigma,
                                      uint64_t seed) {
  if (segment_length < 1 || num_segments < 2) {
    throw std::invalid_argument("invalid segment geometry");
  }
  if (pool.positive.empty() || pool.negative.empty()) {
    throw std::invalid_argument("missing class examples");
  }
  const size_t dim = pool.positive.front().size();
  for (const auto& v : pool.positive) {
    if (v.size() != dim) {
      throw std::invalid_argument("pool vectors must share one dimension");
    }
  }
  for (const auto& v : pool.negative) {
    if (v.size() != dim) {
      throw std::invalid_argument("pool vectors must share one dimension");
    }
  }

  SeededRng rng(seed);
  const int64_t total = segment_length * num_segments;
  std::vector<double> values;
  values.reserve(static_cast<size_t>(total) * dim);
  for (int64_t segment = 1; segment <= num_segments; ++segment) {
    const auto& source = segment % 2 == 0 ? pool.negative : pool.positive;
    for (int64_t i = 0; i < segment_length; ++i) {
      const auto& v = source[static_cast<size_t>(rng.next_u64() % source.size())];
      values.insert(values.end(), v.begin(), v.end());
    }
  }

  // Standardize each column over the whole series, then add noise. A
  // zero-variance column stays centered at zero instead of dividing by 0.
  for (size_t j = 0; j < dim; ++j) {
    double mean = 0.0;
    for (int64_t t = 0; t < total; ++t) {
      mean += values[static_cast<size_t>(t) * dim + j];
    }
    mean /= static_cast<double>(total);
    double var = 0.0;
    for (int64_t t = 0; t < total; ++t) {
      const double c = values[static_cast<size_t>(t) * dim + j] - mean;
      var += c * c;
    }
    var /= static_cast<double>(total);
    const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
    for (int64_t t = 0; t < total; ++t) {
      double& x = values[static_cast<size_t>(t) * dim + j];
      x = (x - mean) * scale;
    }
  }
  if (noise_sigma > 0.0) {
    for (double& x : values) {
      x += noise_sigma * rng.gaussian();
    }
  }

  return {TimeSeries(std::move(values), static_cast<int64_t>(dim)),
          segment_annotation(segment_length, num_segments), false};
}

GeneratedSeries generate(const SyntheticSpec& spec, const LabeledPool* pool) {
  switch (spec.family) {
    case Family::kMeanJumps:
      return gen_mean_jumps(spec);
    case Family::kVarianceJumps:
      return gen_variance_jumps(spec);
    case Family::kCovJumps:
      return gen_cov_jumps(spec);
    case Family::kClassAlternation:
      if (pool == nullptr) {
        throw std::invalid_argument("class alternation requires a labeled pool");
      }
      return gen_class_alternation(*pool, spec.segment_length, spec.num_segments,
                                   spec.noise_sigma, spec.seed);
  }
  throw std::invalid_argument("unknown synthetic family");
}

}  // namespace cpd
