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
#include <string>
#include <vector>

#include "cpd/series.hpp"

namespace cpd {

enum class Family { kMeanJumps, kVarianceJumps, kCovJumps, kClassAlternation };

Family family_from_name(const std::string& name);
std::string family_name(Family family);

// Geometry and seeding of one synthetic benchmark series. Change points
// sit at segment_length * j for j = 1..num_segments-1; the observation at
// segment_length * j + 1 is the first one of the new regime.
struct SyntheticSpec {
  Family family = Family::kMeanJumps;
  int64_t segment_length = 200;
  int64_t num_segments = 10;
  double noise_sigma = 0.0;  // class alternation only
  uint64_t seed = 0;
  int64_t num_series = 10;  // fan-out handled by the CLI, one call = one series
};

// Labeled vector pool backing the class-alternation construction.
struct LabeledPool {
  std::vector<std::vector<double>> positive;
  std::vector<std::vector<double>> negative;
};

struct GeneratedSeries {
  TimeSeries series;
  Annotation annotation;
  // set when a covariance segment is exactly singular (|rho| = 1)
  bool degenerate_covariance = false;
};

// 1-d Gaussian segments with a growing mean: mu_1 = 0,
// mu_N = mu_{N-1} + 0.2 N, unit variance.
GeneratedSeries gen_mean_jumps(const SyntheticSpec& spec);

// 1-d zero-mean Gaussian segments, sigma_N = 1 for odd N and 1 + 0.25 N
// for even N.
GeneratedSeries gen_variance_jumps(const SyntheticSpec& spec);

// 2-d zero-mean Gaussian segments with unit variances and correlation
// -0.1 N (odd N) / +0.1 N (even N). Throws "degenerate covariance" when a
// segment would need |rho| > 1 (num_segments > 10); |rho| = 1 at N = 10 is
// generated through the singular factorization and flagged.
GeneratedSeries gen_cov_jumps(const SyntheticSpec& spec);

// Segments sampled with replacement from the negative class pool (even N)
// or positive pool (odd N); every feature column is then standardized to
// zero mean and unit variance over the whole series, and white Gaussian
// noise with the given sigma is added on top.
GeneratedSeries gen_class_alternation(const LabeledPool& pool, int64_t segment_length,
                                      int64_t num_segments, double noise_sigma,
                                      uint64_t seed);

// Dispatch on spec.family; pool is only consulted for class alternation.
GeneratedSeries generate(const SyntheticSpec& spec, const LabeledPool* pool = nullptr);

}  // namespace cpd
