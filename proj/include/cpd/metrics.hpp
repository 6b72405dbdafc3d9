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

struct MatchedPair {
  int64_t true_cp = 0;
  int64_t detected_cp = 0;
};

struct MatchResult {
  std::vector<MatchedPair> pairs;       // sorted by true position
  std::vector<int64_t> true_positives;  // matched true positions, sorted
};

// One-to-one matching of detections to true change points: candidate pairs
// with |detected - true| < margin are taken greedily in increasing
// distance order (ties toward the earlier detection), each position used
// at most once. One-to-one keeps precision <= 1 even when several true
// points sit near a single detection.
MatchResult match_change_points(std::span<const int64_t> true_cps,
                                std::span<const int64_t> detected_cps, int64_t margin);

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// precision = tp/num_detected (0 when nothing was detected),
// recall = tp/num_true, f1 their harmonic mean (0 when both are 0).
// Throws std::invalid_argument when num_true is 0.
PrecisionRecallF1 precision_recall_f1(int64_t tp_count, int64_t num_detected,
                                      int64_t num_true);

// Rand index of the two segmentations induced by the change-point lists
// over [1, total]: the fraction of observation pairs that are in the same
// segment under both segmentations or in different segments under both.
// Computed from the segment-overlap contingency counts, never by pair
// enumeration. A change point at c starts a new segment at c, so the
// segment id of index i is the number of change points <= i.
double rand_index(std::span<const int64_t> true_cps,
                  std::span<const int64_t> detected_cps, int64_t total);

// Literal O(total^2) pair enumeration with the same contract; kept as an
// independent oracle for rand_index.
double rand_index_bruteforce(std::span<const int64_t> true_cps,
                             std::span<const int64_t> detected_cps, int64_t total);

struct EvalReport {
  int64_t tp_count = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double rand_index = 0.0;
  int64_t margin = 50;
  MatchResult matches;
  int64_t num_true = 0;
  int64_t num_detected = 0;
  int64_t length = 0;
};

// Full quality report for one series.
EvalReport evaluate_detections(std::span<const int64_t> true_cps,
                               std::span<const int64_t> detected_cps, int64_t total,
                               int64_t margin = 50);

}  // namespace cpd
