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

#include "cpd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpd {

namespace {

void check_sorted(std::span<const int64_t> cps, int64_t total, const char* what) {
  for (size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] < 1 || cps[i] > total) {
      throw std::invalid_argument(std::string(what) + " positions must lie in [1, T]");
    }
    if (i > 0 && cps[i] <= cps[i - 1]) {
      throw std::invalid_argument(std::string(what) +
                                  " positions must be strictly increasing");
    }
  }
}

// Segment lengths of [1, total] split by the change points; a change point
// at c is the first index of the new segment. Empty segments (c == 1 or
// duplicates are already rejected) are skipped.
std::vector<int64_t> segment_lengths(std::span<const int64_t> cps, int64_t total) {
  std::vector<int64_t> lengths;
  int64_t prev = 1;
  for (int64_t c : cps) {
    if (c > prev) {
      lengths.push_back(c - prev);
    }
    prev = c;
  }
  lengths.push_back(total + 1 - prev);
  return lengths;
}

int64_t pairs_of(int64_t n) { return n * (n - 1) / 2; }

}  // namespace

MatchResult match_change_points(std::span<const int64_t> true_cps,
                                std::span<const int64_t> detected_cps, int64_t margin) {
  if (margin < 1) {
    throw std::invalid_argument("margin must be >= 1");
  }

  struct Candidate {
    int64_t distance;
    int64_t detected;
    int64_t true_cp;
    size_t true_idx;
    size_t det_idx;
  };
  std::vector<Candidate> candidates;
  for (size_t i = 0; i < true_cps.size(); ++i) {
    for (size_t j = 0; j < detected_cps.size(); ++j) {
      const int64_t dist = std::abs(detected_cps[j] - true_cps[i]);
      if (dist < margin) {
        candidates.push_back({dist, detected_cps[j], true_cps[i], i, j});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) {
      return a.distance < b.distance;
    }
    if (a.detected != b.detected) {
      return a.detected < b.detected;  // tie broken toward the earlier detection
    }
    return a.true_cp < b.true_cp;
  });

  std::vector<bool> true_used(true_cps.size(), false);
  std::vector<bool> det_used(detected_cps.size(), false);
  MatchResult result;
  for (const auto& c : candidates) {
    if (true_used[c.true_idx] || det_used[c.det_idx]) {
      continue;
    }
    true_used[c.true_idx] = true;
    det_used[c.det_idx] = true;
    result.pairs.push_back({c.true_cp, c.detected});
    result.true_positives.push_back(c.true_cp);
  }
  std::sort(result.pairs.begin(), result.pairs.end(),
            [](const MatchedPair& a, const MatchedPair& b) { return a.true_cp < b.true_cp; });
  std::sort(result.true_positives.begin(), result.true_positives.end());
  return result;
}

PrecisionRecallF1 precision_recall_f1(int64_t tp_count, int64_t num_detected,
                                      int64_t num_true) {
  if (num_true == 0) {
    throw std::invalid_argument("no true change points to evaluate");
  }
  if (tp_count < 0 || tp_count > std::min(num_detected, num_true)) {
    throw std::invalid_argument("tp_count exceeds the matched bound");
  }
  PrecisionRecallF1 out;
  out.precision =
      num_detected == 0 ? 0.0
                        : static_cast<double>(tp_count) / static_cast<double>(num_detected);
  out.recall = static_cast<double>(tp_count) / static_cast<double>(num_true);
  out.f1 = (out.precision + out.recall) == 0.0
               ? 0.0
               : 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

double rand_index(std::span<const int64_t> true_cps,
                  std::span<const int64_t> detected_cps, int64_t total) {
  if (total < 2) {
    throw std::invalid_argument("too few observations");
  }
  check_sorted(true_cps, total, "true change-point");
  check_sorted(detected_cps, total, "detected change-point");

  const auto s = segment_lengths(true_cps, total);
  const auto s_hat = segment_lengths(detected_cps, total);

  // Interval segmentations overlap in a single merge sweep; n_ij of the
  // contingency table is the length of each merged piece.
  int64_t same_same = 0;
  size_t i = 0, j = 0;
  int64_t rem_i = s[0], rem_j = s_hat[0];
  while (true) {
    const int64_t piece = std::min(rem_i, rem_j);
    same_same += pairs_of(piece);
    rem_i -= piece;
    rem_j -= piece;
    if (rem_i == 0) {
      if (++i == s.size()) {
        break;
      }
      rem_i = s[i];
    }
    if (rem_j == 0) {
      if (++j == s_hat.size()) {
        break;
      }
      rem_j = s_hat[j];
    }
  }

  int64_t same_s = 0;
  for (int64_t len : s) {
    same_s += pairs_of(len);
  }
  int64_t same_s_hat = 0;
  for (int64_t len : s_hat) {
    same_s_hat += pairs_of(len);
  }

  const int64_t all_pairs = pairs_of(total);
  // agreements = pairs together in both + pairs apart in both
  const int64_t agreements = all_pairs - same_s - same_s_hat + 2 * same_same;
  return static_cast<double>(agreements) / static_cast<double>(all_pairs);
}

double rand_index_bruteforce(std::span<const int64_t> true_cps,
                             std::span<const int64_t> detected_cps, int64_t total) {
  if (total < 2) {
    throw std::invalid_argument("too few observations");
  }
  check_sorted(true_cps, total, "true change-point");
  check_sorted(detected_cps, total, "detected change-point");

  auto segment_of = [](std::span<const int64_t> cps, int64_t idx) {
    // number of change points <= idx
    return std::upper_bound(cps.begin(), cps.end(), idx) - cps.begin();
  };

  int64_t agreements = 0;
  for (int64_t a = 1; a <= total; ++a) {
    for (int64_t b = a + 1; b <= total; ++b) {
      const bool together_true = segment_of(true_cps, a) == segment_of(true_cps, b);
      const bool together_det =
          segment_of(detected_cps, a) == segment_of(detected_cps, b);
      if (together_true == together_det) {
        ++agreements;
      }
    }
  }
  return static_cast<double>(agreements) / static_cast<double>(pairs_of(total));
}

EvalReport evaluate_detections(std::span<const int64_t> true_cps,
                               std::span<const int64_t> detected_cps, int64_t total,
                               int64_t margin) {
  if (true_cps.empty()) {
    throw std::invalid_argument("no true change points to evaluate");
  }
  EvalReport report;
  report.margin = margin;
  report.num_true = static_cast<int64_t>(true_cps.size());
  report.num_detected = static_cast<int64_t>(detected_cps.size());
  report.length = total;
  report.matches = match_change_points(true_cps, detected_cps, margin);
  report.tp_count = static_cast<int64_t>(report.matches.true_positives.size());
  const auto prf = precision_recall_f1(report.tp_count, report.num_detected, report.num_true);
  report.precision = prf.precision;
  report.recall = prf.recall;
  report.f1 = prf.f1;
  report.rand_index = rand_index(true_cps, detected_cps, total);
  return report;
}

}  // namespace cpd
