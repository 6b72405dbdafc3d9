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

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "cpd/net.hpp"
#include "cpd/series.hpp"

namespace cpd {

// Shared configuration of the two online detectors.
//
// k        embedding depth of the combined vectors
// n        mini-batch size (must divide l so the score recurrence stays on
//          the n-grid)
// l        lag between the reference and test batches, n <= l
// n_epochs optimizer iterations on each batch pair
// alpha    relative weight in the density-ratio loss (ONNR only)
struct DetectorConfig {
  int64_t k = 1;
  int64_t n = 10;
  int64_t l = 100;
  int64_t n_epochs = 10;
  double lr = 0.01;
  double alpha = 0.1;
  std::vector<int64_t> hidden = {32};
  uint64_t seed = 0;

  // Throws std::invalid_argument listing every violated constraint.
  void validate() const;
};

// Peak-to-change-point extraction parameters. NaN threshold means the
// per-series adaptive default; min_distance 0 means the lag l.
struct PeakParams {
  double threshold = std::numeric_limits<double>::quiet_NaN();
  int64_t min_distance = 0;
};

// Raw dissimilarities d(t), their running mean d_bar(t) and, once
// shift_offline has been applied, the offline-aligned view
// d_bar'(t) = d_bar(t + l + n). Scores live on the n-grid starting at the
// first processed step. The shifted view is exactly the smoothed array
// re-indexed by -(l + n), so it is stored as an offset, not a copy.
struct ScoreSeries {
  int64_t start = 0;
  int64_t step = 1;
  std::vector<double> raw;
  std::vector<double> smoothed;
  bool shifted = false;
  int64_t shift_offset = 0;

  size_t size() const { return raw.size(); }
  int64_t time_at(size_t j) const { return start + step * static_cast<int64_t>(j); }
  int64_t shifted_time_at(size_t j) const { return time_at(j) - shift_offset; }
  int64_t first_shifted_time() const { return start - shift_offset; }
  int64_t last_shifted_time() const {
    return time_at(size() - 1) - shift_offset;
  }
};

struct DetectionResult {
  ScoreSeries score;
  std::vector<int64_t> detected_cps;  // positions on the shifted time base
  double threshold = 0.0;
  int64_t min_distance = 0;

  // loop bookkeeping
  int64_t steps = 0;
  double total_seconds = 0.0;
  int64_t forward_evals = 0;
  int64_t backward_evals = 0;

  // bounded-state contract: these never depend on the series length
  int64_t score_buffer_slots = 0;
  int64_t parameter_count = 0;
};

// Running mean of the raw score over one lag window:
//   d_bar(t) = d_bar(t-n) + (d(t) - d(t-l-n)) / l
// State is exactly l/n + 1 raw slots (zero before warm-up) plus the
// current mean, independent of the series length.
class RunningMeanScore {
 public:
  RunningMeanScore(int64_t l, int64_t n);

  // Feeds d(t), returns the new d_bar(t).
  double update(double d_t);

  int64_t capacity() const { return static_cast<int64_t>(buffer_.size()); }
  double current() const { return smoothed_; }

 private:
  std::vector<double> buffer_;
  size_t head_ = 0;
  double smoothed_ = 0.0;
  double lag_;
};

// ---- loss and score formulas ----
// The *_value functions are the plain formulas on already-computed network
// outputs; the wrappers below evaluate a network on mini-batches. Keeping
// the formulas separate lets tests pin exact values without a network.

// Cross-entropy over a labeled batch pair (reference = negative class,
// test = positive). Outputs are clamped to [1e-6, 1 - 1e-6] inside logs.
double onnc_loss_value(std::span<const double> f_ref, std::span<const double> f_test);

// Symmetrized log-odds dissimilarity (KL-style). Same clamping.
double onnc_dissimilarity_value(std::span<const double> f_ref,
                                std::span<const double> f_test);

// Relative density-ratio fitting loss.
double onnr_loss_value(std::span<const double> g_ref, std::span<const double> g_test,
                       double alpha);

// Pearson-divergence score: mean ratio on the test batch minus one.
double onnr_score_value(std::span<const double> g_test);

double onnc_loss(const MiniBatch& ref, const MiniBatch& test, const NeuralNet& net);
double onnc_dissimilarity(const MiniBatch& ref, const MiniBatch& test,
                          const NeuralNet& net);
double onnr_loss(const MiniBatch& ref, const MiniBatch& test, const NeuralNet& net,
                 double alpha);
double onnr_score(const MiniBatch& test, const NeuralNet& net);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// Pair loss and its parameter gradient (does not mutate the network).
LossGrad onnc_loss_gradient(NeuralNet& net, const MiniBatch& ref, const MiniBatch& test);
LossGrad onnr_loss_gradient(NeuralNet& net, const MiniBatch& ref, const MiniBatch& test,
                            double alpha);

// One Adam step on the pair loss.
void onnc_train_step(NeuralNet& net, const MiniBatch& ref, const MiniBatch& test);
void onnr_train_step(NeuralNet& net, const MiniBatch& ref, const MiniBatch& test,
                     double alpha);

// Re-indexes the smoothed score by -(l + n) to align peaks with the
// change positions. Applying it twice is an error.
ScoreSeries shift_offline(ScoreSeries score, int64_t l, int64_t n);

// Greedy non-maximum suppression over local maxima of the shifted score:
// repeatedly emit the highest remaining local maximum >= threshold and
// suppress everything within min_distance of it.
std::vector<int64_t> extract_peaks(const ScoreSeries& score, double threshold,
                                   int64_t min_distance);

// Per-series adaptive threshold used when PeakParams.threshold is NaN.
double default_peak_threshold(std::span<const double> shifted_values);

// Classification-based online detector: one sigmoid-head network trained
// on each (reference, test) pair once, scored before training.
DetectionResult run_onnc(const TimeSeries& series, const DetectorConfig& config,
                         const PeakParams& peaks = {});

// Density-ratio online detector: two softplus-head networks estimating the
// ratio in both directions; the step score is the sum of the two
// Pearson-divergence scores.
DetectionResult run_onnr(const TimeSeries& series, const DetectorConfig& config,
                         const PeakParams& peaks = {});

}  // namespace cpd
