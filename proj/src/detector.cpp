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

#include "cpd/detector.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cpd {

namespace {

// Classifier outputs are clamped to this range inside logarithms so a
// saturated network cannot produce an infinite loss or score.
constexpr double kProbClamp = 1e-6;

double clamp_prob(double f) {
  return std::clamp(f, kProbClamp, 1.0 - kProbClamp);
}

void require_same_size(const MiniBatch& ref, const MiniBatch& test) {
  if (ref.size() != test.size()) {
    throw std::invalid_argument("mini-batch sizes must match");
  }
}

std::vector<std::vector<double>> batch_inputs(const MiniBatch& ref, const MiniBatch& test) {
  std::vector<std::vector<double>> xs;
  xs.reserve(static_cast<size_t>(ref.size() + test.size()));
  for (const auto& v : ref.vectors) {
    xs.push_back(v.data);
  }
  for (const auto& v : test.vectors) {
    xs.push_back(v.data);
  }
  return xs;
}

std::vector<double> eval_batch(const MiniBatch& batch, const NeuralNet& net) {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(batch.size()));
  for (const auto& v : batch.vectors) {
    out.push_back(net.forward(v.data));
  }
  return out;
}

}  // namespace

void DetectorConfig::validate() const {
  std::vector<std::string> violations;
  if (k < 1) {
    violations.push_back("embedding depth k must be >= 1");
  }
  if (n < 1) {
    violations.push_back("mini-batch size n must be >= 1");
  }
  if (l < n) {
    violations.push_back("lag l must be >= mini-batch size n");
  }
  if (n >= 1 && l >= n && l % n != 0) {
    std::ostringstream os;
    os << "mini-batch size n must divide lag l (n=" << n << ", l=" << l << ")";
    violations.push_back(os.str());
  }
  if (n_epochs < 1) {
    violations.push_back("n_epochs must be >= 1");
  }
  if (!(lr > 0.0)) {
    violations.push_back("learning rate must be positive");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    violations.push_back("alpha must lie in (0, 1)");
  }
  for (int64_t h : hidden) {
    if (h < 1) {
      violations.push_back("hidden widths must be >= 1");
      break;
    }
  }
  if (!violations.empty()) {
    std::string msg = "invalid detector config:";
    for (const auto& v : violations) {
      msg += "\n  - " + v;
    }
    throw std::invalid_argument(msg);
  }
}

RunningMeanScore::RunningMeanScore(int64_t l, int64_t n) : lag_(static_cast<double>(l)) {
  if (n < 1 || l < n || l % n != 0) {
    throw std::invalid_argument("running mean requires n >= 1 and n | l");
  }
  buffer_.assign(static_cast<size_t>(l / n + 1), 0.0);
}

double RunningMeanScore::update(double d_t) {
  // The slot at head_ holds d(t-l-n), the value leaving the window.
  const double leaving = buffer_[head_];
  smoothed_ += (d_t - leaving) / lag_;
  buffer_[head_] = d_t;
  head_ = (head_ + 1) % buffer_.size();
  return smoothed_;
}

double onnc_loss_value(std::span<const double> f_ref, std::span<const double> f_test) {
  double loss = 0.0;
  for (double f : f_ref) {
    loss -= std::log(1.0 - clamp_prob(f));
  }
  loss /= static_cast<double>(f_ref.size());
  double test_term = 0.0;
  for (double f : f_test) {
    test_term -= std::log(clamp_prob(f));
  }
  return loss + test_term / static_cast<double>(f_test.size());
}

double onnc_dissimilarity_value(std::span<const double> f_ref,
                                std::span<const double> f_test) {
  double ref_term = 0.0;
  for (double f : f_ref) {
    const double p = clamp_prob(f);
    ref_term += std::log((1.0 - p) / p);
  }
  ref_term /= static_cast<double>(f_ref.size());
  double test_term = 0.0;
  for (double f : f_test) {
    const double p = clamp_prob(f);
    test_term += std::log(p / (1.0 - p));
  }
  return ref_term + test_term / static_cast<double>(f_test.size());
}

double onnr_loss_value(std::span<const double> g_ref, std::span<const double> g_test,
                       double alpha) {
  double ref_sq = 0.0;
  for (double g : g_ref) {
    ref_sq += g * g;
  }
  double test_sq = 0.0;
  double test_sum = 0.0;
  for (double g : g_test) {
    test_sq += g * g;
    test_sum += g;
  }
  const double n_ref = static_cast<double>(g_ref.size());
  const double n_test = static_cast<double>(g_test.size());
  return (1.0 - alpha) / (2.0 * n_ref) * ref_sq + alpha / (2.0 * n_test) * test_sq -
         test_sum / n_test;
}

double onnr_score_value(std::span<const double> g_test) {
  const double sum = std::accumulate(g_test.begin(), g_test.end(), 0.0);
  return sum / static_cast<double>(g_test.size()) - 1.0;
}

double onnc_loss(const MiniBatch& ref, const MiniBatch& test, const NeuralNet& net) {
  if (net.head() != Head::kSigmoid) {
    throw std::invalid_argument("classification head required");
  }
  require_same_size(ref, test);
  return onnc_loss_value(eval_batch(ref, net), eval_batch(test, net));
}

double onnc_dissimilarity(const MiniBatch& ref, const MiniBatch& test,
                          const NeuralNet& net) {
  if (net.head() != Head::kSigmoid) {
    throw std::invalid_argument("classification head required");
  }
  require_same_size(ref, test);
  return onnc_dissimilarity_value(eval_batch(ref, net), eval_batch(test, net));
}

double onnr_loss(const MiniBatch& ref, const MiniBatch& test, const NeuralNet& net,
                 double alpha) {
  if (net.head() != Head::kSoftplus) {
    throw std::invalid_argument("ratio head required");
  }
  require_same_size(ref, test);
  return onnr_loss_value(eval_batch(ref, net), eval_batch(test, net), alpha);
}

double onnr_score(const MiniBatch& test, const NeuralNet& net) {
  if (net.head() != Head::kSoftplus) {
    throw std::invalid_argument("ratio head required");
  }
  return onnr_score_value(eval_batch(test, net));
}

LossGrad onnc_loss_gradient(NeuralNet& net, const MiniBatch& ref, const MiniBatch& test) {
  if (net.head() != Head::kSigmoid) {
    throw std::invalid_argument("classification head required");
  }
  require_same_size(ref, test);
  const auto xs = batch_inputs(ref, test);
  const auto f = net.forward_batch(xs);
  const size_t n_ref = static_cast<size_t>(ref.size());
  const double inv_n = 1.0 / static_cast<double>(ref.size());

  std::vector<double> upstream(f.size(), 0.0);
  for (size_t i = 0; i < f.size(); ++i) {
    // The clamp freezes the loss outside [clamp, 1-clamp], so the exact
    // derivative there is zero.
    if (f[i] <= kProbClamp || f[i] >= 1.0 - kProbClamp) {
      continue;
    }
    upstream[i] = i < n_ref ? inv_n / (1.0 - f[i]) : -inv_n / f[i];
  }

  LossGrad out;
  out.loss = onnc_loss_value({f.data(), n_ref}, {f.data() + n_ref, f.size() - n_ref});
  out.grad = net.backward(upstream);
  return out;
}

LossGrad onnr_loss_gradient(NeuralNet& net, const MiniBatch& ref, const MiniBatch& test,
                            double alpha) {
  if (net.head() != Head::kSoftplus) {
    throw std::invalid_argument("ratio head required");
  }
  require_same_size(ref, test);
  const auto xs = batch_inputs(ref, test);
  const auto g = net.forward_batch(xs);
  const size_t n_ref = static_cast<size_t>(ref.size());
  const double inv_n = 1.0 / static_cast<double>(ref.size());

  std::vector<double> upstream(g.size(), 0.0);
  for (size_t i = 0; i < g.size(); ++i) {
    upstream[i] = i < n_ref ? (1.0 - alpha) * g[i] * inv_n
                            : alpha * g[i] * inv_n - inv_n;
  }

  LossGrad out;
  out.loss = onnr_loss_value({g.data(), n_ref}, {g.data() + n_ref, g.size() - n_ref}, alpha);
  out.grad = net.backward(upstream);
  static const double clip = []() {
    const char* env = std::getenv("CPD_ONNR_CLIP");
    return env ? std::atof(env) : 0.0;
  }();
  if (clip > 0.0) {
    double norm = 0.0;
    for (double v : out.grad) {
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm > clip) {
      const double scale = clip / norm;
      for (double& v : out.grad) {
        v *= scale;
      }
    }
  }
  return out;
}

void onnc_train_step(NeuralNet& net, const MiniBatch& ref, const MiniBatch& test) {
  net.adam_step(onnc_loss_gradient(net, ref, test).grad);
}

void onnr_train_step(NeuralNet& net, const MiniBatch& ref, const MiniBatch& test,
                     double alpha) {
  net.adam_step(onnr_loss_gradient(net, ref, test, alpha).grad);
}

ScoreSeries shift_offline(ScoreSeries score, int64_t l, int64_t n) {
  if (score.shifted) {
    throw std::logic_error("score series is already shifted");
  }
  score.shifted = true;
  score.shift_offset = l + n;
  return score;
}

std::vector<int64_t> extract_peaks(const ScoreSeries& score, double threshold,
                                   int64_t min_distance) {
  if (!score.shifted) {
    throw std::logic_error("peak extraction requires the shifted score");
  }
  if (min_distance < 1) {
    throw std::invalid_argument("min_distance must be >= 1");
  }
  const auto& v = score.smoothed;
  if (v.empty()) {
    return {};
  }

  // Candidates are strict local maxima of the shifted score at or above
  // the threshold. A plateau counts once (at its middle) and only when it
  // is strictly above both sides; runs touching the array edge are not
  // peaks, so a flat score yields no candidates.
  struct Candidate {
    double value;
    int64_t time;
  };
  std::vector<Candidate> candidates;
  size_t run_start = 0;
  for (size_t j = 1; j <= v.size(); ++j) {
    if (j < v.size() && v[j] == v[run_start]) {
      continue;
    }
    const size_t run_end = j - 1;  // inclusive run of equal values
    if (run_start > 0 && run_end + 1 < v.size() && v[run_start] > v[run_start - 1] &&
        v[run_start] > v[run_end + 1] && v[run_start] >= threshold) {
      candidates.push_back({v[run_start], score.shifted_time_at((run_start + run_end) / 2)});
    }
    run_start = j;
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.value != b.value) {
      return a.value > b.value;
    }
    return a.time < b.time;
  });

  std::vector<int64_t> kept;
  for (const auto& c : candidates) {
    bool suppressed = false;
    for (int64_t t : kept) {
      if (std::abs(c.time - t) <= min_distance) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) {
      kept.push_back(c.time);
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

double default_peak_threshold(std::span<const double> shifted_values) {
  if (shifted_values.empty()) {
    return 0.0;
  }
  const double n = static_cast<double>(shifted_values.size());
  const double mean =
      std::accumulate(shifted_values.begin(), shifted_values.end(), 0.0) / n;
  double var = 0.0;
  for (double x : shifted_values) {
    var += (x - mean) * (x - mean);
  }
  var /= n;
  return mean + 3.0 * std::sqrt(var);
}

namespace {

void check_warmup(const TimeSeries& series, const DetectorConfig& cfg) {
  if (series.length() < cfg.k + cfg.n + cfg.l) {
    throw std::invalid_argument("series shorter than warm-up horizon");
  }
}

DetectionResult finalize(ScoreSeries score, const DetectorConfig& cfg,
                         const PeakParams& peaks, int64_t steps, double seconds,
                         int64_t params, int64_t fwd, int64_t bwd) {
  DetectionResult result;
  result.score = shift_offline(std::move(score), cfg.l, cfg.n);
  result.threshold = std::isnan(peaks.threshold)
                         ? default_peak_threshold(result.score.smoothed)
                         : peaks.threshold;
  result.min_distance = peaks.min_distance > 0 ? peaks.min_distance : cfg.l;
  result.detected_cps = extract_peaks(result.score, result.threshold, result.min_distance);
  result.steps = steps;
  result.total_seconds = seconds;
  result.score_buffer_slots = cfg.l / cfg.n + 1;
  result.parameter_count = params;
  result.forward_evals = fwd;
  result.backward_evals = bwd;
  return result;
}

}  // namespace

DetectionResult run_onnc(const TimeSeries& series, const DetectorConfig& cfg,
                         const PeakParams& peaks) {
  cfg.validate();
  check_warmup(series, cfg);

  const EmbeddedSeries emb = embed(series, cfg.k);
  NeuralNet net(emb.dim(), cfg.hidden, Head::kSigmoid, cfg.lr, cfg.seed);
  RunningMeanScore mean(cfg.l, cfg.n);

  ScoreSeries score;
  score.start = series.start_index() + cfg.k + cfg.n + cfg.l - 1;
  score.step = cfg.n;

  const auto t0 = std::chrono::steady_clock::now();
  int64_t steps = 0;
  for (int64_t t = score.start; t <= series.last_index(); t += cfg.n) {
    const MiniBatch ref = mini_batch(emb, t - cfg.l, cfg.n);
    const MiniBatch test = mini_batch(emb, t, cfg.n);

    // score first, then train: each pair is seen by the optimizer after it
    // has been scored, and only once
    const double d = onnc_dissimilarity(ref, test, net);
    score.raw.push_back(d);
    score.smoothed.push_back(mean.update(d));
    for (int64_t e = 0; e < cfg.n_epochs; ++e) {
      onnc_train_step(net, ref, test);
    }
    ++steps;
  }
  const double seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - t0)
                             .count();

  return finalize(std::move(score), cfg, peaks, steps, seconds, net.parameter_count(),
                  net.forward_evals(), net.backward_evals());
}

DetectionResult run_onnr(const TimeSeries& series, const DetectorConfig& cfg,
                         const PeakParams& peaks) {
  cfg.validate();
  check_warmup(series, cfg);

  const EmbeddedSeries emb = embed(series, cfg.k);
  NeuralNet g1(emb.dim(), cfg.hidden, Head::kSoftplus, cfg.lr, cfg.seed);
  NeuralNet g2(emb.dim(), cfg.hidden, Head::kSoftplus, cfg.lr, cfg.seed + 1);
  // start both ratio estimates at the no-change value g = 1; otherwise the
  // calibration transient from softplus(0) dominates the early score
  const double unit_ratio_bias = std::log(std::exp(1.0) - 1.0);
  g1.set_output_bias(unit_ratio_bias);
  g2.set_output_bias(unit_ratio_bias);
  RunningMeanScore mean(cfg.l, cfg.n);

  ScoreSeries score;
  score.start = series.start_index() + cfg.k + cfg.n + cfg.l - 1;
  score.step = cfg.n;

  const auto t0 = std::chrono::steady_clock::now();
  int64_t steps = 0;
  for (int64_t t = score.start; t <= series.last_index(); t += cfg.n) {
    const MiniBatch ref = mini_batch(emb, t - cfg.l, cfg.n);
    const MiniBatch test = mini_batch(emb, t, cfg.n);

    // g1 estimates the ratio test/ref, g2 the swapped direction; the pair
    // of scores symmetrizes the asymmetric divergence
    const double d1 = onnr_score(test, g1);
    const double d2 = onnr_score(ref, g2);
    const double d = d1 + d2;
    score.raw.push_back(d);
    score.smoothed.push_back(mean.update(d));

    for (int64_t e = 0; e < cfg.n_epochs; ++e) {
      onnr_train_step(g1, ref, test, cfg.alpha);
    }
    for (int64_t e = 0; e < cfg.n_epochs; ++e) {
      onnr_train_step(g2, test, ref, cfg.alpha);
    }
    ++steps;
  }
  const double seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - t0)
                             .count();

  return finalize(std::move(score), cfg, peaks, steps, seconds,
                  g1.parameter_count() + g2.parameter_count(),
                  g1.forward_evals() + g2.forward_evals(),
                  g1.backward_evals() + g2.backward_evals());
}

}  // namespace cpd
