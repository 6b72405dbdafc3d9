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
#include <string>
#include <vector>

namespace cpd {

// Output head of the scalar network:
//   kSigmoid  - output in (0, 1), used by the classification detector.
//   kSoftplus - output >= 0, used by the density-ratio detector.
enum class Head { kSigmoid, kSoftplus };

// Small dense feed-forward network with tanh hidden units, one scalar
// output and a built-in Adam optimizer. Gradients are computed by manual
// backpropagation; there is no external ML dependency on purpose — the
// detectors only need a few thousand parameters and full determinism.
//
// An instance is single-threaded mutable state. Distinct instances can be
// trained in parallel.
class NeuralNet {
 public:
  // Weights are drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)]
  // with the given seed; biases and Adam moments start at zero.
  NeuralNet(int64_t dim_in, std::vector<int64_t> hidden, Head head, double lr, uint64_t seed);

  // Scalar output for one input. Does not disturb the training cache.
  double forward(std::span<const double> x) const;

  // Forward pass over a batch, caching activations for backward().
  std::vector<double> forward_batch(const std::vector<std::vector<double>>& xs);

  // Parameter gradient sum_i upstream[i] * d out_i / d theta for the last
  // cached batch. Any averaging factors belong in the upstream values.
  // Does not mutate parameters. Throws if no forward pass is cached.
  std::vector<double> backward(std::span<const double> upstream) const;

  // One Adam update (beta1=0.9, beta2=0.999, eps=1e-8, bias-corrected).
  // A non-finite gradient skips the update and counts an incident.
  void adam_step(std::span<const double> gradient);

  int64_t input_dim() const { return layers_.front().in; }
  Head head() const { return head_; }
  double learning_rate() const { return lr_; }
  int64_t parameter_count() const { return static_cast<int64_t>(params_.size()); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  const std::vector<int64_t>& hidden_widths() const { return hidden_; }

  // Overwrites the bias of the output unit (the pre-activation offset).
  void set_output_bias(double value) { params_.back() = value; }

  int64_t adam_steps() const { return adam_steps_; }
  int64_t skipped_updates() const { return skipped_updates_; }

  // Per-example pass counters, used to verify the linear-compute contract.
  int64_t forward_evals() const { return forward_evals_; }
  int64_t backward_evals() const { return backward_evals_; }

  // Debug checkpoint: text header with dims, then row-major weights and
  // biases, one value per line in shortest round-trip form.
  void save_checkpoint(const std::string& path) const;
  static NeuralNet load_checkpoint(const std::string& path);

 private:
  struct LayerShape {
    int64_t in = 0;
    int64_t out = 0;
    size_t w_offset = 0;  // row-major out x in
    size_t b_offset = 0;
  };

  double apply_head(double z) const;

  std::vector<LayerShape> layers_;
  std::vector<int64_t> hidden_;
  Head head_;
  double lr_;

  std::vector<double> params_;
  std::vector<double> adam_m_;
  std::vector<double> adam_v_;
  int64_t adam_steps_ = 0;
  int64_t skipped_updates_ = 0;

  // Cache of the last forward_batch: per example, per layer activations
  // (index 0 is the input, last is the head output).
  std::vector<std::vector<std::vector<double>>> cache_;
  bool cache_valid_ = false;

  mutable int64_t forward_evals_ = 0;
  mutable int64_t backward_evals_ = 0;
};

}  // namespace cpd
