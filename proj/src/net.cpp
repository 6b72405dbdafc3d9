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

#include "cpd/net.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cpd/fmt.hpp"
#include "cpd/rng.hpp"

namespace cpd {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

double stable_sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double stable_softplus(double z) {
  // log(1 + e^z) without overflow for large |z|.
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

NeuralNet::NeuralNet(int64_t dim_in, std::vector<int64_t> hidden, Head head, double lr,
                     uint64_t seed)
    : hidden_(std::move(hidden)), head_(head), lr_(lr) {
  if (dim_in < 1) {
    throw std::invalid_argument("input dimension must be >= 1");
  }
  if (lr < 0.0) {
    throw std::invalid_argument("learning rate must be non-negative");
  }
  std::vector<int64_t> dims;
  dims.push_back(dim_in);
  for (int64_t h : hidden_) {
    if (h < 1) {
      throw std::invalid_argument("hidden width must be >= 1");
    }
    dims.push_back(h);
  }
  dims.push_back(1);

  size_t offset = 0;
  for (size_t i = 0; i + 1 < dims.size(); ++i) {
    LayerShape shape;
    shape.in = dims[i];
    shape.out = dims[i + 1];
    shape.w_offset = offset;
    offset += static_cast<size_t>(shape.in * shape.out);
    shape.b_offset = offset;
    offset += static_cast<size_t>(shape.out);
    layers_.push_back(shape);
  }

  params_.assign(offset, 0.0);
  adam_m_.assign(offset, 0.0);
  adam_v_.assign(offset, 0.0);

  SeededRng rng(seed);
  for (const auto& layer : layers_) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer.in));
    for (int64_t i = 0; i < layer.in * layer.out; ++i) {
      params_[layer.w_offset + static_cast<size_t>(i)] = rng.uniform_signed(scale);
    }
    // biases stay zero
  }
}

double NeuralNet::apply_head(double z) const {
  return head_ == Head::kSigmoid ? stable_sigmoid(z) : stable_softplus(z);
}

double NeuralNet::forward(std::span<const double> x) const {
  if (static_cast<int64_t>(x.size()) != input_dim()) {
    throw std::invalid_argument("input dimension mismatch");
  }
  ++forward_evals_;
  std::vector<double> act(x.begin(), x.end());
  std::vector<double> next;
  for (size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    next.assign(static_cast<size_t>(layer.out), 0.0);
    for (int64_t i = 0; i < layer.out; ++i) {
      double z = params_[layer.b_offset + static_cast<size_t>(i)];
      const double* w = &params_[layer.w_offset + static_cast<size_t>(i * layer.in)];
      for (int64_t j = 0; j < layer.in; ++j) {
        z += w[j] * act[static_cast<size_t>(j)];
      }
      next[static_cast<size_t>(i)] =
          (l + 1 == layers_.size()) ? apply_head(z) : std::tanh(z);
    }
    act.swap(next);
  }
  return act[0];
}

std::vector<double> NeuralNet::forward_batch(const std::vector<std::vector<double>>& xs) {
  cache_.clear();
  cache_.reserve(xs.size());
  std::vector<double> outputs;
  outputs.reserve(xs.size());
  for (const auto& x : xs) {
    if (static_cast<int64_t>(x.size()) != input_dim()) {
      throw std::invalid_argument("input dimension mismatch");
    }
    ++forward_evals_;
    std::vector<std::vector<double>> acts;
    acts.reserve(layers_.size() + 1);
    acts.push_back(x);
    for (size_t l = 0; l < layers_.size(); ++l) {
      const auto& layer = layers_[l];
      const auto& prev = acts.back();
      std::vector<double> cur(static_cast<size_t>(layer.out), 0.0);
      for (int64_t i = 0; i < layer.out; ++i) {
        double z = params_[layer.b_offset + static_cast<size_t>(i)];
        const double* w = &params_[layer.w_offset + static_cast<size_t>(i * layer.in)];
        for (int64_t j = 0; j < layer.in; ++j) {
          z += w[j] * prev[static_cast<size_t>(j)];
        }
        cur[static_cast<size_t>(i)] =
            (l + 1 == layers_.size()) ? apply_head(z) : std::tanh(z);
      }
      acts.push_back(std::move(cur));
    }
    outputs.push_back(acts.back()[0]);
    cache_.push_back(std::move(acts));
  }
  cache_valid_ = true;
  return outputs;
}

std::vector<double> NeuralNet::backward(std::span<const double> upstream) const {
  if (!cache_valid_) {
    throw std::logic_error("backward before forward");
  }
  if (upstream.size() != cache_.size()) {
    throw std::invalid_argument("upstream gradient size does not match cached batch");
  }

  std::vector<double> grad(params_.size(), 0.0);
  std::vector<double> delta;
  std::vector<double> delta_prev;

  for (size_t e = 0; e < cache_.size(); ++e) {
    ++backward_evals_;
    const auto& acts = cache_[e];
    const double y = acts.back()[0];
    const double head_deriv =
        head_ == Head::kSigmoid ? y * (1.0 - y) : 1.0 - std::exp(-y);
    delta.assign(1, upstream[e] * head_deriv);

    for (size_t l = layers_.size(); l-- > 0;) {
      const auto& layer = layers_[l];
      const auto& input = acts[l];
      for (int64_t i = 0; i < layer.out; ++i) {
        const double d = delta[static_cast<size_t>(i)];
        double* gw = &grad[layer.w_offset + static_cast<size_t>(i * layer.in)];
        for (int64_t j = 0; j < layer.in; ++j) {
          gw[j] += d * input[static_cast<size_t>(j)];
        }
        grad[layer.b_offset + static_cast<size_t>(i)] += d;
      }
      if (l == 0) {
        break;
      }
      delta_prev.assign(static_cast<size_t>(layer.in), 0.0);
      for (int64_t j = 0; j < layer.in; ++j) {
        double s = 0.0;
        for (int64_t i = 0; i < layer.out; ++i) {
          s += params_[layer.w_offset + static_cast<size_t>(i * layer.in + j)] *
               delta[static_cast<size_t>(i)];
        }
        const double a = input[static_cast<size_t>(j)];
        delta_prev[static_cast<size_t>(j)] = s * (1.0 - a * a);
      }
      delta.swap(delta_prev);
    }
  }
  return grad;
}

void NeuralNet::adam_step(std::span<const double> gradient) {
  if (gradient.size() != params_.size()) {
    throw std::invalid_argument("gradient shape does not match parameters");
  }
  for (double g : gradient) {
    if (!std::isfinite(g)) {
      // non-finite gradient: update skipped, incident counted
      ++skipped_updates_;
      return;
    }
  }
  ++adam_steps_;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam_steps_));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam_steps_));
  for (size_t i = 0; i < params_.size(); ++i) {
    const double g = gradient[i];
    adam_m_[i] = kAdamBeta1 * adam_m_[i] + (1.0 - kAdamBeta1) * g;
    adam_v_[i] = kAdamBeta2 * adam_v_[i] + (1.0 - kAdamBeta2) * g * g;
    const double m_hat = adam_m_[i] / bc1;
    const double v_hat = adam_v_[i] / bc2;
    params_[i] -= lr_ * m_hat / (std::sqrt(v_hat) + kAdamEps);
  }
  cache_valid_ = false;  // activations are stale once parameters move
}

void NeuralNet::save_checkpoint(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open checkpoint file for writing: " + path);
  }
  out << "cpdnet 1\n";
  out << "head " << (head_ == Head::kSigmoid ? "sigmoid" : "softplus") << "\n";
  out << "lr " << format_double(lr_) << "\n";
  out << "adam_steps " << adam_steps_ << "\n";
  out << "dims " << input_dim();
  for (int64_t h : hidden_) {
    out << " " << h;
  }
  out << " 1\n";
  out << "params " << params_.size() << "\n";
  for (double v : params_) {
    out << format_double(v) << "\n";
  }
  for (double v : adam_m_) {
    out << format_double(v) << "\n";
  }
  for (double v : adam_v_) {
    out << format_double(v) << "\n";
  }
}

NeuralNet NeuralNet::load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open checkpoint file: " + path);
  }
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != "cpdnet" || version != 1) {
    throw std::runtime_error("unrecognized checkpoint format");
  }
  std::string head_name;
  in >> tag >> head_name;
  const Head head = head_name == "sigmoid" ? Head::kSigmoid : Head::kSoftplus;
  double lr = 0.0;
  in >> tag >> lr;
  int64_t steps = 0;
  in >> tag >> steps;

  in >> tag;  // "dims"
  std::vector<int64_t> dims;
  std::string rest;
  std::getline(in, rest);
  std::istringstream dim_stream(rest);
  int64_t d;
  while (dim_stream >> d) {
    dims.push_back(d);
  }
  if (dims.size() < 2 || dims.back() != 1) {
    throw std::runtime_error("malformed checkpoint dims");
  }
  std::vector<int64_t> hidden(dims.begin() + 1, dims.end() - 1);

  size_t count = 0;
  in >> tag >> count;

  NeuralNet net(dims.front(), hidden, head, lr, /*seed=*/0);
  if (count != net.params_.size()) {
    throw std::runtime_error("checkpoint parameter count mismatch");
  }
  for (double& v : net.params_) {
    in >> v;
  }
  for (double& v : net.adam_m_) {
    in >> v;
  }
  for (double& v : net.adam_v_) {
    in >> v;
  }
  if (!in) {
    throw std::runtime_error("truncated checkpoint file");
  }
  net.adam_steps_ = steps;
  return net;
}

}  // namespace cpd
