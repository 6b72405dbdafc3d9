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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "cpd/net.hpp"
#include "cpd/rng.hpp"
#include "cpd/series.hpp"
#include "doctest.h"

using namespace cpd;

namespace {

void zero_params(NeuralNet& net) {
  std::fill(net.parameters().begin(), net.parameters().end(), 0.0);
}

std::vector<double> random_input(int64_t dim, uint64_t seed) {
  SeededRng rng(seed);
  std::vector<double> x(static_cast<size_t>(dim));
  for (double& v : x) {
    v = rng.gaussian();
  }
  return x;
}

}  // namespace

TEST_CASE("zero network outputs the head value at zero") {
  NeuralNet clf(3, {4}, Head::kSigmoid, 0.01, 1);
  zero_params(clf);
  CHECK(clf.forward(std::vector<double>{0.5, -1.0, 2.0}) == doctest::Approx(0.5));

  NeuralNet ratio(3, {4}, Head::kSoftplus, 0.01, 1);
  zero_params(ratio);
  CHECK(ratio.forward(std::vector<double>{0.5, -1.0, 2.0}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("forward is deterministic and checks dimensions") {
  NeuralNet net(4, {8}, Head::kSigmoid, 0.01, 77);
  const auto x = random_input(4, 3);
  CHECK(net.forward(x) == net.forward(x));
  CHECK_THROWS_WITH(net.forward(std::vector<double>{1.0, 2.0}),
                    doctest::Contains("input dimension mismatch"));
}

TEST_CASE("same seed gives bit-identical parameters") {
  NeuralNet a(5, {16, 8}, Head::kSoftplus, 0.1, 123);
  NeuralNet b(5, {16, 8}, Head::kSoftplus, 0.1, 123);
  REQUIRE(a.parameter_count() == b.parameter_count());
  for (int64_t i = 0; i < a.parameter_count(); ++i) {
    CHECK(a.parameters()[static_cast<size_t>(i)] == b.parameters()[static_cast<size_t>(i)]);
  }
}

TEST_CASE("no hidden layers gives an affine model through the head") {
  NeuralNet net(1, {}, Head::kSigmoid, 0.01, 5);
  auto params = net.parameters();
  REQUIRE(params.size() == 2);  // one weight, one bias
  params[0] = 2.0;
  params[1] = 0.5;
  const double z = 2.0 * 1.5 + 0.5;
  CHECK(net.forward(std::vector<double>{1.5}) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-z))).epsilon(1e-12));
}

TEST_CASE("forward accepts a combined vector without reshaping") {
  const TimeSeries series({1.0, 2.0, 3.0, 4.0, 5.0, 6.0}, 2);
  const EmbeddedSeries emb = embed(series, 3);
  NeuralNet net(emb.dim(), {4}, Head::kSigmoid, 0.01, 9);
  const CombinedVector x = emb.at(3);
  CHECK(std::isfinite(net.forward(x.data)));
}

TEST_CASE("head ranges hold on random inputs") {
  NeuralNet clf(6, {8}, Head::kSigmoid, 0.01, 21);
  NeuralNet ratio(6, {8}, Head::kSoftplus, 0.01, 22);
  for (uint64_t s = 0; s < 50; ++s) {
    const auto x = random_input(6, 1000 + s);
    const double f = clf.forward(x);
    CHECK(f > 0.0);
    CHECK(f < 1.0);
    CHECK(ratio.forward(x) >= 0.0);
  }
}

TEST_CASE("backward requires a cached forward pass") {
  NeuralNet net(2, {3}, Head::kSigmoid, 0.01, 1);
  CHECK_THROWS_WITH(net.backward(std::vector<double>{1.0}),
                    doctest::Contains("backward before forward"));
}

TEST_CASE("zero upstream gradient gives a zero parameter gradient") {
  NeuralNet net(3, {5}, Head::kSigmoid, 0.01, 2);
  net.forward_batch({random_input(3, 1), random_input(3, 2)});
  const auto grad = net.backward(std::vector<double>{0.0, 0.0});
  for (double g : grad) {
    CHECK(g == 0.0);
  }
}

TEST_CASE("batch gradient equals the mean of per-example gradients") {
  NeuralNet net(3, {4}, Head::kSoftplus, 0.01, 8);
  const std::vector<std::vector<double>> xs = {random_input(3, 11), random_input(3, 12),
                                               random_input(3, 13)};
  const double inv = 1.0 / 3.0;

  net.forward_batch(xs);
  const auto batch_grad = net.backward(std::vector<double>{inv, inv, inv});

  std::vector<double> mean_grad(static_cast<size_t>(net.parameter_count()), 0.0);
  for (const auto& x : xs) {
    net.forward_batch({x});
    const auto g = net.backward(std::vector<double>{1.0});
    for (size_t i = 0; i < g.size(); ++i) {
      mean_grad[i] += g[i] * inv;
    }
  }
  for (size_t i = 0; i < mean_grad.size(); ++i) {
    CHECK(batch_grad[i] == doctest::Approx(mean_grad[i]).epsilon(1e-12));
  }
}

TEST_CASE("output gradient matches central finite differences") {
  for (uint64_t trial = 0; trial < 10; ++trial) {
    const int64_t dim = 1 + static_cast<int64_t>(trial % 4);
    NeuralNet net(dim, {5}, trial % 2 == 0 ? Head::kSigmoid : Head::kSoftplus, 0.01,
                  500 + trial);
    const auto x = random_input(dim, 900 + trial);

    net.forward_batch({x});
    const auto grad = net.backward(std::vector<double>{1.0});

    const double h = 1e-5;
    auto params = net.parameters();
    for (size_t i = 0; i < params.size(); ++i) {
      const double saved = params[i];
      params[i] = saved + h;
      const double up = net.forward(x);
      params[i] = saved - h;
      const double down = net.forward(x);
      params[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double err = std::abs(grad[i] - fd) / std::max({1.0, std::abs(grad[i]), std::abs(fd)});
      CHECK(err < 1e-4);
    }
  }
}

TEST_CASE("adam ignores a zero gradient at step one") {
  NeuralNet net(2, {3}, Head::kSigmoid, 0.05, 4);
  const std::vector<double> before(net.parameters().begin(), net.parameters().end());
  net.adam_step(std::vector<double>(static_cast<size_t>(net.parameter_count()), 0.0));
  for (size_t i = 0; i < before.size(); ++i) {
    CHECK(net.parameters()[i] == before[i]);
  }
}

TEST_CASE("adam step magnitude approaches lr * sign for a constant gradient") {
  NeuralNet net(1, {}, Head::kSigmoid, 0.01, 6);
  std::vector<double> grad = {0.5, -1.5};
  for (int i = 0; i < 3000; ++i) {
    net.adam_step(grad);
  }
  const std::vector<double> before(net.parameters().begin(), net.parameters().end());
  net.adam_step(grad);
  CHECK(before[0] - net.parameters()[0] == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(before[1] - net.parameters()[1] == doctest::Approx(-0.01).epsilon(1e-3));
}

TEST_CASE("identical seeds and gradients give identical trajectories") {
  NeuralNet a(3, {4}, Head::kSoftplus, 0.1, 55);
  NeuralNet b(3, {4}, Head::kSoftplus, 0.1, 55);
  SeededRng rng(7);
  for (int step = 0; step < 20; ++step) {
    std::vector<double> grad(static_cast<size_t>(a.parameter_count()));
    for (double& g : grad) {
      g = rng.gaussian();
    }
    a.adam_step(grad);
    b.adam_step(grad);
  }
  for (int64_t i = 0; i < a.parameter_count(); ++i) {
    CHECK(a.parameters()[static_cast<size_t>(i)] == b.parameters()[static_cast<size_t>(i)]);
  }
}

TEST_CASE("adam with lr=0 leaves parameters fixed") {
  NeuralNet net(2, {3}, Head::kSigmoid, 0.0, 10);
  const std::vector<double> before(net.parameters().begin(), net.parameters().end());
  std::vector<double> grad(static_cast<size_t>(net.parameter_count()), 0.7);
  for (int i = 0; i < 10; ++i) {
    net.adam_step(grad);
  }
  for (size_t i = 0; i < before.size(); ++i) {
    CHECK(net.parameters()[i] == before[i]);
  }
}

TEST_CASE("non-finite gradients are skipped and counted") {
  NeuralNet net(2, {3}, Head::kSigmoid, 0.05, 11);
  const std::vector<double> before(net.parameters().begin(), net.parameters().end());
  std::vector<double> grad(static_cast<size_t>(net.parameter_count()), 1.0);
  grad[0] = std::numeric_limits<double>::quiet_NaN();
  net.adam_step(grad);
  CHECK(net.skipped_updates() == 1);
  CHECK(net.adam_steps() == 0);
  for (size_t i = 0; i < before.size(); ++i) {
    CHECK(net.parameters()[i] == before[i]);
  }
}

TEST_CASE("parameters and moments stay finite through training") {
  NeuralNet net(2, {8}, Head::kSoftplus, 0.1, 12);
  SeededRng rng(3);
  for (int step = 0; step < 200; ++step) {
    const auto x = random_input(2, 4000 + static_cast<uint64_t>(step));
    net.forward_batch({x});
    net.adam_step(net.backward(std::vector<double>{rng.gaussian()}));
  }
  for (double p : net.parameters()) {
    CHECK(std::isfinite(p));
  }
}

TEST_CASE("checkpoint round-trips the exact parameters") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "cpd_net_checkpoint.txt").string();
  NeuralNet net(3, {4, 2}, Head::kSoftplus, 0.05, 77);
  std::vector<double> grad(static_cast<size_t>(net.parameter_count()), 0.25);
  net.adam_step(grad);
  net.save_checkpoint(path);

  const NeuralNet loaded = NeuralNet::load_checkpoint(path);
  CHECK(loaded.head() == Head::kSoftplus);
  CHECK(loaded.learning_rate() == net.learning_rate());
  CHECK(loaded.adam_steps() == net.adam_steps());
  REQUIRE(loaded.parameter_count() == net.parameter_count());
  for (int64_t i = 0; i < net.parameter_count(); ++i) {
    CHECK(loaded.parameters()[static_cast<size_t>(i)] ==
          net.parameters()[static_cast<size_t>(i)]);
  }
  const auto x = random_input(3, 5);
  CHECK(loaded.forward(x) == net.forward(x));
  std::remove(path.c_str());
}
