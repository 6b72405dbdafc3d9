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
#include <cmath>

#include "cpd/datagen.hpp"
#include "cpd/detector.hpp"
#include "cpd/rng.hpp"
#include "doctest.h"

using namespace cpd;

namespace {

TimeSeries random_series(int64_t length, int64_t dim, uint64_t seed) {
  SeededRng rng(seed);
  std::vector<double> values;
  for (int64_t i = 0; i < length * dim; ++i) {
    values.push_back(rng.gaussian());
  }
  return TimeSeries(std::move(values), dim);
}

// Affine net with zero weight whose sigmoid output is the constant p.
NeuralNet constant_classifier(int64_t dim, double p) {
  NeuralNet net(dim, {}, Head::kSigmoid, 0.01, 0);
  auto params = net.parameters();
  std::fill(params.begin(), params.end(), 0.0);
  params[params.size() - 1] = std::log(p / (1.0 - p));
  return net;
}

ScoreSeries make_shifted(std::vector<double> values, int64_t start, int64_t step) {
  ScoreSeries s;
  s.start = start;
  s.step = step;
  s.raw = values;
  s.smoothed = std::move(values);
  return shift_offline(std::move(s), /*l=*/0, /*n=*/0);
}

}  // namespace

TEST_CASE("config validation lists violated constraints") {
  DetectorConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  cfg.n = 7;
  cfg.l = 100;
  CHECK_THROWS_WITH(cfg.validate(), doctest::Contains("must divide lag l"));

  cfg = DetectorConfig{};
  cfg.l = 5;
  cfg.n = 10;
  CHECK_THROWS_WITH(cfg.validate(), doctest::Contains("lag l must be >="));

  cfg = DetectorConfig{};
  cfg.alpha = 1.0;
  CHECK_THROWS_WITH(cfg.validate(), doctest::Contains("alpha"));

  cfg = DetectorConfig{};
  cfg.n_epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("cross-entropy loss values") {
  SUBCASE("f = 0.5 on both batches") {
    const std::vector<double> f(10, 0.5);
    CHECK(onnc_loss_value(f, f) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("n=1, f(ref)=0.1, f(test)=0.9") {
    CHECK(onnc_loss_value(std::vector<double>{0.1}, std::vector<double>{0.9}) ==
          doctest::Approx(-2.0 * std::log(0.9)).epsilon(1e-12));
  }
  SUBCASE("perfect separation approaches zero") {
    const double loss =
        onnc_loss_value(std::vector<double>{1e-9}, std::vector<double>{1.0 - 1e-9});
    CHECK(loss >= 0.0);
    CHECK(loss < 1e-5);
  }
}

TEST_CASE("dissimilarity score values") {
  SUBCASE("f = 0.5 everywhere gives exactly zero") {
    const std::vector<double> f(4, 0.5);
    CHECK(onnc_dissimilarity_value(f, f) == 0.0);
  }
  SUBCASE("n=1, f(ref)=0.25, f(test)=0.75") {
    CHECK(onnc_dissimilarity_value(std::vector<double>{0.25}, std::vector<double>{0.75}) ==
          doctest::Approx(2.0 * std::log(3.0)).epsilon(1e-12));
  }
  SUBCASE("swapping batches with f' = 1-f maps D to D") {
    SeededRng rng(5);
    std::vector<double> a(6), b(6), a_flip(6), b_flip(6);
    for (size_t i = 0; i < 6; ++i) {
      a[i] = 0.05 + 0.9 * rng.uniform();
      b[i] = 0.05 + 0.9 * rng.uniform();
      a_flip[i] = 1.0 - a[i];
      b_flip[i] = 1.0 - b[i];
    }
    CHECK(onnc_dissimilarity_value(a, b) ==
          doctest::Approx(onnc_dissimilarity_value(b_flip, a_flip)).epsilon(1e-12));
  }
}

TEST_CASE("ratio loss and score values") {
  SUBCASE("g = 0") {
    const std::vector<double> g(5, 0.0);
    CHECK(onnr_loss_value(g, g, 0.1) == 0.0);
    CHECK(onnr_score_value(g) == -1.0);
  }
  SUBCASE("n=1, alpha=0.1, g(ref)=2, g(test)=1") {
    CHECK(onnr_loss_value(std::vector<double>{2.0}, std::vector<double>{1.0}, 0.1) ==
          doctest::Approx(0.85).epsilon(1e-12));
  }
  SUBCASE("g = 1, alpha=0.1") {
    const std::vector<double> g(8, 1.0);
    CHECK(onnr_loss_value(g, g, 0.1) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(onnr_score_value(g) == 0.0);
  }
  SUBCASE("mean ratio minus one") {
    CHECK(onnr_score_value(std::vector<double>{1.5, 0.5, 1.0, 3.0}) ==
          doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("loss wrappers enforce the head kind") {
  const TimeSeries s = random_series(30, 1, 1);
  const EmbeddedSeries emb = embed(s, 1);
  const MiniBatch ref = mini_batch(emb, 10, 5);
  const MiniBatch test = mini_batch(emb, 20, 5);

  NeuralNet ratio(1, {4}, Head::kSoftplus, 0.01, 0);
  CHECK_THROWS_WITH((void)onnc_loss(ref, test, ratio),
                    doctest::Contains("classification head required"));
  CHECK_THROWS_WITH((void)onnc_dissimilarity(ref, test, ratio),
                    doctest::Contains("classification head required"));

  NeuralNet clf(1, {4}, Head::kSigmoid, 0.01, 0);
  CHECK_THROWS_WITH((void)onnr_loss(ref, test, clf, 0.1),
                    doctest::Contains("ratio head required"));
  CHECK_THROWS_WITH((void)onnr_score(test, clf), doctest::Contains("ratio head required"));
}

TEST_CASE("constant classifier reproduces the closed-form loss") {
  const TimeSeries s = random_series(30, 2, 2);
  const EmbeddedSeries emb = embed(s, 1);
  const MiniBatch ref = mini_batch(emb, 10, 4);
  const MiniBatch test = mini_batch(emb, 20, 4);

  NeuralNet half = constant_classifier(2, 0.5);
  CHECK(onnc_loss(ref, test, half) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-9));
  CHECK(onnc_dissimilarity(ref, test, half) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("loss gradients match central finite differences") {
  SeededRng rng(99);
  for (uint64_t trial = 0; trial < 12; ++trial) {
    const int64_t dim = 1 + static_cast<int64_t>(rng.next_u64() % 8);
    const int64_t width = 1 + static_cast<int64_t>(rng.next_u64() % 8);
    const int64_t n = 1 + static_cast<int64_t>(rng.next_u64() % 4);
    const TimeSeries s = random_series(8 * n + 10, dim, 200 + trial);
    const EmbeddedSeries emb = embed(s, 1);
    const MiniBatch ref = mini_batch(emb, n + 2, n);
    const MiniBatch test = mini_batch(emb, 4 * n + 6, n);
    const bool classification = trial % 2 == 0;

    NeuralNet net(dim, {width}, classification ? Head::kSigmoid : Head::kSoftplus, 0.01,
                  300 + trial);
    const auto lg = classification ? onnc_loss_gradient(net, ref, test)
                                   : onnr_loss_gradient(net, ref, test, 0.1);

    const double h = 1e-5;
    auto params = net.parameters();
    auto loss_at = [&]() {
      return classification ? onnc_loss(ref, test, net) : onnr_loss(ref, test, net, 0.1);
    };
    for (size_t i = 0; i < params.size(); ++i) {
      const double saved = params[i];
      params[i] = saved + h;
      const double up = loss_at();
      params[i] = saved - h;
      const double down = loss_at();
      params[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double err =
          std::abs(lg.grad[i] - fd) / std::max({1.0, std::abs(lg.grad[i]), std::abs(fd)});
      CHECK(err < 1e-4);
    }
  }
}

TEST_CASE("running mean follows the recurrence") {
  SUBCASE("hand-unrolled l=2, n=1 on a unit stream") {
    RunningMeanScore mean(2, 1);
    CHECK(mean.capacity() == 3);
    CHECK(mean.update(1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(mean.update(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(mean.update(1.0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(mean.update(1.0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(mean.update(1.0) == doctest::Approx(1.5).epsilon(1e-15));
  }
  SUBCASE("zero stream stays zero") {
    RunningMeanScore mean(100, 10);
    for (int i = 0; i < 50; ++i) {
      CHECK(mean.update(0.0) == 0.0);
    }
  }
  SUBCASE("constant stream settles at the telescoped sum d0 (l/n+1)/l") {
    const double d0 = 0.73;
    RunningMeanScore mean(100, 10);
    double value = 0.0;
    for (int i = 0; i < 40; ++i) {
      value = mean.update(d0);
    }
    // l/n + 1 window slots, each entering with weight 1/l; at n=1 this is
    // the usual (l+n)/l running-mean level
    CHECK(value == doctest::Approx(d0 * 11.0 / 100.0).epsilon(1e-12));
  }
  SUBCASE("constant stream at n=1 settles at d0 (l+n)/l") {
    const double d0 = 0.73;
    RunningMeanScore mean(100, 1);
    double value = 0.0;
    for (int i = 0; i < 300; ++i) {
      value = mean.update(d0);
    }
    CHECK(value == doctest::Approx(d0 * 101.0 / 100.0).epsilon(1e-12));
  }
}

TEST_CASE("offline shift re-indexes by l+n") {
  ScoreSeries s;
  s.start = 110;
  s.step = 10;
  s.raw.assign(100, 0.0);
  s.smoothed.assign(100, 0.0);
  s.smoothed[82] = 5.0;  // time 110 + 820 = 930

  const ScoreSeries shifted = shift_offline(std::move(s), 100, 10);
  CHECK(shifted.shifted);
  CHECK(shifted.shift_offset == 110);
  CHECK(shifted.shifted_time_at(82) == 820);
  CHECK(shifted.first_shifted_time() == 0);

  SUBCASE("shifting twice is rejected") {
    ScoreSeries copy = shifted;
    CHECK_THROWS_WITH((void)shift_offline(std::move(copy), 100, 10),
                      doctest::Contains("already shifted"));
  }
}

TEST_CASE("shift of an all-zero series is all zero") {
  ScoreSeries s;
  s.start = 50;
  s.step = 5;
  s.raw.assign(20, 0.0);
  s.smoothed.assign(20, 0.0);
  const ScoreSeries shifted = shift_offline(std::move(s), 20, 5);
  for (double v : shifted.smoothed) {
    CHECK(v == 0.0);
  }
}

TEST_CASE("peak extraction follows greedy suppression") {
  SUBCASE("all-zero score yields nothing") {
    std::vector<double> values(200, 0.0);
    const ScoreSeries s = make_shifted(std::move(values), 0, 10);
    CHECK(extract_peaks(s, 0.1, 100).empty());
  }
  SUBCASE("two separated bumps are both kept") {
    std::vector<double> values(101, 0.0);
    values[40] = 1.0;  // time 400
    values[80] = 0.8;  // time 800
    const ScoreSeries s = make_shifted(std::move(values), 0, 10);
    CHECK(extract_peaks(s, 0.5, 100) == std::vector<int64_t>{400, 800});
  }
  SUBCASE("the lower of two close bumps is suppressed") {
    std::vector<double> values(101, 0.0);
    values[40] = 1.0;  // time 400
    values[45] = 0.9;  // time 450
    const ScoreSeries s = make_shifted(std::move(values), 0, 10);
    CHECK(extract_peaks(s, 0.5, 100) == std::vector<int64_t>{400});
  }
  SUBCASE("below-threshold peaks are ignored") {
    std::vector<double> values(101, 0.0);
    values[40] = 1.0;
    values[80] = 0.3;
    const ScoreSeries s = make_shifted(std::move(values), 0, 10);
    CHECK(extract_peaks(s, 0.5, 100) == std::vector<int64_t>{400});
  }
  SUBCASE("requires the shifted view") {
    ScoreSeries s;
    s.start = 0;
    s.step = 1;
    s.raw.assign(10, 0.0);
    s.smoothed.assign(10, 0.0);
    CHECK_THROWS_WITH((void)extract_peaks(s, 0.0, 10), doctest::Contains("shifted"));
  }
}

TEST_CASE("detectors reject series below the warm-up horizon") {
  DetectorConfig cfg;
  const TimeSeries s = random_series(cfg.k + cfg.n + cfg.l - 1, 1, 4);
  CHECK_THROWS_WITH((void)run_onnc(s, cfg), doctest::Contains("warm-up horizon"));
  CHECK_THROWS_WITH((void)run_onnr(s, cfg), doctest::Contains("warm-up horizon"));
}

TEST_CASE("detector runs are deterministic for a fixed seed") {
  const TimeSeries s = random_series(400, 1, 77);
  DetectorConfig cfg;
  cfg.n = 5;
  cfg.l = 50;
  cfg.n_epochs = 2;
  cfg.seed = 3;

  const DetectionResult a = run_onnc(s, cfg);
  const DetectionResult b = run_onnc(s, cfg);
  REQUIRE(a.score.raw.size() == b.score.raw.size());
  for (size_t i = 0; i < a.score.raw.size(); ++i) {
    CHECK(a.score.raw[i] == b.score.raw[i]);
    CHECK(a.score.smoothed[i] == b.score.smoothed[i]);
  }
  CHECK(a.detected_cps == b.detected_cps);
  CHECK(a.threshold == b.threshold);

  const DetectionResult r1 = run_onnr(s, cfg);
  const DetectionResult r2 = run_onnr(s, cfg);
  for (size_t i = 0; i < r1.score.raw.size(); ++i) {
    CHECK(r1.score.raw[i] == r2.score.raw[i]);
  }
}

TEST_CASE("smoothed scores replay exactly from the raw scores") {
  const TimeSeries s = random_series(500, 1, 13);
  DetectorConfig cfg;
  cfg.n = 10;
  cfg.l = 50;
  cfg.n_epochs = 1;

  const DetectionResult result = run_onnr(s, cfg);
  RunningMeanScore mean(cfg.l, cfg.n);
  for (size_t i = 0; i < result.score.raw.size(); ++i) {
    CHECK(mean.update(result.score.raw[i]) == result.score.smoothed[i]);
  }
}

TEST_CASE("detector state and pass counts follow the contracts") {
  DetectorConfig cfg;
  cfg.n = 10;
  cfg.l = 100;
  cfg.n_epochs = 3;

  const TimeSeries s = random_series(800, 1, 21);
  const DetectionResult result = run_onnc(s, cfg);

  const int64_t expected_steps = (800 - (cfg.k + cfg.n + cfg.l)) / cfg.n + 1;
  CHECK(result.steps == expected_steps);
  CHECK(result.score_buffer_slots == cfg.l / cfg.n + 1);
  // scoring: 2n forwards; each epoch: 2n forwards and 2n backward passes
  CHECK(result.forward_evals == expected_steps * 2 * cfg.n * (1 + cfg.n_epochs));
  CHECK(result.backward_evals == expected_steps * 2 * cfg.n * cfg.n_epochs);

  const TimeSeries s2 = random_series(1600, 1, 21);
  const DetectionResult result2 = run_onnc(s2, cfg);
  CHECK(result2.score_buffer_slots == result.score_buffer_slots);
  CHECK(result2.parameter_count == result.parameter_count);
}

TEST_CASE("constant series produces near-zero scores and no detections") {
  const TimeSeries s(std::vector<double>(400, 0.0), 1);
  DetectorConfig cfg;
  cfg.n = 5;
  cfg.l = 50;

  const DetectionResult clf = run_onnc(s, cfg);
  for (double v : clf.score.smoothed) {
    CHECK(std::abs(v) < 1e-9);
  }
  CHECK(clf.detected_cps.empty());

  const DetectionResult ratio = run_onnr(s, cfg);
  for (double v : ratio.score.smoothed) {
    CHECK(std::abs(v) < 10.0);  // bounded; the two-net sum need not vanish
  }
}

TEST_CASE("identity ratio networks give a zero score") {
  // both nets output exactly 1 => each direction scores 0
  const TimeSeries s = random_series(40, 1, 31);
  const EmbeddedSeries emb = embed(s, 1);
  const MiniBatch ref = mini_batch(emb, 10, 5);
  const MiniBatch test = mini_batch(emb, 30, 5);

  NeuralNet g(1, {}, Head::kSoftplus, 0.01, 0);
  auto params = g.parameters();
  std::fill(params.begin(), params.end(), 0.0);
  params[params.size() - 1] = std::log(std::exp(1.0) - 1.0);  // softplus(b) = 1
  CHECK(onnr_score(test, g) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(onnr_score(ref, g) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("mirrored seeds with swapped batch roles replay the same score") {
  const TimeSeries s = random_series(300, 2, 41);
  const EmbeddedSeries emb = embed(s, 1);
  const int64_t n = 5;
  const int64_t l = 50;
  const double alpha = 0.1;

  NeuralNet a1(2, {8}, Head::kSoftplus, 0.05, 100);
  NeuralNet a2(2, {8}, Head::kSoftplus, 0.05, 200);
  NeuralNet b1(2, {8}, Head::kSoftplus, 0.05, 200);
  NeuralNet b2(2, {8}, Head::kSoftplus, 0.05, 100);

  for (int64_t t = 1 + n + l - 1; t <= 300; t += n) {
    const MiniBatch ref = mini_batch(emb, t - l, n);
    const MiniBatch test = mini_batch(emb, t, n);

    const double d_a = onnr_score(test, a1) + onnr_score(ref, a2);
    // run B sees the pair in reversed roles with the seeds exchanged
    const double d_b = onnr_score(ref, b1) + onnr_score(test, b2);
    CHECK(d_a == d_b);

    onnr_train_step(a1, ref, test, alpha);
    onnr_train_step(a2, test, ref, alpha);
    onnr_train_step(b1, test, ref, alpha);
    onnr_train_step(b2, ref, test, alpha);
  }
}
