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

#include "cpd/detector.hpp"
#include "cpd/metrics.hpp"
#include "cpd/series.hpp"

namespace cpd {

// One grid-search point; everything else comes from the base config.
struct GridPoint {
  int64_t n = 10;
  int64_t n_epochs = 10;
  double lr = 0.01;
};

// The stock hyperparameter grid: n in {1, 10}, n_epochs in {1, 10},
// lr in {0.1, 0.01}.
std::vector<GridPoint> default_grid();

struct DatasetEntry {
  std::string name;
  TimeSeries series;
  Annotation annotation;
};

// "<stem>.csv" series files paired with "<stem>.ann" annotations, sorted
// by name. Throws on an empty directory.
std::vector<DatasetEntry> load_dataset_dir(const std::string& dir);

struct BenchmarkOptions {
  std::string algo = "onnc";  // "onnc" or "onnr"
  DetectorConfig base;        // k, l, alpha, hidden and the seed base
  std::vector<GridPoint> grid = default_grid();
  PeakParams peaks;
  int64_t margin = 50;
  int workers = 0;  // 0 = hardware concurrency
};

// Grid search selects the configuration with the highest average Rand
// index; F1 is reported for the selected configuration, never optimized.
struct BenchmarkSummary {
  std::string algo;
  std::vector<GridPoint> grid;
  std::vector<std::vector<EvalReport>> reports;  // [config][series]
  std::vector<double> avg_ri;                    // per config
  std::vector<double> avg_f1;
  size_t best_config = 0;
  std::vector<DetectionResult> best_results;  // per series, best config
  std::vector<std::string> series_names;
  double total_seconds = 0.0;  // wall time; reported, never written to files
};

// Runs every grid configuration on every series across a worker pool.
// Per-series detector seeds are base.seed + series index, so results do
// not depend on scheduling.
BenchmarkSummary run_benchmark(const std::vector<DatasetEntry>& dataset,
                               const BenchmarkOptions& options);

// summary.txt (chosen config + per-config averages), summary.csv (one row
// per config x series) and the best config's score files, all byte-stable.
void write_summary(const BenchmarkSummary& summary, const std::string& dir);

}  // namespace cpd
