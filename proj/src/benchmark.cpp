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

#include "cpd/benchmark.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "cpd/fmt.hpp"
#include "cpd/io.hpp"

namespace cpd {

namespace fs = std::filesystem;

std::vector<GridPoint> default_grid() {
  std::vector<GridPoint> grid;
  for (int64_t n : {1, 10}) {
    for (int64_t epochs : {1, 10}) {
      for (double lr : {0.1, 0.01}) {
        grid.push_back({n, epochs, lr});
      }
    }
  }
  return grid;
}

std::vector<DatasetEntry> load_dataset_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("dataset directory does not exist: " + dir);
  }
  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") {
      continue;
    }
    fs::path ann = entry.path();
    ann.replace_extension(".ann");
    if (fs::exists(ann)) {
      stems.push_back(entry.path().stem().string());
    }
  }
  std::sort(stems.begin(), stems.end());
  if (stems.empty()) {
    throw std::runtime_error("empty dataset dir: " + dir);
  }

  std::vector<DatasetEntry> dataset;
  dataset.reserve(stems.size());
  for (const auto& stem : stems) {
    const fs::path base = fs::path(dir) / stem;
    dataset.push_back({stem, read_series(base.string() + ".csv"),
                       read_annotation(base.string() + ".ann")});
  }
  return dataset;
}

BenchmarkSummary run_benchmark(const std::vector<DatasetEntry>& dataset,
                               const BenchmarkOptions& options) {
  if (dataset.empty()) {
    throw std::invalid_argument("empty dataset dir");
  }
  if (options.algo != "onnc" && options.algo != "onnr") {
    throw std::invalid_argument("algo must be onnc or onnr");
  }
  if (options.grid.empty()) {
    throw std::invalid_argument("empty hyperparameter grid");
  }

  const size_t num_configs = options.grid.size();
  const size_t num_series = dataset.size();
  const size_t num_jobs = num_configs * num_series;

  std::vector<DetectionResult> results(num_jobs);
  std::vector<EvalReport> reports(num_jobs);

  const auto t0 = std::chrono::steady_clock::now();

  std::atomic<size_t> next_job{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    while (true) {
      const size_t job = next_job.fetch_add(1);
      if (job >= num_jobs) {
        return;
      }
      try {
        const size_t c = job / num_series;
        const size_t s = job % num_series;
        DetectorConfig cfg = options.base;
        cfg.n = options.grid[c].n;
        cfg.n_epochs = options.grid[c].n_epochs;
        cfg.lr = options.grid[c].lr;
        cfg.seed = options.base.seed + s;

        const auto& entry = dataset[s];
        DetectionResult result = options.algo == "onnc"
                                     ? run_onnc(entry.series, cfg, options.peaks)
                                     : run_onnr(entry.series, cfg, options.peaks);
        reports[job] =
            evaluate_detections(entry.annotation.true_cps, result.detected_cps,
                                entry.series.length(), options.margin);
        results[job] = std::move(result);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) {
          first_error = std::current_exception();
        }
        return;
      }
    }
  };

  size_t num_workers = options.workers > 0
                           ? static_cast<size_t>(options.workers)
                           : std::max(1u, std::thread::hardware_concurrency());
  num_workers = std::min(num_workers, num_jobs);
  std::vector<std::thread> threads;
  threads.reserve(num_workers);
  for (size_t w = 0; w < num_workers; ++w) {
    threads.emplace_back(worker);
  }
  for (auto& t : threads) {
    t.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }

  BenchmarkSummary summary;
  summary.algo = options.algo;
  summary.grid = options.grid;
  summary.reports.resize(num_configs);
  summary.avg_ri.resize(num_configs);
  summary.avg_f1.resize(num_configs);
  for (size_t c = 0; c < num_configs; ++c) {
    double ri = 0.0;
    double f1 = 0.0;
    summary.reports[c].reserve(num_series);
    for (size_t s = 0; s < num_series; ++s) {
      const auto& report = reports[c * num_series + s];
      ri += report.rand_index;
      f1 += report.f1;
      summary.reports[c].push_back(report);
    }
    summary.avg_ri[c] = ri / static_cast<double>(num_series);
    summary.avg_f1[c] = f1 / static_cast<double>(num_series);
    if (summary.avg_ri[c] > summary.avg_ri[summary.best_config]) {
      summary.best_config = c;
    }
  }
  summary.best_results.reserve(num_series);
  for (size_t s = 0; s < num_series; ++s) {
    summary.best_results.push_back(std::move(results[summary.best_config * num_series + s]));
  }
  for (const auto& entry : dataset) {
    summary.series_names.push_back(entry.name);
  }
  summary.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return summary;
}

void write_summary(const BenchmarkSummary& summary, const std::string& dir) {
  fs::create_directories(dir);

  {
    std::ofstream out(fs::path(dir) / "summary.txt");
    if (!out) {
      throw std::runtime_error("cannot write summary under " + dir);
    }
    const auto& best = summary.grid[summary.best_config];
    out << "algo=" << summary.algo << "\n";
    out << "best_n=" << best.n << "\n";
    out << "best_n_epochs=" << best.n_epochs << "\n";
    out << "best_lr=" << format_double(best.lr) << "\n";
    out << "best_avg_ri=" << format_double(summary.avg_ri[summary.best_config]) << "\n";
    out << "best_avg_f1=" << format_double(summary.avg_f1[summary.best_config]) << "\n";
    out << "num_series=" << summary.series_names.size() << "\n";
    out << "num_configs=" << summary.grid.size() << "\n";
    for (size_t c = 0; c < summary.grid.size(); ++c) {
      out << "config_" << c << "=n:" << summary.grid[c].n
          << ",n_epochs:" << summary.grid[c].n_epochs
          << ",lr:" << format_double(summary.grid[c].lr)
          << ",avg_ri:" << format_double(summary.avg_ri[c])
          << ",avg_f1:" << format_double(summary.avg_f1[c]) << "\n";
    }
  }

  {
    std::ofstream out(fs::path(dir) / "summary.csv");
    out << "config,n,n_epochs,lr,series,ri,f1,precision,recall,tp,num_detected\n";
    for (size_t c = 0; c < summary.grid.size(); ++c) {
      for (size_t s = 0; s < summary.reports[c].size(); ++s) {
        const auto& report = summary.reports[c][s];
        out << c << "," << summary.grid[c].n << "," << summary.grid[c].n_epochs << ","
            << format_double(summary.grid[c].lr) << "," << summary.series_names[s]
            << "," << format_double(report.rand_index) << ","
            << format_double(report.f1) << "," << format_double(report.precision)
            << "," << format_double(report.recall) << "," << report.tp_count << ","
            << report.num_detected << "\n";
      }
    }
  }

  for (size_t s = 0; s < summary.best_results.size(); ++s) {
    const fs::path path = fs::path(dir) / ("scores_" + summary.series_names[s] + ".csv");
    write_scores(summary.best_results[s], path.string());
  }
}

}  // namespace cpd
