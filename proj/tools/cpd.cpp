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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cpd/benchmark.hpp"
#include "cpd/datagen.hpp"
#include "cpd/detector.hpp"
#include "cpd/fmt.hpp"
#include "cpd/io.hpp"
#include "cpd/metrics.hpp"
#include "cpd/plot.hpp"

namespace fs = std::filesystem;

namespace {

uint64_t fallback_seed() {
  // CPD_SEED is the seed when --seed is not given.
  if (const char* env = std::getenv("CPD_SEED")) {
    return static_cast<uint64_t>(std::strtoull(env, nullptr, 10));
  }
  return 0;
}

std::vector<int64_t> parse_hidden(const std::string& spec) {
  std::vector<int64_t> widths;
  std::string token;
  std::istringstream stream(spec);
  while (std::getline(stream, token, ',')) {
    widths.push_back(std::stoll(token));
  }
  if (widths.empty()) {
    throw CLI::ValidationError("--hidden", "expected a comma-separated width list");
  }
  return widths;
}

std::string series_stem(int64_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "series_%03lld", static_cast<long long>(index));
  return buf;
}

int cmd_generate(const std::string& family_name, const std::string& out_dir,
                 int64_t num_series, uint64_t seed, int64_t segment_length,
                 int64_t num_segments, double noise_sigma, const std::string& pool_path) {
  cpd::SyntheticSpec spec;
  spec.family = cpd::family_from_name(family_name);
  spec.segment_length = segment_length;
  spec.num_segments = num_segments;
  spec.noise_sigma = noise_sigma;
  spec.num_series = num_series;

  cpd::LabeledPool pool;
  if (spec.family == cpd::Family::kClassAlternation) {
    if (pool_path.empty()) {
      throw std::runtime_error("class_alternation requires --pool");
    }
    pool = cpd::read_labeled_pool(pool_path);
  }

  fs::create_directories(out_dir);
  std::ostringstream manifest;
  manifest << "family=" << family_name << "\n";
  manifest << "num_series=" << num_series << "\n";
  manifest << "segment_length=" << segment_length << "\n";
  manifest << "num_segments=" << num_segments << "\n";
  manifest << "seed=" << seed << "\n";
  if (spec.family == cpd::Family::kClassAlternation) {
    manifest << "noise_sigma=" << cpd::format_double(noise_sigma) << "\n";
  }

  for (int64_t i = 0; i < num_series; ++i) {
    spec.seed = seed + static_cast<uint64_t>(i);  // per-series derived seed
    const auto generated = cpd::generate(spec, &pool);
    const std::string stem = series_stem(i);
    const fs::path base = fs::path(out_dir) / stem;
    cpd::write_series(generated.series, base.string() + ".csv");
    cpd::write_annotation(generated.annotation, base.string() + ".ann");
    manifest << stem << ".csv T=" << generated.series.length()
             << " d=" << generated.series.dim()
             << " cps=" << generated.annotation.true_cps.size();
    if (generated.degenerate_covariance) {
      manifest << " degenerate_covariance=1";
    }
    manifest << "\n";
  }

  std::ofstream out(fs::path(out_dir) / "manifest.txt");
  out << manifest.str();
  std::cout << manifest.str();
  return 0;
}

struct DetectFlags {
  std::string input;
  std::string output;
  std::string config_path;
  std::string plot_path;
  std::string algo;
  cpd::DetectorConfig detector;
  cpd::PeakParams peaks;
  std::string hidden_spec;
  bool have_seed = false;
};

int cmd_detect(const CLI::App& cmd, DetectFlags& flags) {
  cpd::RunConfig run;
  if (!flags.config_path.empty()) {
    run = cpd::parse_run_config(flags.config_path);
  }
  // explicit flags win over the config file
  if (cmd.count("--algo") > 0) {
    run.algo = flags.algo;
  }
  if (run.algo.empty()) {
    throw CLI::ValidationError("--algo", "detector kind is required (onnc or onnr)");
  }
  if (cmd.count("--k") > 0) run.detector.k = flags.detector.k;
  if (cmd.count("--n") > 0) run.detector.n = flags.detector.n;
  if (cmd.count("--l") > 0) run.detector.l = flags.detector.l;
  if (cmd.count("--epochs") > 0) run.detector.n_epochs = flags.detector.n_epochs;
  if (cmd.count("--lr") > 0) run.detector.lr = flags.detector.lr;
  if (cmd.count("--alpha") > 0) run.detector.alpha = flags.detector.alpha;
  if (cmd.count("--hidden") > 0) run.detector.hidden = parse_hidden(flags.hidden_spec);
  if (flags.have_seed) {
    run.detector.seed = flags.detector.seed;
  } else if (flags.config_path.empty()) {
    run.detector.seed = fallback_seed();
  }
  if (cmd.count("--threshold") > 0) run.peaks.threshold = flags.peaks.threshold;
  if (cmd.count("--min-distance") > 0) run.peaks.min_distance = flags.peaks.min_distance;

  const cpd::TimeSeries series = cpd::read_series(flags.input);
  const cpd::DetectionResult result =
      run.algo == "onnc" ? cpd::run_onnc(series, run.detector, run.peaks)
                         : cpd::run_onnr(series, run.detector, run.peaks);
  cpd::write_scores(result, flags.output);
  if (!flags.plot_path.empty()) {
    cpd::write_detection_plot(series, result, flags.plot_path);
  }

  std::cout << "algo=" << run.algo << " steps=" << result.steps
            << " detections=" << result.detected_cps.size()
            << " threshold=" << cpd::format_double(result.threshold) << "\n";
  for (int64_t cp : result.detected_cps) {
    std::cout << "detected " << cp << "\n";
  }
  return 0;
}

int cmd_evaluate(const std::string& scores_path, const std::string& annotation_path,
                 int64_t margin, int64_t length, const std::string& out_path) {
  const cpd::ScoreFile scores = cpd::read_scores(scores_path);
  const cpd::Annotation annotation = cpd::read_annotation(annotation_path);
  const auto detected = scores.detections();

  int64_t total = length;
  if (total <= 0) {
    // infer from the inputs when the caller does not pass the series length
    total = scores.t.empty() ? 0 : scores.t.back();
    for (int64_t cp : annotation.true_cps) {
      total = std::max(total, cp);
    }
  }

  const cpd::EvalReport report =
      cpd::evaluate_detections(annotation.true_cps, detected, total, margin);
  if (!out_path.empty()) {
    cpd::write_report(report, out_path);
    cpd::write_report_csv(report, out_path + ".csv");
  }
  std::cout << "tp=" << report.tp_count << "\n";
  std::cout << "precision=" << cpd::format_double(report.precision) << "\n";
  std::cout << "recall=" << cpd::format_double(report.recall) << "\n";
  std::cout << "f1=" << cpd::format_double(report.f1) << "\n";
  std::cout << "rand_index=" << cpd::format_double(report.rand_index) << "\n";
  return 0;
}

int cmd_benchmark(const std::string& dataset_dir, const std::string& out_dir,
                  cpd::BenchmarkOptions& options) {
  const auto dataset = cpd::load_dataset_dir(dataset_dir);
  const cpd::BenchmarkSummary summary = cpd::run_benchmark(dataset, options);

  for (size_t c = 0; c < summary.grid.size(); ++c) {
    for (size_t s = 0; s < summary.reports[c].size(); ++s) {
      const auto& report = summary.reports[c][s];
      std::cout << "run config=" << c << " n=" << summary.grid[c].n
                << " n_epochs=" << summary.grid[c].n_epochs
                << " lr=" << cpd::format_double(summary.grid[c].lr)
                << " series=" << summary.series_names[s]
                << " ri=" << cpd::format_double(report.rand_index)
                << " f1=" << cpd::format_double(report.f1) << "\n";
    }
  }
  const auto& best = summary.grid[summary.best_config];
  std::cout << "best config=" << summary.best_config << " n=" << best.n
            << " n_epochs=" << best.n_epochs << " lr=" << cpd::format_double(best.lr)
            << "\n";
  std::cout << "best avg_ri=" << cpd::format_double(summary.avg_ri[summary.best_config])
            << " avg_f1=" << cpd::format_double(summary.avg_f1[summary.best_config])
            << "\n";
  std::cout << "total_seconds=" << cpd::format_double(summary.total_seconds) << "\n";

  cpd::write_summary(summary, out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online neural-network change-point detection toolkit"};
  app.require_subcommand(1);

  // generate
  std::string family;
  std::string gen_out;
  int64_t gen_series = 10;
  uint64_t gen_seed = fallback_seed();
  int64_t gen_segment_length = 200;
  int64_t gen_segments = 10;
  double gen_noise = 0.0;
  std::string gen_pool;
  auto* generate = app.add_subcommand("generate", "generate synthetic benchmark series");
  generate->add_option("--family", family, "mean_jumps, variance_jumps, cov_jumps or class_alternation")
      ->required()
      ->check(CLI::IsMember({"mean_jumps", "variance_jumps", "cov_jumps", "class_alternation"}));
  generate->add_option("--out", gen_out, "output directory")->required();
  generate->add_option("--series", gen_series, "number of series");
  generate->add_option("--seed", gen_seed, "base seed (per-series seed is seed + index)");
  generate->add_option("--segment-length", gen_segment_length, "observations per segment");
  generate->add_option("--segments", gen_segments, "number of segments");
  generate->add_option("--noise-sigma", gen_noise, "white-noise sigma (class_alternation)");
  generate->add_option("--pool", gen_pool, "labeled pool CSV (class_alternation)");

  // detect
  DetectFlags detect_flags;
  auto* detect = app.add_subcommand("detect", "run a detector over a series CSV");
  detect->add_option("--input", detect_flags.input, "series CSV")->required();
  detect->add_option("--out", detect_flags.output, "score CSV to write")->required();
  detect->add_option("--algo", detect_flags.algo, "onnc or onnr")
      ->check(CLI::IsMember({"onnc", "onnr"}));
  detect->add_option("--config", detect_flags.config_path, "key=value run config file");
  detect->add_option("--k", detect_flags.detector.k, "embedding depth");
  detect->add_option("--n", detect_flags.detector.n, "mini-batch size");
  detect->add_option("--l", detect_flags.detector.l, "lag size");
  detect->add_option("--epochs", detect_flags.detector.n_epochs, "optimizer iterations per pair");
  detect->add_option("--lr", detect_flags.detector.lr, "learning rate");
  detect->add_option("--alpha", detect_flags.detector.alpha, "relative ratio weight (onnr)");
  detect->add_option("--hidden", detect_flags.hidden_spec, "hidden widths, e.g. 32 or 64,32");
  auto* seed_opt = detect->add_option("--seed", detect_flags.detector.seed, "detector seed");
  detect->add_option("--threshold", detect_flags.peaks.threshold,
                     "peak threshold (default: adaptive)");
  detect->add_option("--min-distance", detect_flags.peaks.min_distance,
                     "minimum distance between detections (default: l)");
  detect->add_option("--plot", detect_flags.plot_path, "write a two-panel SVG plot");

  // evaluate
  std::string eval_scores;
  std::string eval_annotation;
  std::string eval_out;
  int64_t eval_margin = 50;
  int64_t eval_length = 0;
  auto* evaluate = app.add_subcommand("evaluate", "score detections against an annotation");
  evaluate->add_option("--scores", eval_scores, "score CSV from detect")->required();
  evaluate->add_option("--annotation", eval_annotation, "true change points, one per line")
      ->required();
  evaluate->add_option("--margin", eval_margin, "match margin M");
  evaluate->add_option("--length", eval_length, "series length T (default: inferred)");
  evaluate->add_option("--out", eval_out, "report path (also writes <path>.csv)");

  // benchmark
  std::string bench_dataset;
  std::string bench_out;
  cpd::BenchmarkOptions bench;
  std::string bench_hidden;
  uint64_t bench_seed = fallback_seed();
  auto* benchmark = app.add_subcommand("benchmark", "grid search over a dataset directory");
  benchmark->add_option("--dataset", bench_dataset, "directory of series CSV + .ann pairs")
      ->required();
  benchmark->add_option("--out", bench_out, "output directory")->required();
  benchmark->add_option("--algo", bench.algo, "onnc or onnr")
      ->required()
      ->check(CLI::IsMember({"onnc", "onnr"}));
  benchmark->add_option("--l", bench.base.l, "lag size");
  benchmark->add_option("--k", bench.base.k, "embedding depth (fixed, not in the grid)");
  benchmark->add_option("--alpha", bench.base.alpha, "relative ratio weight (onnr)");
  benchmark->add_option("--hidden", bench_hidden, "hidden widths");
  benchmark->add_option("--seed", bench_seed, "base seed (per-series seed is seed + index)");
  benchmark->add_option("--margin", bench.margin, "match margin M");
  benchmark->add_option("--workers", bench.workers, "worker pool size (default: cores)");
  benchmark->add_option("--threshold", bench.peaks.threshold,
                        "peak threshold (default: adaptive)");
  benchmark->add_option("--min-distance", bench.peaks.min_distance,
                        "minimum distance between detections (default: l)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      return cmd_generate(family, gen_out, gen_series, gen_seed, gen_segment_length,
                          gen_segments, gen_noise, gen_pool);
    }
    if (detect->parsed()) {
      detect_flags.have_seed = seed_opt->count() > 0;
      return cmd_detect(*detect, detect_flags);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(eval_scores, eval_annotation, eval_margin, eval_length, eval_out);
    }
    if (benchmark->parsed()) {
      bench.base.seed = bench_seed;
      if (!bench_hidden.empty()) {
        bench.base.hidden = parse_hidden(bench_hidden);
      }
      return cmd_benchmark(bench_dataset, bench_out, bench);
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
