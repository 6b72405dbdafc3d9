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

#include "cpd/datagen.hpp"
#include "cpd/detector.hpp"
#include "cpd/metrics.hpp"
#include "cpd/series.hpp"

namespace cpd {

// All writers emit byte-stable output: shortest round-trip numbers, no
// timestamps, '\n' line endings.

// Series CSV: header "t,x1,...,xd", one row per observation, t strictly
// increasing integers. start_index of the result is the first t.
TimeSeries read_series(const std::string& path);
void write_series(const TimeSeries& series, const std::string& path);

// Annotation sidecar: change-point positions, one per line, sorted.
Annotation read_annotation(const std::string& path);
void write_annotation(const Annotation& annotation, const std::string& path);

// Score CSV: header "t,d_raw,d_bar,d_bar_shifted,is_detection" over the
// union of the raw and shifted grids; cells are empty where a column is
// not defined at that t.
void write_scores(const DetectionResult& result, const std::string& path);

// Parsed score file; NaN marks cells that were empty.
struct ScoreFile {
  std::vector<int64_t> t;
  std::vector<double> d_raw;
  std::vector<double> d_bar;
  std::vector<double> d_bar_shifted;
  std::vector<int> is_detection;

  std::vector<int64_t> detections() const;
};
ScoreFile read_scores(const std::string& path);

// Quality report as flat key=value lines / as a one-row CSV.
void write_report(const EvalReport& report, const std::string& path);
void write_report_csv(const EvalReport& report, const std::string& path);

// Labeled pool CSV for the class-alternation generator: header
// "label,x1,...,xd", label 1 for the positive class, 0 for the negative.
LabeledPool read_labeled_pool(const std::string& path);

// Flat key=value run configuration. "algo" is required; every other key
// has a default. Unknown keys are rejected.
struct RunConfig {
  std::string algo;  // "onnc" or "onnr"
  DetectorConfig detector;
  PeakParams peaks;
  int64_t margin = 50;
};
RunConfig parse_run_config(const std::string& path);

}  // namespace cpd
