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

#include "cpd/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cpd/fmt.hpp"

namespace cpd {

namespace {

[[noreturn]] void fail_at_line(const std::string& path, size_t line, const std::string& what) {
  std::ostringstream os;
  os << path << ":" << line << ": " << what;
  throw std::runtime_error(os.str());
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  size_t begin = 0;
  while (true) {
    const size_t end = line.find(sep, begin);
    if (end == std::string::npos) {
      fields.push_back(line.substr(begin));
      break;
    }
    fields.push_back(line.substr(begin, end - begin));
    begin = end + 1;
  }
  return fields;
}

bool parse_int(const std::string& s, int64_t& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

bool parse_num(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path);
  }
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open file for writing: " + path);
  }
  return out;
}

}  // namespace

TimeSeries read_series(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  size_t line_no = 0;

  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty series file");
  }
  ++line_no;
  const auto header = split(line, ',');
  if (header.size() < 2 || header[0] != "t") {
    fail_at_line(path, line_no, "expected header t,x1,...,xd");
  }
  const size_t dim = header.size() - 1;

  std::vector<double> values;
  int64_t start_index = 0;
  int64_t prev_t = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != dim + 1) {
      fail_at_line(path, line_no, "wrong number of fields");
    }
    int64_t t = 0;
    if (!parse_int(fields[0], t)) {
      fail_at_line(path, line_no, "cannot parse time index '" + fields[0] + "'");
    }
    if (first) {
      start_index = t;
      first = false;
    } else if (t <= prev_t) {
      fail_at_line(path, line_no, "time indices must be strictly increasing");
    }
    prev_t = t;
    for (size_t j = 1; j < fields.size(); ++j) {
      double v = 0.0;
      if (!parse_num(fields[j], v)) {
        fail_at_line(path, line_no, "cannot parse value '" + fields[j] + "'");
      }
      if (!std::isfinite(v)) {
        fail_at_line(path, line_no, "non-finite value");
      }
      values.push_back(v);
    }
  }
  if (values.empty()) {
    throw std::runtime_error(path + ": series file has no observations");
  }
  return TimeSeries(std::move(values), static_cast<int64_t>(dim), start_index);
}

void write_series(const TimeSeries& series, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "t";
  for (int64_t j = 1; j <= series.dim(); ++j) {
    out << ",x" << j;
  }
  out << "\n";
  for (int64_t t = series.start_index(); t <= series.last_index(); ++t) {
    out << t;
    for (double v : series.row(t)) {
      out << "," << format_double(v);
    }
    out << "\n";
  }
}

Annotation read_annotation(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<int64_t> cps;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    int64_t pos = 0;
    if (!parse_int(line, pos)) {
      fail_at_line(path, line_no, "cannot parse change-point position '" + line + "'");
    }
    if (!cps.empty() && pos <= cps.back()) {
      fail_at_line(path, line_no, "annotation positions must be sorted and unique");
    }
    cps.push_back(pos);
  }
  return Annotation(std::move(cps));
}

void write_annotation(const Annotation& annotation, const std::string& path) {
  std::ofstream out = open_out(path);
  for (int64_t cp : annotation.true_cps) {
    out << cp << "\n";
  }
}

void write_scores(const DetectionResult& result, const std::string& path) {
  const ScoreSeries& s = result.score;
  if (!s.shifted) {
    throw std::logic_error("score series must be shifted before writing");
  }
  std::ofstream out = open_out(path);
  out << "t,d_raw,d_bar,d_bar_shifted,is_detection\n";

  const std::set<int64_t> detected(result.detected_cps.begin(), result.detected_cps.end());
  const int64_t last_raw = s.time_at(s.size() - 1);
  for (int64_t t = s.first_shifted_time(); t <= last_raw; t += s.step) {
    out << t << ",";
    if (t >= s.start) {
      const size_t j = static_cast<size_t>((t - s.start) / s.step);
      out << format_double(s.raw[j]) << "," << format_double(s.smoothed[j]) << ",";
    } else {
      out << ",,";
    }
    if (t <= s.last_shifted_time()) {
      const size_t j = static_cast<size_t>((t - s.first_shifted_time()) / s.step);
      out << format_double(s.smoothed[j]);
    }
    out << "," << (detected.count(t) ? 1 : 0) << "\n";
  }
}

std::vector<int64_t> ScoreFile::detections() const {
  std::vector<int64_t> out;
  for (size_t i = 0; i < t.size(); ++i) {
    if (is_detection[i] != 0) {
      out.push_back(t[i]);
    }
  }
  return out;
}

ScoreFile read_scores(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty score file");
  }
  ++line_no;
  if (line != "t,d_raw,d_bar,d_bar_shifted,is_detection") {
    fail_at_line(path, line_no, "unexpected score header");
  }

  ScoreFile file;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 5) {
      fail_at_line(path, line_no, "wrong number of fields");
    }
    int64_t t = 0;
    if (!parse_int(fields[0], t)) {
      fail_at_line(path, line_no, "cannot parse time index");
    }
    file.t.push_back(t);
    for (size_t c = 1; c <= 3; ++c) {
      auto& column = c == 1 ? file.d_raw : c == 2 ? file.d_bar : file.d_bar_shifted;
      if (fields[c].empty()) {
        column.push_back(nan);
      } else {
        double v = 0.0;
        if (!parse_num(fields[c], v)) {
          fail_at_line(path, line_no, "cannot parse score value '" + fields[c] + "'");
        }
        column.push_back(v);
      }
    }
    int64_t flag = 0;
    if (!parse_int(fields[4], flag) || (flag != 0 && flag != 1)) {
      fail_at_line(path, line_no, "is_detection must be 0 or 1");
    }
    file.is_detection.push_back(static_cast<int>(flag));
  }
  return file;
}

void write_report(const EvalReport& report, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "tp=" << report.tp_count << "\n";
  out << "precision=" << format_double(report.precision) << "\n";
  out << "recall=" << format_double(report.recall) << "\n";
  out << "f1=" << format_double(report.f1) << "\n";
  out << "rand_index=" << format_double(report.rand_index) << "\n";
  out << "margin=" << report.margin << "\n";
  out << "num_true=" << report.num_true << "\n";
  out << "num_detected=" << report.num_detected << "\n";
  out << "length=" << report.length << "\n";
  // detections are matched one-to-one, so precision stays <= 1 even when
  // several true points share a nearby detection
  out << "matching=one_to_one\n";
  out << "matched_pairs=";
  for (size_t i = 0; i < report.matches.pairs.size(); ++i) {
    if (i > 0) {
      out << ";";
    }
    out << report.matches.pairs[i].true_cp << ":" << report.matches.pairs[i].detected_cp;
  }
  out << "\n";
}

void write_report_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "tp,precision,recall,f1,rand_index,margin,num_true,num_detected,length\n";
  out << report.tp_count << "," << format_double(report.precision) << ","
      << format_double(report.recall) << "," << format_double(report.f1) << ","
      << format_double(report.rand_index) << "," << report.margin << ","
      << report.num_true << "," << report.num_detected << "," << report.length << "\n";
}

LabeledPool read_labeled_pool(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty pool file");
  }
  ++line_no;
  const auto header = split(line, ',');
  if (header.size() < 2 || header[0] != "label") {
    fail_at_line(path, line_no, "expected header label,x1,...,xd");
  }
  const size_t dim = header.size() - 1;

  LabeledPool pool;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != dim + 1) {
      fail_at_line(path, line_no, "wrong number of fields");
    }
    int64_t label = 0;
    if (!parse_int(fields[0], label) || (label != 0 && label != 1)) {
      fail_at_line(path, line_no, "label must be 0 or 1");
    }
    std::vector<double> v(dim);
    for (size_t j = 0; j < dim; ++j) {
      if (!parse_num(fields[j + 1], v[j]) || !std::isfinite(v[j])) {
        fail_at_line(path, line_no, "cannot parse feature value");
      }
    }
    (label == 1 ? pool.positive : pool.negative).push_back(std::move(v));
  }
  return pool;
}

RunConfig parse_run_config(const std::string& path) {
  std::ifstream in = open_in(path);
  RunConfig cfg;
  bool have_algo = false;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') {
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail_at_line(path, line_no, "expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);

    auto int_value = [&](int64_t& out) {
      if (!parse_int(value, out)) {
        fail_at_line(path, line_no, "cannot parse integer for key '" + key + "'");
      }
    };
    auto num_value = [&](double& out) {
      if (!parse_num(value, out)) {
        fail_at_line(path, line_no, "cannot parse number for key '" + key + "'");
      }
    };

    if (key == "algo") {
      if (value != "onnc" && value != "onnr") {
        fail_at_line(path, line_no, "algo must be onnc or onnr");
      }
      cfg.algo = value;
      have_algo = true;
    } else if (key == "k") {
      int_value(cfg.detector.k);
    } else if (key == "n") {
      int_value(cfg.detector.n);
    } else if (key == "l") {
      int_value(cfg.detector.l);
    } else if (key == "n_epochs") {
      int_value(cfg.detector.n_epochs);
    } else if (key == "lr") {
      num_value(cfg.detector.lr);
    } else if (key == "alpha") {
      num_value(cfg.detector.alpha);
    } else if (key == "seed") {
      int64_t seed = 0;
      int_value(seed);
      cfg.detector.seed = static_cast<uint64_t>(seed);
    } else if (key == "hidden") {
      cfg.detector.hidden.clear();
      for (const auto& part : split(value, ',')) {
        int64_t width = 0;
        if (!parse_int(part, width)) {
          fail_at_line(path, line_no, "cannot parse hidden widths");
        }
        cfg.detector.hidden.push_back(width);
      }
    } else if (key == "threshold") {
      if (value == "auto") {
        cfg.peaks.threshold = std::numeric_limits<double>::quiet_NaN();
      } else {
        num_value(cfg.peaks.threshold);
      }
    } else if (key == "min_distance") {
      if (value == "auto") {
        cfg.peaks.min_distance = 0;
      } else {
        int_value(cfg.peaks.min_distance);
      }
    } else if (key == "margin") {
      int_value(cfg.margin);
    } else {
      fail_at_line(path, line_no, "unknown config key '" + key + "'");
    }
  }
  if (!have_algo) {
    throw std::runtime_error(path + ": missing required config key 'algo'");
  }
  return cfg;
}

}  // namespace cpd
