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

#include "cpd/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace cpd {

namespace {

constexpr double kWidth = 1000.0;
constexpr double kHeight = 620.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 980.0;

const char* kPalette[] = {"#1f6fb2", "#d1495b", "#3a8f5f", "#8d6ba8",
                          "#c98a2b", "#4f9ea8"};

struct Panel {
  double top;
  double bottom;
  double lo;
  double hi;

  double y(double v) const {
    const double span = hi - lo;
    const double f = span > 0.0 ? (v - lo) / span : 0.5;
    return bottom - f * (bottom - top);
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_detection_plot(const TimeSeries& series, const DetectionResult& result,
                          const std::string& path) {
  const ScoreSeries& score = result.score;
  if (!score.shifted) {
    throw std::logic_error("plot requires the shifted score");
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open plot file for writing: " + path);
  }

  const double t_min = static_cast<double>(series.start_index());
  const double t_max = static_cast<double>(series.last_index());
  auto x_of = [&](double t) {
    return kLeft + (t - t_min) / std::max(1.0, t_max - t_min) * (kRight - kLeft);
  };

  double sig_lo = series.raw()[0], sig_hi = series.raw()[0];
  for (double v : series.raw()) {
    sig_lo = std::min(sig_lo, v);
    sig_hi = std::max(sig_hi, v);
  }
  double sc_lo = 0.0, sc_hi = 0.0;
  if (!score.smoothed.empty()) {
    sc_lo = *std::min_element(score.smoothed.begin(), score.smoothed.end());
    sc_hi = *std::max_element(score.smoothed.begin(), score.smoothed.end());
  }
  sc_lo = std::min(sc_lo, result.threshold);
  sc_hi = std::max(sc_hi, result.threshold);

  const Panel signal{40.0, 280.0, sig_lo, sig_hi};
  const Panel scores{350.0, 590.0, sc_lo, sc_hi};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  auto frame = [&](const Panel& p, const std::string& title) {
    out << "<rect x=\"" << kLeft << "\" y=\"" << p.top << "\" width=\""
        << kRight - kLeft << "\" height=\"" << p.bottom - p.top
        << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << kLeft << "\" y=\"" << p.top - 8
        << "\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << p.top + 12
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt(p.hi) << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << p.bottom
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt(p.lo) << "</text>\n";
  };
  frame(signal, "signal");
  frame(scores, "detection score (shifted)");

  // time axis labels under the lower panel
  out << "<text x=\"" << kLeft << "\" y=\"" << scores.bottom + 18
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t_min) << "</text>\n";
  out << "<text x=\"" << kRight << "\" y=\"" << scores.bottom + 18
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt(t_max) << "</text>\n";

  for (int64_t dimension = 0; dimension < series.dim(); ++dimension) {
    out << "<polyline fill=\"none\" stroke=\""
        << kPalette[dimension % (sizeof(kPalette) / sizeof(kPalette[0]))]
        << "\" stroke-width=\"0.8\" points=\"";
    for (int64_t t = series.start_index(); t <= series.last_index(); ++t) {
      out << fmt(x_of(static_cast<double>(t))) << ","
          << fmt(signal.y(series.value(t, dimension))) << " ";
    }
    out << "\"/>\n";
  }

  if (!score.smoothed.empty()) {
    out << "<polyline fill=\"none\" stroke=\"#222\" stroke-width=\"1.2\" points=\"";
    for (size_t j = 0; j < score.smoothed.size(); ++j) {
      out << fmt(x_of(static_cast<double>(score.shifted_time_at(j)))) << ","
          << fmt(scores.y(score.smoothed[j])) << " ";
    }
    out << "\"/>\n";
  }

  out << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(scores.y(result.threshold))
      << "\" x2=\"" << kRight << "\" y2=\"" << fmt(scores.y(result.threshold))
      << "\" stroke=\"#999\" stroke-width=\"1\" stroke-dasharray=\"6 4\"/>\n";

  for (int64_t cp : result.detected_cps) {
    const double x = x_of(static_cast<double>(cp));
    out << "<line x1=\"" << fmt(x) << "\" y1=\"" << scores.top << "\" x2=\"" << fmt(x)
        << "\" y2=\"" << scores.bottom
        << "\" stroke=\"#d1495b\" stroke-width=\"1\" stroke-dasharray=\"2 3\"/>\n";
    out << "<circle cx=\"" << fmt(x) << "\" cy=\"" << scores.top
        << "\" r=\"3\" fill=\"#d1495b\"/>\n";
  }

  out << "</svg>\n";
}

}  // namespace cpd
