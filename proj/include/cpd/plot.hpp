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

#include <string>

#include "cpd/detector.hpp"
#include "cpd/series.hpp"

namespace cpd {

// Two-panel SVG: the signal on top, the shifted detection score with the
// threshold line and detected change points below. Static vector output,
// no display dependency.
void write_detection_plot(const TimeSeries& series, const DetectionResult& result,
                          const std::string& path);

}  // namespace cpd
