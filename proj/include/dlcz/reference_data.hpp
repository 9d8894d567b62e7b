// Copyright 2026 The dlcz-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Reference measurements of the 6 m ring-cavity source, used as calibration
// targets and acceptance anchors.

#include <vector>

#include "dlcz/calibration.hpp"

namespace dlcz::reference {

inline constexpr double kZeroDelayRetrieval = 0.77;
inline constexpr double kRetrievalLifetime = 1e-3;  // s
inline constexpr double kCieZeroDelayRetrieval = 0.58;
inline constexpr double kNoisePerReadPulse = 1e-4;
inline constexpr double kBellExcitation = 0.02;
inline constexpr double kEfficiencyExcitation = 0.01;

/// Reference points of the retrieval-efficiency curve. They carry no error
/// bars; 0.01 is assigned.
inline std::vector<DataPoint> efficiency_points() {
  return {{0.0, 0.77, 0.01}, {0.23e-3, 0.667, 0.01}, {0.54e-3, 0.51, 0.01}};
}

/// Measured CHSH values with their standard errors.
inline std::vector<DataPoint> bell_points() {
  return {{0.0, 2.5, 0.02}, {1.15e-3, 2.05, 0.03}, {2.6e-3, 1.15, 0.03}};
}

}  // namespace dlcz::reference
