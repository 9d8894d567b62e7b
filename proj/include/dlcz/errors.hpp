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

#include <stdexcept>
#include <string>
#include <vector>

namespace dlcz {

// A parameter or input violates a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An estimator has nothing to divide by (e.g. zero coincidences).
class InsufficientStatistics : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A fit failed to converge or landed outside its acceptance region. Carries
// the best iterate found and its residuals so callers can report them.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, std::vector<double> best_parameters = {},
                   std::vector<double> residuals = {})
      : std::runtime_error(what),
        best_parameters_(std::move(best_parameters)),
        residuals_(std::move(residuals)) {}

  const std::vector<double>& best_parameters() const noexcept { return best_parameters_; }
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> best_parameters_;
  std::vector<double> residuals_;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

inline bool is_probability(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace detail
}  // namespace dlcz
