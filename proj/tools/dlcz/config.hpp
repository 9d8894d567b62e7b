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

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>

#include "dlcz/model.hpp"
#include "dlcz/montecarlo/sequence.hpp"
#include "dlcz/repeater.hpp"

namespace dlcz::cli {

/// Parsed run configuration. Keys carry their units in their names
/// (`tau0_ms`, `l_att_km`); values here are SI.
struct RunConfig {
  SourceParams source;
  bool chi_set = false;
  bool werner_set = false;  // any Werner/visibility key or a calibration file

  DecayModel decay;
  DetectionChain write_chain = DetectionChain::experimental();
  DetectionChain read_chain = DetectionChain::experimental();
  SequenceConfig sequence;
  RepeaterParams repeater;

  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
};

/// Strict INI parsing: unknown sections or keys, duplicates and malformed
/// numbers are ValidationErrors. Relative calibration paths resolve against
/// `base_dir`. The result is validated against every module invariant.
RunConfig parse_config(std::istream& is, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

/// Throws ValidationError if any parameter group violates its invariants.
void validate(const RunConfig& cfg);

}  // namespace dlcz::cli
