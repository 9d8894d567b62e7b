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

#include "dlcz/calibration.hpp"
#include "dlcz/crossing_report.hpp"
#include "dlcz/errors.hpp"
#include "dlcz/model.hpp"
#include "dlcz/montecarlo/bootstrap.hpp"
#include "dlcz/montecarlo/engine.hpp"
#include "dlcz/montecarlo/sequence.hpp"
#include "dlcz/montecarlo/sweep.hpp"
#include "dlcz/reference_data.hpp"
#include "dlcz/repeater.hpp"
#include "dlcz/rng.hpp"
