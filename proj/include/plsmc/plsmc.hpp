// Copyright 2026 The plsmc Authors
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

#include "plsmc/cloud.hpp"
#include "plsmc/config_file.hpp"
#include "plsmc/csv.hpp"
#include "plsmc/errors.hpp"
#include "plsmc/experiments.hpp"
#include "plsmc/filters/run.hpp"
#include "plsmc/models/ar_level.hpp"
#include "plsmc/models/dynamic_factor.hpp"
#include "plsmc/models/heavy_tailed.hpp"
#include "plsmc/models/local_level.hpp"
#include "plsmc/monitoring.hpp"
#include "plsmc/oracle/grid.hpp"
#include "plsmc/oracle/kalman.hpp"
#include "plsmc/rng.hpp"
#include "plsmc/smoothing.hpp"
#include "plsmc/stats.hpp"
#include "plsmc/weights.hpp"
