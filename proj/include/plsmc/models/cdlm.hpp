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

#include <array>
#include <cstddef>
#include <functional>

#include "plsmc/errors.hpp"

namespace plsmc {

// Generic descriptor of a conditionally Gaussian (possibly nonlinear) dynamic
// model with scalar state and up to two observation components:
//
//   y_{t+1} = F(lambda) x_{t+1} + v,  v ~ N(0, V(lambda) I)
//   x_{t+1} = G h(x_t) + w,           w ~ N(0, W)
//
// lambda is an auxiliary state: a two-state Markov regime (transition matrix
// Pi) or a continuous scale drawn fresh each step. Concrete models expose a
// CdlmSystem view of themselves so generic code and tests can cross-check the
// bespoke fast paths against one description.
struct CdlmSystem {
  enum class AuxKind { none, discrete, continuous };

  std::size_t obs_dim = 1;
  AuxKind aux = AuxKind::none;

  // Observation loading per aux value; obs_dim entries meaningful.
  std::function<std::array<double, 2>(double lambda)> F =
      [](double) { return std::array<double, 2>{1.0, 0.0}; };
  // Observation noise variance per aux value (isotropic).
  std::function<double(double lambda)> V = [](double) { return 1.0; };
  // Evolution coefficient and noise variance.
  double G = 1.0;
  double W = 1.0;
  // Evolution nonlinearity applied to the previous state.
  std::function<double(double x)> h = [](double x) { return x; };
  // Regime transition matrix rows (discrete aux only): Pi[i][j] =
  // P(lambda_{t+1} = j | lambda_t = i).
  std::array<std::array<double, 2>, 2> Pi{{{1.0, 0.0}, {0.0, 1.0}}};

  void validate() const {
    if (obs_dim < 1 || obs_dim > 2)
      throw InvalidData("CdlmSystem: obs_dim must be 1 or 2");
    if (W < 0.0) throw InvalidData("CdlmSystem: W must be nonnegative");
    if (aux == AuxKind::discrete) {
      for (const auto& row : Pi) {
        const double s = row[0] + row[1];
        if (s < 1.0 - 1e-12 || s > 1.0 + 1e-12)
          throw InvalidData("CdlmSystem: Pi rows must sum to 1");
      }
    }
  }
};

}  // namespace plsmc
