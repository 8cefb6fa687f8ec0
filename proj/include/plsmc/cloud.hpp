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

#include <cstddef>
#include <utility>
#include <vector>

namespace plsmc {

// Kalman moments of the latent state carried per particle by
// Rao-Blackwellized filters.
struct StateSuffStats {
  double m = 0.0;  // filtered mean
  double C = 0.0;  // filtered variance
};

// Marker aux type for models whose particles carry no auxiliary component.
struct NoAux {};

// Apply resampling indices to one particle component.
template <class T>
void gather_into(std::vector<T>& v, const std::vector<std::size_t>& idx) {
  if (v.empty()) return;
  std::vector<T> out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = v[idx[k]];
  v = std::move(out);
}

// Structure-of-vectors particle cloud holding per-particle records
// z = (x, aux, state stats, param stats, theta). Components a given filter
// does not use stay empty; gather() resamples whichever are populated,
// keeping the joint record aligned across components. logw is uniform
// (all zero) at every step boundary since all filters here resample each
// step.
template <class Model>
struct ParticleCloud {
  std::vector<double> states;                       // state particles x
  std::vector<typename Model::AuxState> aux;        // auxiliary states
  std::vector<StateSuffStats> state_stats;          // per-particle Kalman moments
  std::vector<typename Model::ParamSuffStats> param_stats;  // conditional suffstats
  std::vector<typename Model::Theta> thetas;        // parameter draws
  std::vector<double> logw;                         // log importance weights

  [[nodiscard]] std::size_t size() const { return states.size(); }

  void reset_uniform_weights() { logw.assign(states.size(), 0.0); }

  void gather(const std::vector<std::size_t>& idx) {
    gather_into(states, idx);
    gather_into(aux, idx);
    gather_into(state_stats, idx);
    gather_into(param_stats, idx);
    gather_into(thetas, idx);
    reset_uniform_weights();
  }
};

}  // namespace plsmc
