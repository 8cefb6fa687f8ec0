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

#include <cmath>
#include <cstddef>
#include <type_traits>
#include <utility>
#include <vector>

#include "plsmc/cloud.hpp"
#include "plsmc/errors.hpp"
#include "plsmc/filters/config.hpp"
#include "plsmc/weights.hpp"

namespace plsmc {

// Sequential marginal likelihood estimate: per-step log predictive
// increments log p-hat(y_{t+1} | y^t) and their running sum.
struct PredictiveTrace {
  std::vector<double> increments;
  std::vector<double> cumulative;
};

inline PredictiveTrace predictive_trace(std::vector<double> increments) {
  PredictiveTrace tr;
  tr.cumulative.reserve(increments.size());
  double acc = 0.0;
  for (double inc : increments) {
    acc += inc;
    tr.cumulative.push_back(acc);
  }
  tr.increments = std::move(increments);
  return tr;
}

// Direct evaluation of the predictive average at an equal-weight cloud:
// log (1/N) sum_i p(y | z_i).  Matches the resampling-stage mean the
// fully adapted filters accumulate, so it is usable both for monitoring
// a live run and as a cross-check in tests.
template <class Model>
double log_predictive_increment(const Model& model,
                                const ParticleCloud<Model>& cloud,
                                const typename Model::Obs& y) {
  const std::size_t N = cloud.size();
  if (N == 0) throw InvalidData("empty cloud");
  std::vector<double> logw(N);
  using Aux = typename Model::AuxState;
  if constexpr (std::is_same_v<Aux, NoAux>) {
    // Rao-Blackwellized clouds carry (m, C) instead of live point states;
    // use the marginalized predictive when the model offers one.
    constexpr bool has_rb =
        requires(const typename Model::Obs& yy, const StateSuffStats& sx,
                 const typename Model::Theta& th) {
          { Model::predictive_logdensity(yy, sx, th) };
        };
    if constexpr (has_rb) {
      if (cloud.state_stats.size() == N) {
        for (std::size_t i = 0; i < N; ++i)
          logw[i] = Model::predictive_logdensity(
              y, cloud.state_stats[i], detail::theta_of(model, cloud, i));
        return normalize_weights(logw).log_mean;
      }
    }
    for (std::size_t i = 0; i < N; ++i)
      logw[i] = Model::predictive_logdensity(y, cloud.states[i],
                                             detail::theta_of(model, cloud, i));
  } else if constexpr (std::is_same_v<Aux, int>) {
    if (cloud.state_stats.size() != N)
      throw UnsupportedConditioningSet(
          "mixture predictive needs a Rao-Blackwellized cloud");
    for (std::size_t i = 0; i < N; ++i)
      logw[i] = Model::predictive_logdensity(y, cloud.state_stats[i],
                                             cloud.aux[i],
                                             detail::theta_of(model, cloud, i));
  } else {
    throw UnsupportedConditioningSet(
        "predictive density has no closed form under a continuous auxiliary "
        "state");
  }
  return normalize_weights(logw).log_mean;
}

// Pointwise Bayes factor B_t of the numerator model against the
// denominator model, computed from cumulative log marginal likelihoods.
inline std::vector<double> bayes_factor(const PredictiveTrace& numer,
                                        const PredictiveTrace& denom) {
  if (numer.cumulative.size() != denom.cumulative.size())
    throw LengthMismatch("predictive traces cover different horizons");
  std::vector<double> bf(numer.cumulative.size());
  for (std::size_t t = 0; t < bf.size(); ++t)
    bf[t] = std::exp(numer.cumulative[t] - denom.cumulative[t]);
  return bf;
}

}  // namespace plsmc
