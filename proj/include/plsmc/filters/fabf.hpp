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

#include <vector>

#include "plsmc/cloud.hpp"
#include "plsmc/filters/config.hpp"
#include "plsmc/parallel.hpp"
#include "plsmc/rng.hpp"
#include "plsmc/weights.hpp"

namespace plsmc {

// Fully adapted filter step: every particle is propagated from the exact
// conditional posterior p(x_{t+1} | x_t, y_{t+1}), then the cloud is
// resampled with the exact predictive weights p(y_{t+1} | x_t) evaluated at
// the pre-propagation particles. This is the particle-learning step with the
// propagate and resample stages swapped.
template <class Model>
void step_fabf(const Model& model, FilterState<Model>& st,
               const typename Model::Obs& y, const FilterConfig& cfg,
               const RngStream& step) {
  const std::size_t N = st.cloud.size();
  const RngStream prop = step.substream(detail::kPhasePropagate);
  RngStream res = step.substream(detail::kPhaseResample);

  std::vector<double> logw(N);
  parallel_for(cfg.n_threads, N, [&](std::size_t i) {
    const auto& th = detail::theta_of(model, st.cloud, i);
    const double x_prev = st.cloud.states[i];
    logw[i] = model.predictive_logdensity(y, x_prev, th);
    RngStream g = prop.substream(i);
    st.cloud.states[i] = model.propagate_state(g, y, x_prev, th);
  });

  const NormalizedWeights nw = normalize_weights(logw);
  st.logpred += nw.log_mean;
  st.logpred_inc.push_back(nw.log_mean);
  st.cloud.gather(resample(nw.prob, N, cfg.resampler, res));
}

}  // namespace plsmc
