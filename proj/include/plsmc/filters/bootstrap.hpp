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

#include <type_traits>
#include <vector>

#include "plsmc/cloud.hpp"
#include "plsmc/filters/config.hpp"
#include "plsmc/parallel.hpp"
#include "plsmc/rng.hpp"
#include "plsmc/weights.hpp"

namespace plsmc {

// Bootstrap filter step: blind propagation through the evolution equation,
// then resampling with likelihood weights. Auxiliary states (when the model
// has them) are propagated from their prior alongside the state.
template <class Model>
void step_bootstrap(const Model& model, FilterState<Model>& st,
                    const typename Model::Obs& y, const FilterConfig& cfg,
                    const RngStream& step) {
  using Aux = typename Model::AuxState;
  const std::size_t N = st.cloud.size();
  const RngStream aux_stream = step.substream(detail::kPhaseAux);
  const RngStream prop = step.substream(detail::kPhasePropagate);
  RngStream res = step.substream(detail::kPhaseResample);
  std::vector<double> logw(N);

  parallel_for(cfg.n_threads, N, [&](std::size_t i) {
    const auto& th = detail::theta_of(model, st.cloud, i);
    RngStream g = prop.substream(i);
    if constexpr (std::is_same_v<Aux, NoAux>) {
      const double x = model.propagate_prior(g, st.cloud.states[i], th);
      st.cloud.states[i] = x;
      logw[i] = model.log_obs(y, x, th);
    } else if constexpr (std::is_same_v<Aux, double>) {
      RngStream ga = aux_stream.substream(i);
      const double lam = model.propagate_aux(ga, th);
      const double x = model.propagate_prior(g, st.cloud.states[i], th);
      st.cloud.aux[i] = lam;
      st.cloud.states[i] = x;
      logw[i] = model.log_obs(y, x, lam, th);
    } else {
      RngStream ga = aux_stream.substream(i);
      const int lam = model.propagate_aux_prior(ga, st.cloud.aux[i], th);
      const double x = model.propagate_prior(g, st.cloud.states[i], th);
      st.cloud.aux[i] = lam;
      st.cloud.states[i] = x;
      logw[i] = model.log_obs(y, x, lam, th);
    }
  });

  const NormalizedWeights nw = normalize_weights(logw);
  st.logpred += nw.log_mean;
  st.logpred_inc.push_back(nw.log_mean);
  st.cloud.gather(resample(nw.prob, N, cfg.resampler, res));
}

}  // namespace plsmc
