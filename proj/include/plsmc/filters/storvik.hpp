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

// Storvik filter step: propagate states through a proposal q, resample the
// (x_{t+1}, x_t, s_t, theta) records with the importance weights
// p(y|x~) p(x~|x, theta) / q(x~|x, theta, y), update the sufficient
// statistics deterministically, then refresh theta from p(theta | s_{t+1}).
// With the prior-transition proposal the weights collapse to the likelihood
// p(y|x~, theta) (a bootstrap filter with learning); with the exact adapted
// proposal they collapse to the predictive p(y|x_t, theta).
template <class Model>
void step_storvik(const Model& model, FilterState<Model>& st,
                  const typename Model::Obs& y, const FilterConfig& cfg,
                  const RngStream& step) {
  const std::size_t N = st.cloud.size();
  const RngStream prop = step.substream(detail::kPhasePropagate);
  const RngStream theta_stream = step.substream(detail::kPhaseTheta);
  RngStream res = step.substream(detail::kPhaseResample);

  std::vector<double> x_prev = st.cloud.states;
  std::vector<double> logw(N);
  parallel_for(cfg.n_threads, N, [&](std::size_t i) {
    const auto& th = st.cloud.thetas[i];
    RngStream g = prop.substream(i);
    if (cfg.storvik_proposal == StorvikProposal::prior) {
      const double x = model.propagate_prior(g, x_prev[i], th);
      st.cloud.states[i] = x;
      logw[i] = model.log_obs(y, x, th);
    } else {
      st.cloud.states[i] = model.propagate_state(g, y, x_prev[i], th);
      logw[i] = model.predictive_logdensity(y, x_prev[i], th);
    }
  });

  const NormalizedWeights nw = normalize_weights(logw);
  st.logpred += nw.log_mean;
  st.logpred_inc.push_back(nw.log_mean);
  const auto idx = resample(nw.prob, N, cfg.resampler, res);
  st.cloud.gather(idx);
  gather_into(x_prev, idx);

  parallel_for(cfg.n_threads, N, [&](std::size_t i) {
    st.cloud.param_stats[i] = model.update_param_suffstats(
        st.cloud.param_stats[i], y, st.cloud.states[i], x_prev[i]);
    RngStream g = theta_stream.substream(i);
    st.cloud.thetas[i] = model.sample_theta(g, st.cloud.param_stats[i]);
  });
}

}  // namespace plsmc
