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

#include <utility>
#include <vector>

#include "plsmc/cloud.hpp"
#include "plsmc/filters/config.hpp"
#include "plsmc/parallel.hpp"
#include "plsmc/rng.hpp"
#include "plsmc/weights.hpp"

namespace plsmc {

// Rao-Blackwellized particle learning step for models with scalar Kalman
// state sufficient statistics: particles track (m, C, s, theta) and the
// latent state is marginalized. Resampling uses the predictive
// p(y_{t+1} | m_t, C_t, theta); (m, C) then follow the exact Kalman map
// under the resampled theta. The parameter suffstats are fed by a joint draw
// of (x_t, x_{t+1}) from its exact conditional, which also supplies the
// per-step state draws recorded for smoothing.
template <class Model>
void step_pl_suff(const Model& model, FilterState<Model>& st,
                  const typename Model::Obs& y, const FilterConfig& cfg,
                  const RngStream& step) {
  const std::size_t N = st.cloud.size();
  const RngStream pair_stream = step.substream(detail::kPhaseSuffstat);
  const RngStream theta_stream = step.substream(detail::kPhaseTheta);
  RngStream res = step.substream(detail::kPhaseResample);
  const bool learn = cfg.learn && !st.cloud.thetas.empty();
  const bool want_draws = learn || st.store_history;

  std::vector<double> logw(N);
  parallel_for(cfg.n_threads, N, [&](std::size_t i) {
    logw[i] = model.predictive_logdensity(y, st.cloud.state_stats[i],
                                          detail::theta_of(model, st.cloud, i));
  });
  const NormalizedWeights nw = normalize_weights(logw);
  st.logpred += nw.log_mean;
  st.logpred_inc.push_back(nw.log_mean);
  st.cloud.gather(resample(nw.prob, N, cfg.resampler, res));

  parallel_for(cfg.n_threads, N, [&](std::size_t i) {
    const auto& th = detail::theta_of(model, st.cloud, i);
    const StateSuffStats before = st.cloud.state_stats[i];
    const StateSuffStats after = model.update_state_suffstats(before, y, th);
    if (want_draws) {
      RngStream gp = pair_stream.substream(i);
      const auto [x_prev, x_next] =
          model.draw_state_pair(gp, before, after, th);
      st.cloud.states[i] = x_next;
      if (learn) {
        st.cloud.param_stats[i] = model.update_param_suffstats(
            st.cloud.param_stats[i], y, x_next, x_prev);
        RngStream gt = theta_stream.substream(i);
        st.cloud.thetas[i] = model.sample_theta(gt, st.cloud.param_stats[i]);
      }
    }
    st.cloud.state_stats[i] = after;
  });
}

}  // namespace plsmc
