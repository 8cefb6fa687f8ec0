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
#include <utility>
#include <vector>

#include "plsmc/cloud.hpp"
#include "plsmc/filters/config.hpp"
#include "plsmc/parallel.hpp"
#include "plsmc/rng.hpp"
#include "plsmc/weights.hpp"

namespace plsmc {

// Particle learning step, fully adapted: resample the particle records with
// exact predictive weights p(y_{t+1} | z_t), propagate from the exact
// conditional posterior, update the conditional sufficient statistics
// deterministically, and replenish theta from p(theta | s_{t+1}).
//
// The three model families dispatch on the auxiliary-state type:
//  - no auxiliary state: particles (x, s, theta); resample by
//    p(y|x_t, theta), propagate from p(x_{t+1}|x_t, y_{t+1}, theta);
//  - continuous auxiliary scale (iid): the scale is prior-propagated before
//    the resampling step, which then conditions on it;
//  - discrete regimes: Rao-Blackwellized particles (m, C, lam, s, theta);
//    the resample weight is the regime-mixture predictive, the regime is
//    drawn from its exact posterior, and (m, C) follow the Kalman map. The
//    state draws feeding the suffstats (and the smoothing history) come from
//    the joint conditional of (x_t, x_{t+1}).
template <class Model>
void step_pl(const Model& model, FilterState<Model>& st,
             const typename Model::Obs& y, const FilterConfig& cfg,
             const RngStream& step) {
  using Aux = typename Model::AuxState;
  const std::size_t N = st.cloud.size();
  const RngStream aux_stream = step.substream(detail::kPhaseAux);
  const RngStream prop = step.substream(detail::kPhasePropagate);
  const RngStream pair_stream = step.substream(detail::kPhaseSuffstat);
  const RngStream theta_stream = step.substream(detail::kPhaseTheta);
  RngStream res = step.substream(detail::kPhaseResample);
  const bool learn = cfg.learn && !st.cloud.thetas.empty();
  std::vector<double> logw(N);

  if constexpr (std::is_same_v<Aux, NoAux>) {
    parallel_for(cfg.n_threads, N, [&](std::size_t i) {
      logw[i] = model.predictive_logdensity(
          y, st.cloud.states[i], detail::theta_of(model, st.cloud, i));
    });
    const NormalizedWeights nw = normalize_weights(logw);
    st.logpred += nw.log_mean;
    st.logpred_inc.push_back(nw.log_mean);
    st.cloud.gather(resample(nw.prob, N, cfg.resampler, res));

    const std::vector<double> x_prev = st.cloud.states;
    parallel_for(cfg.n_threads, N, [&](std::size_t i) {
      const auto& th = detail::theta_of(model, st.cloud, i);
      RngStream g = prop.substream(i);
      st.cloud.states[i] = model.propagate_state(g, y, x_prev[i], th);
      if (learn) {
        st.cloud.param_stats[i] = model.update_param_suffstats(
            st.cloud.param_stats[i], y, st.cloud.states[i], x_prev[i]);
        RngStream gt = theta_stream.substream(i);
        st.cloud.thetas[i] =
            model.sample_theta(gt, st.cloud.param_stats[i]);
      }
    });
  } else if constexpr (std::is_same_v<Aux, double>) {
    // Step 0: prior-propagate the iid mixing scale, then adapt on it.
    parallel_for(cfg.n_threads, N, [&](std::size_t i) {
      const auto& th = detail::theta_of(model, st.cloud, i);
      RngStream ga = aux_stream.substream(i);
      st.cloud.aux[i] = model.propagate_aux(ga, th);
      logw[i] =
          model.predictive_logdensity(y, st.cloud.states[i], st.cloud.aux[i], th);
    });
    const NormalizedWeights nw = normalize_weights(logw);
    st.logpred += nw.log_mean;
    st.logpred_inc.push_back(nw.log_mean);
    st.cloud.gather(resample(nw.prob, N, cfg.resampler, res));

    const std::vector<double> x_prev = st.cloud.states;
    parallel_for(cfg.n_threads, N, [&](std::size_t i) {
      const auto& th = detail::theta_of(model, st.cloud, i);
      RngStream g = prop.substream(i);
      st.cloud.states[i] =
          model.propagate_state(g, y, x_prev[i], st.cloud.aux[i], th);
      if (learn) {
        st.cloud.param_stats[i] = model.update_param_suffstats(
            st.cloud.param_stats[i], y, st.cloud.states[i], x_prev[i],
            st.cloud.aux[i]);
        RngStream gt = theta_stream.substream(i);
        st.cloud.thetas[i] =
            model.sample_theta(gt, st.cloud.param_stats[i]);
      }
    });
  } else {
    parallel_for(cfg.n_threads, N, [&](std::size_t i) {
      logw[i] = model.predictive_logdensity(y, st.cloud.state_stats[i],
                                            st.cloud.aux[i],
                                            detail::theta_of(model, st.cloud, i));
    });
    const NormalizedWeights nw = normalize_weights(logw);
    st.logpred += nw.log_mean;
    st.logpred_inc.push_back(nw.log_mean);
    st.cloud.gather(resample(nw.prob, N, cfg.resampler, res));

    const bool want_draws = learn || st.store_history;
    parallel_for(cfg.n_threads, N, [&](std::size_t i) {
      const auto& th = detail::theta_of(model, st.cloud, i);
      RngStream ga = aux_stream.substream(i);
      const int lam_prev = st.cloud.aux[i];
      const int lam =
          model.propagate_aux(ga, y, st.cloud.state_stats[i], lam_prev, th);
      const StateSuffStats before = st.cloud.state_stats[i];
      const StateSuffStats after =
          model.update_state_suffstats(before, y, lam, th);
      if (want_draws) {
        RngStream gp = pair_stream.substream(i);
        const auto [x_prev, x_next] =
            model.draw_state_pair(gp, before, after, th);
        st.cloud.states[i] = x_next;
        if (learn) {
          st.cloud.param_stats[i] = model.update_param_suffstats(
              st.cloud.param_stats[i], y, x_next, x_prev, lam_prev, lam);
          RngStream gt = theta_stream.substream(i);
          st.cloud.thetas[i] =
              model.sample_theta(gt, st.cloud.param_stats[i]);
        }
      }
      st.cloud.aux[i] = lam;
      st.cloud.state_stats[i] = after;
    });
  }
}

}  // namespace plsmc
