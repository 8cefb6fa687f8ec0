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

// Auxiliary particle filter step: first-stage resampling with likelihood
// weights at the best guess g(x_t) (the evolution mean), blind propagation,
// then a final resample with the second-stage ratio weights
// p(y|x_{t+1}) / p(y|g(x_t)). The predictive log-density increment is the
// product-of-stage-means estimator.
template <class Model>
void step_apf(const Model& model, FilterState<Model>& st,
              const typename Model::Obs& y, const FilterConfig& cfg,
              const RngStream& step) {
  const std::size_t N = st.cloud.size();
  const RngStream prop = step.substream(detail::kPhasePropagate);
  RngStream res1 = step.substream(detail::kPhaseResample);
  RngStream res2 = step.substream(detail::kPhaseFinalResample);

  // Stage 1: likelihood at the point guess.
  std::vector<double> guess_logw(N);
  parallel_for(cfg.n_threads, N, [&](std::size_t i) {
    const auto& th = detail::theta_of(model, st.cloud, i);
    guess_logw[i] =
        model.log_obs(y, model.evolution_mean(st.cloud.states[i], th), th);
  });
  const NormalizedWeights stage1 = normalize_weights(guess_logw);
  const auto idx = resample(stage1.prob, N, cfg.resampler, res1);
  st.cloud.gather(idx);
  gather_into(guess_logw, idx);

  // Stage 2: propagate and correct.
  std::vector<double> logw(N);
  parallel_for(cfg.n_threads, N, [&](std::size_t i) {
    const auto& th = detail::theta_of(model, st.cloud, i);
    RngStream g = prop.substream(i);
    const double x = model.propagate_prior(g, st.cloud.states[i], th);
    st.cloud.states[i] = x;
    logw[i] = model.log_obs(y, x, th) - guess_logw[i];
  });
  const NormalizedWeights stage2 = normalize_weights(logw);
  const double inc = stage1.log_mean + stage2.log_mean;
  st.logpred += inc;
  st.logpred_inc.push_back(inc);
  st.cloud.gather(resample(stage2.prob, N, cfg.resampler, res2));
}

}  // namespace plsmc
