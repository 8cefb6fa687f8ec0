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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <type_traits>
#include <vector>

#include "plsmc/cloud.hpp"
#include "plsmc/errors.hpp"
#include "plsmc/filters/apf.hpp"
#include "plsmc/filters/bootstrap.hpp"
#include "plsmc/filters/config.hpp"
#include "plsmc/filters/fabf.hpp"
#include "plsmc/filters/liu_west.hpp"
#include "plsmc/filters/pl.hpp"
#include "plsmc/filters/pl_suff.hpp"
#include "plsmc/filters/storvik.hpp"
#include "plsmc/rng.hpp"
#include "plsmc/stats.hpp"

namespace plsmc {

namespace detail {

template <class M>
concept HasUnconstrainedTheta =
    requires(const M& m, const typename M::Theta& th, std::vector<double> v) {
      { M::theta_dim } -> std::convertible_to<std::size_t>;
      { M::theta_to_unconstrained(th) };
      { m.theta_from_unconstrained(v) };
    };

template <class Model>
constexpr bool is_no_aux_v = std::is_same_v<typename Model::AuxState, NoAux>;
template <class Model>
constexpr bool is_discrete_aux_v = std::is_same_v<typename Model::AuxState, int>;

// Which algorithms have a step kernel for this model family.
template <class Model>
constexpr bool supports(Algorithm a) {
  switch (a) {
    case Algorithm::bf:
      return true;
    case Algorithm::apf:
      return is_no_aux_v<Model>;
    case Algorithm::fabf:
      return is_no_aux_v<Model> && Model::has_full_adaptation;
    case Algorithm::storvik:
      return is_no_aux_v<Model> && Model::has_param_learning;
    case Algorithm::lw:
      return is_no_aux_v<Model> && HasUnconstrainedTheta<Model>;
    case Algorithm::pl:
      return true;
    case Algorithm::pl_suff:
      return is_discrete_aux_v<Model> || Model::has_state_suffstats;
  }
  return false;
}

// Does the configured run learn parameters sequentially?
template <class Model>
bool learns(const FilterConfig& cfg) {
  if (!Model::has_param_learning) return false;
  switch (cfg.algorithm) {
    case Algorithm::storvik:
    case Algorithm::lw:
      return true;
    case Algorithm::pl:
    case Algorithm::pl_suff:
      return cfg.learn;
    default:
      return false;  // pure filters fix theta at the model's truth
  }
}

// Is the cloud Rao-Blackwellized (state marginalized into (m, C))?
template <class Model>
bool rao_blackwellized(const FilterConfig& cfg) {
  if (cfg.algorithm == Algorithm::pl_suff) return true;
  return is_discrete_aux_v<Model> && cfg.algorithm == Algorithm::pl;
}

template <class Model>
void init_state(const Model& model, FilterState<Model>& st,
                const FilterConfig& cfg, std::uint64_t seed,
                std::uint64_t replication) {
  const std::size_t N = cfg.n_particles;
  const RngStream init(seed, replication, 0);
  const RngStream gx = init.substream(kPhaseInit);
  const RngStream gt = init.substream(kPhaseTheta);
  const RngStream ga = init.substream(kPhaseAux);
  const bool learn = learns<Model>(cfg);
  const bool rb = rao_blackwellized<Model>(cfg);

  if (learn) {
    st.cloud.thetas.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
      RngStream g = gt.substream(i);
      st.cloud.thetas[i] = model.sample_theta_prior(g);
    }
    if (cfg.algorithm != Algorithm::lw)
      st.cloud.param_stats.assign(N, model.init_param_suffstats());
  }

  st.cloud.states.assign(N, model.prior.m0);
  if (rb) {
    st.cloud.state_stats.assign(N, StateSuffStats{model.prior.m0,
                                                  model.prior.C0});
  } else {
    for (std::size_t i = 0; i < N; ++i) {
      RngStream g = gx.substream(i);
      st.cloud.states[i] = model.draw_x0(g);
    }
  }

  if constexpr (std::is_same_v<typename Model::AuxState, double>) {
    st.cloud.aux.assign(N, 1.0);  // overwritten by the per-step prior draw
  } else if constexpr (is_discrete_aux_v<Model>) {
    st.cloud.aux.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
      RngStream g = ga.substream(i);
      st.cloud.aux[i] = model.draw_lambda0(g, theta_of(model, st.cloud, i));
    }
  }
  st.cloud.reset_uniform_weights();
}

template <class Model>
void dispatch_step(const Model& model, FilterState<Model>& st,
                   const typename Model::Obs& y, const FilterConfig& cfg,
                   const RngStream& step) {
  switch (cfg.algorithm) {
    case Algorithm::bf:
      step_bootstrap(model, st, y, cfg, step);
      return;
    case Algorithm::apf:
      if constexpr (is_no_aux_v<Model>) {
        step_apf(model, st, y, cfg, step);
        return;
      }
      break;
    case Algorithm::fabf:
      if constexpr (is_no_aux_v<Model> && Model::has_full_adaptation) {
        step_fabf(model, st, y, cfg, step);
        return;
      }
      break;
    case Algorithm::storvik:
      if constexpr (is_no_aux_v<Model> && Model::has_param_learning) {
        step_storvik(model, st, y, cfg, step);
        return;
      }
      break;
    case Algorithm::lw:
      if constexpr (is_no_aux_v<Model> && HasUnconstrainedTheta<Model>) {
        step_liu_west(model, st, y, cfg, step);
        return;
      }
      break;
    case Algorithm::pl:
      step_pl(model, st, y, cfg, step);
      return;
    case Algorithm::pl_suff:
      if constexpr (is_discrete_aux_v<Model>) {
        step_pl(model, st, y, cfg, step);  // already Rao-Blackwellized
        return;
      } else if constexpr (Model::has_state_suffstats) {
        step_pl_suff(model, st, y, cfg, step);
        return;
      }
      break;
  }
  throw UnsupportedConditioningSet(
      std::string("algorithm '") + algorithm_name(cfg.algorithm) +
      "' has no closed-form kernel for this model");
}

template <class Model>
void append_summaries(const Model& /*model*/, const FilterState<Model>& st,
                      bool learned, RunReport& rep) {
  if (rep.targets.empty()) {
    rep.targets.push_back({"state", {}});
    if (learned)
      for (const char* name : Model::param_names())
        rep.targets.push_back({name, {}});
  }

  SummaryRow state_row;
  if (!st.cloud.state_stats.empty()) {
    // Rao-Blackwellized cloud: p(x_t | y^t) ~ equal-weight normal mixture.
    const std::size_t N = st.cloud.state_stats.size();
    std::vector<double> m(N), C(N);
    double mean = 0.0, ex2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      m[i] = st.cloud.state_stats[i].m;
      C[i] = st.cloud.state_stats[i].C;
      mean += m[i];
      ex2 += C[i] + m[i] * m[i];
    }
    mean /= static_cast<double>(N);
    ex2 /= static_cast<double>(N);
    state_row.mean = mean;
    state_row.sd = std::sqrt(std::max(0.0, ex2 - mean * mean));
    const std::vector<double> w(N, 1.0 / static_cast<double>(N));
    for (std::size_t k = 0; k < kQuantileLevels.size(); ++k)
      state_row.q[k] = mixture_normal_quantile(w, m, C, kQuantileLevels[k]);
  } else {
    state_row = summarize_values(st.cloud.states);
  }
  rep.targets[0].rows.push_back(state_row);

  if (learned) {
    const std::size_t P = Model::param_names().size();
    std::vector<double> vals(st.cloud.thetas.size());
    for (std::size_t k = 0; k < P; ++k) {
      for (std::size_t i = 0; i < vals.size(); ++i)
        vals[i] = Model::param_value(st.cloud.thetas[i], k);
      rep.targets[1 + k].rows.push_back(summarize_values(vals));
    }
  }
}

}  // namespace detail

// Full sequential pass of the configured filter over the data. Per-step
// posterior summaries, predictive log-density increments, and wall-clock
// timings are recorded; with cfg.store_history the per-step state and theta
// clouds are kept for backward smoothing. Bit-identical given identical
// (model, data, config, seed, replication) regardless of thread count.
template <class Model>
FilterRun<Model> run_filter(const Model& model,
                            const std::vector<typename Model::Obs>& y,
                            const FilterConfig& cfg, std::uint64_t seed,
                            std::uint64_t replication = 0) {
  cfg.validate();
  if (y.empty()) throw InvalidData("run_filter: empty data");
  if (!detail::supports<Model>(cfg.algorithm))
    throw UnsupportedConditioningSet(
        std::string("algorithm '") + algorithm_name(cfg.algorithm) +
        "' has no closed-form kernel for this model");

  FilterRun<Model> out;
  FilterState<Model>& st = out.state;
  st.store_history = cfg.store_history;
  detail::init_state(model, st, cfg, seed, replication);
  const bool learned = detail::learns<Model>(cfg);

  using clock = std::chrono::steady_clock;
  const auto run_start = clock::now();
  for (std::size_t t = 0; t < y.size(); ++t) {
    const auto t0 = clock::now();
    const RngStream step(seed, replication, t + 1);
    detail::dispatch_step(model, st, y[t], cfg, step);
    st.t = t + 1;
    const auto t1 = clock::now();
    out.report.elapsed_ms_per_step.push_back(
        std::chrono::duration<double, std::milli>(t1 - t0).count());
    if (st.store_history) {
      st.history_x.push_back(st.cloud.states);
      st.history_theta.push_back(st.cloud.thetas);
    }
    detail::append_summaries(model, st, learned, out.report);
  }
  out.report.logpred = st.logpred;
  out.report.logpred_inc = st.logpred_inc;
  out.report.elapsed_ms = std::chrono::duration<double, std::milli>(
                              clock::now() - run_start)
                              .count();
  return out;
}

}  // namespace plsmc
