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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "plsmc/cloud.hpp"
#include "plsmc/errors.hpp"
#include "plsmc/filters/config.hpp"
#include "plsmc/parallel.hpp"
#include "plsmc/rng.hpp"
#include "plsmc/weights.hpp"

namespace plsmc {

namespace detail {

// Lower-triangular Cholesky factor of a small dense PSD matrix (row-major).
// Pivots that vanish (up to a relative tolerance) zero out their column, so
// a semidefinite kernel covariance simply produces no perturbation along the
// collapsed directions; in particular identical atoms give L = 0 and the
// kernel degenerates to a point mass. Only an indefinite input throws.
inline std::vector<double> cholesky_lower(const std::vector<double>& A,
                                          std::size_t d) {
  double scale = 0.0;
  for (std::size_t j = 0; j < d; ++j)
    scale = std::max(scale, std::abs(A[j * d + j]));
  const double tol = 1e-12 * scale;
  std::vector<double> L(d * d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double diag = A[j * d + j];
    for (std::size_t k = 0; k < j; ++k) diag -= L[j * d + k] * L[j * d + k];
    if (diag < -tol)
      throw SingularKernelCovariance(
          "kernel covariance is not positive semidefinite");
    if (diag <= tol) continue;
    L[j * d + j] = std::sqrt(diag);
    for (std::size_t i = j + 1; i < d; ++i) {
      double s = A[i * d + j];
      for (std::size_t k = 0; k < j; ++k) s -= L[i * d + k] * L[j * d + k];
      L[i * d + j] = s / L[j * d + j];
    }
  }
  return L;
}

}  // namespace detail

// Liu-West filter step. Parameters are kernel-smoothed on the unconstrained
// scale: shrinkage locations m_i = a v_i + (1-a) vbar with a = (3d-1)/(2d)
// for discount d, and kernel covariance h^2 V with h^2 = 1 - a^2, V the
// particle covariance of the unconstrained atoms. The step is an auxiliary
// filter over (x, theta): first-stage weights use the likelihood at the
// evolution-mean guess under the shrunk locations, perturbed parameters and
// blindly propagated states are then corrected by second-stage ratio weights
// and a final resample. The log-predictive increment is the product of stage
// means.
template <class Model>
void step_liu_west(const Model& model, FilterState<Model>& st,
                   const typename Model::Obs& y, const FilterConfig& cfg,
                   const RngStream& step) {
  constexpr std::size_t d = Model::theta_dim;
  const std::size_t N = st.cloud.size();
  const double a = (3.0 * cfg.lw_delta - 1.0) / (2.0 * cfg.lw_delta);
  const double h2 = 1.0 - a * a;
  const RngStream kern = step.substream(detail::kPhaseKernel);
  const RngStream prop = step.substream(detail::kPhasePropagate);
  RngStream res1 = step.substream(detail::kPhaseResample);
  RngStream res2 = step.substream(detail::kPhaseFinalResample);

  // Unconstrained atoms, their mean and covariance.
  std::vector<std::vector<double>> v(N);
  for (std::size_t i = 0; i < N; ++i)
    v[i] = model.theta_to_unconstrained(st.cloud.thetas[i]);
  if constexpr (d > 1) {
    // With fewer distinct atoms than dimensions the particle covariance
    // cannot span the parameter space and the smoothing kernel is singular.
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const auto distinct = static_cast<std::size_t>(std::distance(
        sorted.begin(), std::unique(sorted.begin(), sorted.end())));
    if (distinct < d)
      throw SingularKernelCovariance(
          "fewer distinct theta atoms than parameter dimensions");
  }
  std::vector<double> vbar(d, 0.0);
  for (const auto& vi : v)
    for (std::size_t k = 0; k < d; ++k) vbar[k] += vi[k];
  for (double& b : vbar) b /= static_cast<double>(N);
  std::vector<double> V(d * d, 0.0);
  for (const auto& vi : v)
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c)
        V[r * d + c] += (vi[r] - vbar[r]) * (vi[c] - vbar[c]);
  for (double& e : V) e /= static_cast<double>(N);

  // Shrinkage locations and first-stage weights.
  std::vector<std::vector<double>> loc(N, std::vector<double>(d));
  std::vector<double> guess_logw(N);
  parallel_for(cfg.n_threads, N, [&](std::size_t i) {
    for (std::size_t k = 0; k < d; ++k)
      loc[i][k] = a * v[i][k] + (1.0 - a) * vbar[k];
    const auto th = model.theta_from_unconstrained(loc[i]);
    guess_logw[i] =
        model.log_obs(y, model.evolution_mean(st.cloud.states[i], th), th);
  });
  const NormalizedWeights stage1 = normalize_weights(guess_logw);
  const auto idx = resample(stage1.prob, N, cfg.resampler, res1);
  st.cloud.gather(idx);
  gather_into(loc, idx);
  gather_into(guess_logw, idx);

  // Perturb parameters, propagate states, correct.
  const std::vector<double> L = detail::cholesky_lower(
      [&] {
        std::vector<double> hV(V);
        for (double& e : hV) e *= h2;
        return hV;
      }(),
      d);
  std::vector<double> logw(N);
  parallel_for(cfg.n_threads, N, [&](std::size_t i) {
    RngStream gk = kern.substream(i);
    std::vector<double> z(d);
    for (std::size_t k = 0; k < d; ++k) z[k] = draw_normal(gk, 0.0, 1.0);
    std::vector<double> vi(d);
    for (std::size_t r = 0; r < d; ++r) {
      double s = loc[i][r];
      for (std::size_t k = 0; k <= r; ++k) s += L[r * d + k] * z[k];
      vi[r] = s;
    }
    const auto th = model.theta_from_unconstrained(vi);
    st.cloud.thetas[i] = th;
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
