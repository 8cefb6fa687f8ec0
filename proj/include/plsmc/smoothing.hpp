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
#include <cstdint>
#include <utility>
#include <vector>

#include "plsmc/errors.hpp"
#include "plsmc/filters/config.hpp"
#include "plsmc/parallel.hpp"
#include "plsmc/rng.hpp"
#include "plsmc/weights.hpp"

namespace plsmc {

// Equal-weight draws from p(x_{1:T}, theta | y^T).  x[j][t-1] holds the
// path-j draw of x_t; theta[j] is held fixed along the whole path.
template <class Model>
struct SmoothedDraws {
  std::vector<std::vector<double>> x;
  std::vector<typename Model::Theta> theta;

  std::size_t n_paths() const { return x.size(); }
  std::size_t horizon() const { return x.empty() ? 0 : x.front().size(); }
};

namespace detail {

inline constexpr std::uint64_t kPhaseSmooth = 8;

// Single multinomial draw from normalized probabilities.
inline std::size_t draw_index(RngStream& g, const std::vector<double>& prob) {
  const double u = draw_uniform(g);
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < prob.size(); ++j) {
    acc += prob[j];
    if (u <= acc) return j;
  }
  return prob.size() - 1;
}

}  // namespace detail

// Backward-resampling smoother over a stored filter history.  Each path
// starts from a uniformly chosen final particle, fixes theta by a fresh
// posterior draw given that particle's sufficient statistics (or its theta
// atom, or the model truth when parameters were fixed), and then walks
// t = T-1, ..., 1 reweighting the stored filtered clouds by the state
// transition density.  Cost is O(T * n_particles) per path.
template <class Model>
SmoothedDraws<Model> backward_smooth(const Model& model,
                                     const FilterState<Model>& st,
                                     std::size_t m_paths, std::uint64_t seed,
                                     std::uint64_t replication = 0,
                                     std::size_t n_threads = 1) {
  const std::size_t T = st.t;
  if (!st.store_history || st.history_x.size() != T || T == 0)
    throw MissingHistory("backward_smooth requires a run with store_history");
  const std::size_t N = st.history_x.back().size();
  for (const auto& cloud_t : st.history_x)
    if (cloud_t.size() != N)
      throw MissingHistory("stored history has inconsistent cloud sizes");

  const bool has_stats = !st.cloud.param_stats.empty();
  const bool has_atoms = !st.cloud.thetas.empty();

  SmoothedDraws<Model> out;
  out.x.assign(m_paths, std::vector<double>(T, 0.0));
  out.theta.assign(m_paths, model.truth);

  const RngStream base =
      RngStream(seed, replication, 0).substream(detail::kPhaseSmooth);

  parallel_for(n_threads, m_paths, [&](std::size_t j) {
    RngStream g = base.substream(j);
    const std::size_t pick =
        static_cast<std::size_t>(draw_uniform(g) * static_cast<double>(N)) % N;

    typename Model::Theta th = model.truth;
    if (has_stats)
      th = model.sample_theta(g, st.cloud.param_stats[pick]);
    else if (has_atoms)
      th = st.cloud.thetas[pick];
    out.theta[j] = th;

    double x_next = st.history_x[T - 1][pick];
    out.x[j][T - 1] = x_next;

    std::vector<double> logw(N);
    for (std::size_t t = T - 1; t-- > 0;) {
      const auto& cloud_t = st.history_x[t];
      for (std::size_t i = 0; i < N; ++i)
        logw[i] = Model::log_transition(x_next, cloud_t[i], th);
      const auto nw = normalize_weights(logw);
      x_next = cloud_t[detail::draw_index(g, nw.prob)];
      out.x[j][t] = x_next;
    }
  });
  return out;
}

// Per-time summaries (mean, sd, quantile grid) across smoothed paths.
template <class Model>
std::vector<SummaryRow> smoothed_summary(const SmoothedDraws<Model>& draws) {
  const std::size_t T = draws.horizon();
  std::vector<SummaryRow> rows;
  rows.reserve(T);
  std::vector<double> vals(draws.n_paths());
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < draws.n_paths(); ++j) vals[j] = draws.x[j][t];
    rows.push_back(summarize_values(vals));
  }
  return rows;
}

}  // namespace plsmc
