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
#include <vector>

#include "plsmc/errors.hpp"
#include "plsmc/filters/config.hpp"
#include "plsmc/rng.hpp"
#include "plsmc/stats.hpp"

namespace plsmc {

// Initial-state law for simulation: a point mass when var == 0, otherwise
// N(mean, var).  Filtering priors are configured on the model and may
// deliberately differ from the law used to simulate.
struct X0Law {
  double mean = 0.0;
  double var = 0.0;
};

inline double draw_x0_law(RngStream& g, const X0Law& law) {
  return law.var > 0.0 ? draw_normal(g, law.mean, std::sqrt(law.var))
                       : law.mean;
}

template <class Model>
typename Model::Path simulate(const Model& model,
                              const typename Model::Theta& th, std::size_t T,
                              const X0Law& x0law, RngStream& g) {
  const double x0 = draw_x0_law(g, x0law);
  if constexpr (requires(RngStream& gg) { model.draw_lambda0(gg, th); }) {
    const int lam0 = model.draw_lambda0(g, th);
    return model.simulate_path(g, th, T, x0, lam0);
  } else {
    return model.simulate_path(g, th, T, x0);
  }
}

// Quantile estimates indexed [t][alpha].
using QuantSeries = std::vector<std::vector<double>>;

// Pull the per-step quantile grid out of a filter report target.
inline QuantSeries quantile_series(const TargetTrace& target) {
  QuantSeries q(target.rows.size());
  for (std::size_t t = 0; t < q.size(); ++t)
    q[t].assign(target.rows[t].q.begin(), target.rows[t].q.end());
  return q;
}

namespace detail {

inline void check_series_shape(const QuantSeries& s, std::size_t T,
                               std::size_t A, const char* what) {
  if (s.size() != T) throw LengthMismatch(what);
  for (const auto& row : s)
    if (row.size() != A) throw LengthMismatch(what);
}

}  // namespace detail

// Mean squared quantile error against per-dataset truth, pooled over
// datasets d and replications r:
//   mse[t][a] = (1 / (D R)) sum_{d,r} (q_true[d][t][a] - q_est[d][r][t][a])^2.
// Accumulation is order-independent (sorted summation), so shuffling
// datasets or replications cannot change the result.
inline std::vector<std::vector<double>> mse_table(
    const std::vector<std::vector<QuantSeries>>& est,
    const std::vector<QuantSeries>& truth) {
  if (truth.empty()) throw MissingOracle("mse_table needs oracle quantiles");
  if (est.size() != truth.size())
    throw LengthMismatch("dataset counts differ between estimates and truth");
  const std::size_t D = truth.size();
  const std::size_t T = truth.front().size();
  if (T == 0) throw MissingOracle("oracle quantile series is empty");
  const std::size_t A = truth.front().front().size();
  std::size_t R = 0;
  for (std::size_t d = 0; d < D; ++d) {
    detail::check_series_shape(truth[d], T, A, "oracle shape mismatch");
    if (est[d].empty()) throw LengthMismatch("dataset with no replications");
    if (d == 0) R = est[d].size();
    if (est[d].size() != R)
      throw LengthMismatch("unequal replication counts across datasets");
    for (const auto& run : est[d])
      detail::check_series_shape(run, T, A, "estimate shape mismatch");
  }

  std::vector<std::vector<double>> mse(T, std::vector<double>(A, 0.0));
  std::vector<double> sq;
  sq.reserve(D * R);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t a = 0; a < A; ++a) {
      sq.clear();
      for (std::size_t d = 0; d < D; ++d)
        for (std::size_t r = 0; r < R; ++r) {
          const double e = truth[d][t][a] - est[d][r][t][a];
          sq.push_back(e * e);
        }
      mse[t][a] = stable_sum(sq) / static_cast<double>(D * R);
    }
  }
  return mse;
}

// Elementwise log relative MSE: log(mse_f / mse_ref).
inline std::vector<std::vector<double>> lrmse_table(
    const std::vector<std::vector<double>>& mse_f,
    const std::vector<std::vector<double>>& mse_ref) {
  if (mse_f.size() != mse_ref.size())
    throw LengthMismatch("MSE tables cover different horizons");
  std::vector<std::vector<double>> out(mse_f.size());
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (mse_f[t].size() != mse_ref[t].size())
      throw LengthMismatch("MSE tables cover different quantile grids");
    out[t].resize(mse_f[t].size());
    for (std::size_t a = 0; a < out[t].size(); ++a)
      out[t][a] = std::log(mse_f[t][a] / mse_ref[t][a]);
  }
  return out;
}

// Mean absolute quantile error on a single dataset, pooled over
// replications: mae[t][a] = (1 / R) sum_r |q_true[t][a] - q_est[r][t][a]|.
inline std::vector<std::vector<double>> mae_table(
    const std::vector<QuantSeries>& est_runs, const QuantSeries& truth) {
  if (truth.empty()) throw MissingOracle("mae_table needs oracle quantiles");
  if (est_runs.empty()) throw LengthMismatch("no replications provided");
  const std::size_t T = truth.size();
  const std::size_t A = truth.front().size();
  detail::check_series_shape(truth, T, A, "oracle shape mismatch");
  for (const auto& run : est_runs)
    detail::check_series_shape(run, T, A, "estimate shape mismatch");
  const std::size_t R = est_runs.size();

  std::vector<std::vector<double>> mae(T, std::vector<double>(A, 0.0));
  std::vector<double> abs_err;
  abs_err.reserve(R);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t a = 0; a < A; ++a) {
      abs_err.clear();
      for (std::size_t r = 0; r < R; ++r)
        abs_err.push_back(std::abs(truth[t][a] - est_runs[r][t][a]));
      mae[t][a] = stable_sum(abs_err) / static_cast<double>(R);
    }
  }
  return mae;
}

}  // namespace plsmc
