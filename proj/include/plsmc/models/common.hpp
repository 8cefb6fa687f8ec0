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
#include <array>
#include <cmath>

#include "plsmc/cloud.hpp"
#include "plsmc/rng.hpp"
#include "plsmc/stats.hpp"

namespace plsmc {

using Obs2 = std::array<double, 2>;

// Posterior of x given prior x ~ N(prior_mean, prior_var) and observation
// y ~ N(x, obs_var), combined in precision form. prior_var == 0 (point prior)
// returns the prior unchanged.
inline StateSuffStats normal_posterior(double prior_mean, double prior_var,
                                       double y, double obs_var) {
  if (prior_var == 0.0) return {prior_mean, 0.0};
  const double prec = 1.0 / prior_var + 1.0 / obs_var;
  const double C = 1.0 / prec;
  return {C * (prior_mean / prior_var + y / obs_var), C};
}

// log N2(y; mu, c * beta beta' + s2 * I2) with loading beta = (1, b)'.
// Uses the rank-one Sherman-Morrison closed form:
//   det = s2 * (s2 + c * |beta|^2)
//   Sigma^{-1} = (1/s2) [I - (c / (s2 + c |beta|^2)) beta beta']
inline double mvn2_rank1_logpdf(const Obs2& y, const Obs2& mu, double c,
                                double b, double s2) {
  const double r1 = y[0] - mu[0];
  const double r2 = y[1] - mu[1];
  const double beta_sq = 1.0 + b * b;
  const double denom = s2 + c * beta_sq;
  const double quad =
      (r1 * r1 + r2 * r2 - (c / denom) * (r1 + b * r2) * (r1 + b * r2)) / s2;
  const double logdet = std::log(s2) + std::log(denom);
  return -0.5 * (2.0 * kLogTwoPi + logdet + quad);
}

// Conjugate normal-inverse-gamma regression block for a scalar coefficient:
// prior beta ~ N(b, v * B) given scale v, maintained in precision form so the
// zero-information prior update path is exact.
struct NigBlock {
  double B_inv;  // prior/posterior precision scale (1/B)
  double b;      // prior/posterior coefficient mean

  // Rank-one update for one regression row: response = beta * regressor + err.
  // Returns the quadratic-form increment b'B^{-1}b(old) - b'B^{-1}b(new) +
  // response^2, the residual term the paired IG scale update needs.
  double update(double regressor, double response) {
    const double quad_old = b * b * B_inv;
    const double B_inv_new = B_inv + regressor * regressor;
    const double b_new = (B_inv * b + regressor * response) / B_inv_new;
    B_inv = B_inv_new;
    b = b_new;
    // Equals the standardized squared prediction residual, so nonnegative up
    // to rounding; clamp to keep IG scales valid.
    return std::max(0.0, response * response + quad_old - b * b * B_inv);
  }
};

}  // namespace plsmc
