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
#include <limits>
#include <vector>

#include "plsmc/errors.hpp"
#include "plsmc/rng.hpp"

namespace plsmc {

enum class Resampler { multinomial, systematic };

struct NormalizedWeights {
  std::vector<double> prob;  // normalized weights, sum to 1
  double log_mean;           // log of the mean unnormalized weight
};

// Normalize log weights with the max-shift log-sum-exp trick. The log mean of
// the unnormalized weights is the per-step marginal likelihood increment.
// Throws AllWeightsDegenerate if any weight is NaN or all are -inf.
inline NormalizedWeights normalize_weights(const std::vector<double>& logw) {
  if (logw.empty()) throw InvalidData("normalize_weights: empty input");
  double mx = -std::numeric_limits<double>::infinity();
  for (double lw : logw) {
    if (std::isnan(lw)) throw AllWeightsDegenerate("NaN log weight");
    mx = std::max(mx, lw);
  }
  if (!std::isfinite(mx))
    throw AllWeightsDegenerate("all log weights are -inf");
  NormalizedWeights out;
  out.prob.resize(logw.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    out.prob[i] = std::exp(logw[i] - mx);
    sum += out.prob[i];
  }
  for (double& p : out.prob) p /= sum;
  out.log_mean = mx + std::log(sum / static_cast<double>(logw.size()));
  return out;
}

// Effective sample size 1 / sum w_i^2 of normalized weights.
inline double ess(const std::vector<double>& prob) {
  double s2 = 0.0;
  for (double p : prob) s2 += p * p;
  return 1.0 / s2;
}

// Multinomial resampling: n iid index draws by inverting the weight CDF.
// Draw order is fixed (one uniform per output slot, in slot order) so results
// are reproducible for a given stream.
inline std::vector<std::size_t> resample_multinomial(
    const std::vector<double>& prob, std::size_t n, RngStream& g) {
  std::vector<double> cdf(prob.size());
  double c = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    c += prob[i];
    cdf[i] = c;
  }
  cdf.back() = 1.0;
  std::vector<std::size_t> idx(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = draw_uniform(g);
    idx[k] = static_cast<std::size_t>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  }
  return idx;
}

// Systematic resampling: a single uniform u, thresholds (k + u) / n. Copy
// counts deviate from n * w_i by less than one.
inline std::vector<std::size_t> resample_systematic(
    const std::vector<double>& prob, std::size_t n, RngStream& g) {
  const double u = draw_uniform(g);
  std::vector<std::size_t> idx(n);
  double c = prob[0];
  std::size_t i = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double pos = (static_cast<double>(k) + u) / static_cast<double>(n);
    while (pos > c && i + 1 < prob.size()) c += prob[++i];
    idx[k] = i;
  }
  return idx;
}

inline std::vector<std::size_t> resample(const std::vector<double>& prob,
                                         std::size_t n, Resampler r,
                                         RngStream& g) {
  return r == Resampler::systematic ? resample_systematic(prob, n, g)
                                    : resample_multinomial(prob, n, g);
}

}  // namespace plsmc
