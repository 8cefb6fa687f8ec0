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
#include <numeric>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "plsmc/errors.hpp"

namespace plsmc {

inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

// log N(x; mean, var).
inline double log_normal_pdf(double x, double mean, double var) {
  const double r = x - mean;
  return -0.5 * (kLogTwoPi + std::log(var) + r * r / var);
}

inline double mean_of(const std::vector<double>& x) {
  if (x.empty()) throw InvalidData("mean_of: empty input");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Sample standard deviation (n - 1 denominator).
inline double sd_of(const std::vector<double>& x) {
  if (x.size() < 2) throw InvalidData("sd_of: need at least two values");
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

// Type-7 (linear interpolation) empirical quantile of unsorted data.
inline double quantile_of(std::vector<double> x, double p) {
  if (x.empty()) throw InvalidData("quantile_of: empty input");
  if (p < 0.0 || p > 1.0) throw InvalidData("quantile_of: p outside [0, 1]");
  std::sort(x.begin(), x.end());
  const double h = p * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= x.size()) return x.back();
  const double frac = h - static_cast<double>(lo);
  return x[lo] + frac * (x[lo + 1] - x[lo]);
}

// Type-7 quantiles at several levels, sorting once.
inline std::vector<double> quantiles_of(std::vector<double> x,
                                        const std::vector<double>& ps) {
  if (x.empty()) throw InvalidData("quantiles_of: empty input");
  std::sort(x.begin(), x.end());
  std::vector<double> out(ps.size());
  for (std::size_t k = 0; k < ps.size(); ++k) {
    const double p = ps[k];
    if (p < 0.0 || p > 1.0) throw InvalidData("quantiles_of: p outside [0, 1]");
    const double h = p * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= x.size()) {
      out[k] = x.back();
    } else {
      const double frac = h - static_cast<double>(lo);
      out[k] = x[lo] + frac * (x[lo + 1] - x[lo]);
    }
  }
  return out;
}

// Weighted quantile: inverse of the weighted empirical CDF, with weights
// assumed normalized. Used for posterior quantiles of weighted clouds.
inline double weighted_quantile(std::vector<double> x, std::vector<double> w,
                                double p) {
  if (x.empty() || x.size() != w.size())
    throw InvalidData("weighted_quantile: bad input sizes");
  if (p < 0.0 || p > 1.0) throw InvalidData("weighted_quantile: p outside [0, 1]");
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  double cum = 0.0;
  for (std::size_t i : idx) {
    cum += w[i];
    if (cum >= p) return x[i];
  }
  return x[idx.back()];
}

// Standard normal quantile function.
inline double normal_quantile(double p) {
  if (p <= 0.0 || p >= 1.0) throw InvalidData("normal_quantile: p outside (0, 1)");
  boost::math::normal_distribution<double> n01(0.0, 1.0);
  return boost::math::quantile(n01, p);
}

// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / M_SQRT2); }

// Quantile of a finite normal mixture sum_c w_c N(m_c, C_c) by bisection.
// Zero-variance components act as point masses.
inline double mixture_normal_quantile(const std::vector<double>& w,
                                      const std::vector<double>& m,
                                      const std::vector<double>& C, double p) {
  if (w.empty() || w.size() != m.size() || w.size() != C.size())
    throw InvalidData("mixture_normal_quantile: bad input sizes");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double sd = std::sqrt(std::max(C[i], 0.0));
    lo = std::min(lo, m[i] - 10.0 * sd - 1e-12);
    hi = std::max(hi, m[i] + 10.0 * sd + 1e-12);
  }
  auto cdf = [&](double x) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double sd = std::sqrt(std::max(C[i], 0.0));
      s += w[i] * (sd > 0.0 ? normal_cdf((x - m[i]) / sd)
                            : (x >= m[i] ? 1.0 : 0.0));
    }
    return s;
  };
  for (int it = 0; it < 100 && hi - lo > 1e-10 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Least-squares slope of log(y) on log(x); used for scaling benchmarks.
inline double fit_loglog_slope(const std::vector<double>& x,
                               const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidData("fit_loglog_slope: need matched inputs, length >= 2");
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0)
      throw InvalidData("fit_loglog_slope: inputs must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = mean_of(lx);
  const double my = mean_of(ly);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

// Sum with addends sorted ascending first, so aggregate metrics do not depend
// on the order replications were produced (e.g. under different threading).
inline double stable_sum(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  return std::accumulate(x.begin(), x.end(), 0.0);
}

inline double stable_mean(std::vector<double> x) {
  if (x.empty()) throw InvalidData("stable_mean: empty input");
  const auto n = static_cast<double>(x.size());
  return stable_sum(std::move(x)) / n;
}

}  // namespace plsmc
