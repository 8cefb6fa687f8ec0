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

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "plsmc/errors.hpp"
#include "plsmc/oracle/kalman.hpp"
#include "plsmc/stats.hpp"

namespace plsmc {

// One parameter axis of the grid posterior. A fixed axis pins the parameter
// at a known value (single cell, zero log-prior contribution); an IG axis is
// log-spaced and a Normal axis linearly spaced between the prior's
// lo_q/hi_q quantiles, covering at least 99.9% prior mass by default.
struct GridAxis {
  enum class Kind { fixed, inverse_gamma, normal };
  Kind kind = Kind::fixed;
  double fixed_value = 1.0;
  double shape = 1.0, scale = 1.0;  // IG(shape, scale)
  double mean = 0.0, var = 1.0;     // N(mean, var)
  std::size_t cells = 200;

  static GridAxis fixed(double v) {
    GridAxis a;
    a.kind = Kind::fixed;
    a.fixed_value = v;
    return a;
  }
  static GridAxis inverse_gamma(double shape, double scale,
                                std::size_t cells = 200) {
    GridAxis a;
    a.kind = Kind::inverse_gamma;
    a.shape = shape;
    a.scale = scale;
    a.cells = cells;
    return a;
  }
  static GridAxis normal(double mean, double var, std::size_t cells = 200) {
    GridAxis a;
    a.kind = Kind::normal;
    a.mean = mean;
    a.var = var;
    a.cells = cells;
    return a;
  }
};

// Joint grid over (sigma2, tau2, beta) for the scalar Gaussian state-space
// likelihood; fixed axes collapse to one cell.
struct GridSpec {
  GridAxis sigma2 = GridAxis::fixed(1.0);
  GridAxis tau2 = GridAxis::fixed(1.0);
  GridAxis beta = GridAxis::fixed(1.0);
  double m0 = 0.0, C0 = 10.0;  // state prior entering the likelihood
  double lo_q = 5e-4, hi_q = 1.0 - 5e-4;
};

namespace detail {

struct AxisCells {
  std::vector<double> value;      // cell centers
  std::vector<double> log_prior;  // log prior density + log cell width
};

inline double ig_log_pdf(double x, double shape, double scale) {
  return shape * std::log(scale) - boost::math::lgamma(shape) -
         (shape + 1.0) * std::log(x) - scale / x;
}

inline double ig_quantile(double p, double shape, double scale) {
  boost::math::gamma_distribution<double> gam(shape, 1.0);
  return scale / boost::math::quantile(gam, 1.0 - p);
}

inline AxisCells build_axis(const GridAxis& ax, double lo_q, double hi_q) {
  AxisCells out;
  if (ax.kind == GridAxis::Kind::fixed) {
    out.value = {ax.fixed_value};
    out.log_prior = {0.0};
    return out;
  }
  if (ax.cells < 2) throw InvalidData("GridAxis: need at least 2 cells");
  const std::size_t K = ax.cells;
  std::vector<double> edges(K + 1);
  if (ax.kind == GridAxis::Kind::inverse_gamma) {
    const double lo = ig_quantile(lo_q, ax.shape, ax.scale);
    const double hi = ig_quantile(hi_q, ax.shape, ax.scale);
    const double ratio = hi / lo;
    for (std::size_t i = 0; i <= K; ++i)
      edges[i] = lo * std::pow(ratio, static_cast<double>(i) /
                                          static_cast<double>(K));
    out.value.resize(K);
    out.log_prior.resize(K);
    for (std::size_t i = 0; i < K; ++i) {
      out.value[i] = std::sqrt(edges[i] * edges[i + 1]);  // geometric center
      out.log_prior[i] = ig_log_pdf(out.value[i], ax.shape, ax.scale) +
                         std::log(edges[i + 1] - edges[i]);
    }
  } else {
    const double sd = std::sqrt(ax.var);
    const double lo = ax.mean + sd * normal_quantile(lo_q);
    const double hi = ax.mean + sd * normal_quantile(hi_q);
    for (std::size_t i = 0; i <= K; ++i)
      edges[i] = lo + (hi - lo) * static_cast<double>(i) /
                          static_cast<double>(K);
    out.value.resize(K);
    out.log_prior.resize(K);
    for (std::size_t i = 0; i < K; ++i) {
      out.value[i] = 0.5 * (edges[i] + edges[i + 1]);
      out.log_prior[i] = log_normal_pdf(out.value[i], ax.mean, ax.var) +
                         std::log(edges[i + 1] - edges[i]);
    }
  }
  return out;
}

}  // namespace detail

// Normalized posterior mass over the parameter grid, with the
// pre-normalization log kernel retained (tests exercise shift invariance).
struct GridPosterior {
  std::vector<double> sigma2_val, tau2_val, beta_val;
  std::vector<double> mass;        // normalized, sigma2-major then tau2, beta
  std::vector<double> log_kernel;  // loglik + log prior + log area per cell

  [[nodiscard]] std::size_t index(std::size_t is, std::size_t it,
                                  std::size_t ib) const {
    return (is * tau2_val.size() + it) * beta_val.size() + ib;
  }

  enum class Axis { sigma2, tau2, beta };

  [[nodiscard]] const std::vector<double>& axis_values(Axis a) const {
    switch (a) {
      case Axis::sigma2: return sigma2_val;
      case Axis::tau2: return tau2_val;
      default: return beta_val;
    }
  }

  [[nodiscard]] std::vector<double> marginal(Axis a) const {
    const std::size_t ns = sigma2_val.size(), nt = tau2_val.size(),
                      nb = beta_val.size();
    std::vector<double> out(axis_values(a).size(), 0.0);
    for (std::size_t is = 0; is < ns; ++is)
      for (std::size_t it = 0; it < nt; ++it)
        for (std::size_t ib = 0; ib < nb; ++ib) {
          const double m = mass[index(is, it, ib)];
          if (a == Axis::sigma2) out[is] += m;
          else if (a == Axis::tau2) out[it] += m;
          else out[ib] += m;
        }
    return out;
  }

  [[nodiscard]] double marginal_mean(Axis a) const {
    const auto& v = axis_values(a);
    const auto w = marginal(a);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * w[i];
    return s;
  }

  [[nodiscard]] double marginal_sd(Axis a) const {
    const auto& v = axis_values(a);
    const auto w = marginal(a);
    const double mu = marginal_mean(a);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      s += (v[i] - mu) * (v[i] - mu) * w[i];
    return std::sqrt(s);
  }

  [[nodiscard]] double marginal_quantile(Axis a, double p) const {
    const auto& v = axis_values(a);
    const auto w = marginal(a);
    double cum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      cum += w[i];
      if (cum >= p) return v[i];
    }
    return v.back();
  }
};

// Posterior over the grid: cell mass proportional to
// exp(Kalman log-likelihood + log prior + log cell area), normalized in the
// log domain. Throws GridUnderflow when every cell's kernel is -inf.
inline GridPosterior grid_param_posterior(const std::vector<double>& y,
                                          const GridSpec& spec) {
  const auto ax_s = detail::build_axis(spec.sigma2, spec.lo_q, spec.hi_q);
  const auto ax_t = detail::build_axis(spec.tau2, spec.lo_q, spec.hi_q);
  const auto ax_b = detail::build_axis(spec.beta, spec.lo_q, spec.hi_q);
  GridPosterior post;
  post.sigma2_val = ax_s.value;
  post.tau2_val = ax_t.value;
  post.beta_val = ax_b.value;
  const std::size_t ns = ax_s.value.size(), nt = ax_t.value.size(),
                    nb = ax_b.value.size();
  post.log_kernel.resize(ns * nt * nb);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t is = 0; is < ns; ++is)
    for (std::size_t it = 0; it < nt; ++it)
      for (std::size_t ib = 0; ib < nb; ++ib) {
        const double ll = kalman_filter(y, ax_s.value[is], ax_t.value[it],
                                        spec.m0, spec.C0, ax_b.value[ib])
                              .loglik;
        const double lk = ll + ax_s.log_prior[is] + ax_t.log_prior[it] +
                          ax_b.log_prior[ib];
        post.log_kernel[post.index(is, it, ib)] = lk;
        mx = std::max(mx, lk);
      }
  if (!std::isfinite(mx))
    throw GridUnderflow("grid posterior: all cells underflow");
  post.mass.resize(post.log_kernel.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < post.mass.size(); ++i) {
    post.mass[i] = std::exp(post.log_kernel[i] - mx);
    sum += post.mass[i];
  }
  for (double& m : post.mass) m /= sum;
  return post;
}

// Exact sequential state quantiles with parameters marginalized over the
// grid: for each t, p(x_t | y^t) is the mixture of per-cell Kalman filtered
// normals weighted by the cell's sequential posterior mass. Returns
// quantiles[t][k] for alphas[k]. Cost is O(cells * T); meant for modest grids.
inline std::vector<std::vector<double>> grid_state_quantiles(
    const std::vector<double>& y, const GridSpec& spec,
    const std::vector<double>& alphas) {
  const auto ax_s = detail::build_axis(spec.sigma2, spec.lo_q, spec.hi_q);
  const auto ax_t = detail::build_axis(spec.tau2, spec.lo_q, spec.hi_q);
  const auto ax_b = detail::build_axis(spec.beta, spec.lo_q, spec.hi_q);
  struct Cell {
    KalmanTrace tr;
    double log_prior;
  };
  std::vector<Cell> cells;
  for (std::size_t is = 0; is < ax_s.value.size(); ++is)
    for (std::size_t it = 0; it < ax_t.value.size(); ++it)
      for (std::size_t ib = 0; ib < ax_b.value.size(); ++ib)
        cells.push_back({kalman_filter(y, ax_s.value[is], ax_t.value[it],
                                       spec.m0, spec.C0, ax_b.value[ib]),
                         ax_s.log_prior[is] + ax_t.log_prior[it] +
                             ax_b.log_prior[ib]});
  const std::size_t T = y.size();
  std::vector<double> cum(cells.size(), 0.0);
  std::vector<double> w(cells.size()), m(cells.size()), C(cells.size());
  std::vector<std::vector<double>> out(T,
                                       std::vector<double>(alphas.size()));
  for (std::size_t t = 0; t < T; ++t) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cells.size(); ++c) {
      cum[c] += cells[c].tr.loglik_inc[t];
      w[c] = cum[c] + cells[c].log_prior;
      mx = std::max(mx, w[c]);
    }
    if (!std::isfinite(mx))
      throw GridUnderflow("grid state quantiles: all cells underflow");
    double sum = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      w[c] = std::exp(w[c] - mx);
      sum += w[c];
      m[c] = cells[c].tr.m[t];
      C[c] = cells[c].tr.C[t];
    }
    for (double& v : w) v /= sum;
    for (std::size_t k = 0; k < alphas.size(); ++k)
      out[t][k] = mixture_normal_quantile(w, m, C, alphas[k]);
  }
  return out;
}

// Sequential parameter quantiles over the grid: per t, the marginal posterior
// quantile of the chosen axis given y^t. Same cost profile as above.
inline std::vector<std::vector<double>> grid_param_quantiles(
    const std::vector<double>& y, const GridSpec& spec,
    GridPosterior::Axis axis, const std::vector<double>& alphas) {
  const auto ax_s = detail::build_axis(spec.sigma2, spec.lo_q, spec.hi_q);
  const auto ax_t = detail::build_axis(spec.tau2, spec.lo_q, spec.hi_q);
  const auto ax_b = detail::build_axis(spec.beta, spec.lo_q, spec.hi_q);
  const std::size_t ns = ax_s.value.size(), nt = ax_t.value.size(),
                    nb = ax_b.value.size();
  struct Cell {
    KalmanTrace tr;
    double log_prior;
    double axis_value;
  };
  std::vector<Cell> cells;
  for (std::size_t is = 0; is < ns; ++is)
    for (std::size_t it = 0; it < nt; ++it)
      for (std::size_t ib = 0; ib < nb; ++ib) {
        double av = ax_s.value[is];
        if (axis == GridPosterior::Axis::tau2) av = ax_t.value[it];
        if (axis == GridPosterior::Axis::beta) av = ax_b.value[ib];
        cells.push_back({kalman_filter(y, ax_s.value[is], ax_t.value[it],
                                       spec.m0, spec.C0, ax_b.value[ib]),
                         ax_s.log_prior[is] + ax_t.log_prior[it] +
                             ax_b.log_prior[ib],
                         av});
      }
  const std::size_t T = y.size();
  std::vector<double> cum(cells.size(), 0.0);
  std::vector<double> vals(cells.size()), w(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) vals[c] = cells[c].axis_value;
  std::vector<std::vector<double>> out(T,
                                       std::vector<double>(alphas.size()));
  for (std::size_t t = 0; t < T; ++t) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cells.size(); ++c) {
      cum[c] += cells[c].tr.loglik_inc[t];
      w[c] = cum[c] + cells[c].log_prior;
      mx = std::max(mx, w[c]);
    }
    if (!std::isfinite(mx))
      throw GridUnderflow("grid parameter quantiles: all cells underflow");
    double sum = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      w[c] = std::exp(w[c] - mx);
      sum += w[c];
    }
    for (double& v : w) v /= sum;
    for (std::size_t k = 0; k < alphas.size(); ++k)
      out[t][k] = weighted_quantile(vals, w, alphas[k]);
  }
  return out;
}

}  // namespace plsmc
