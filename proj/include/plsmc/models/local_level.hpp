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
#include <utility>
#include <vector>

#include "plsmc/cloud.hpp"
#include "plsmc/errors.hpp"
#include "plsmc/models/cdlm.hpp"
#include "plsmc/models/common.hpp"
#include "plsmc/rng.hpp"
#include "plsmc/stats.hpp"

namespace plsmc {

// Local level model:
//   y_{t+1} = x_{t+1} + eps,   eps ~ N(0, sigma2)
//   x_{t+1} = x_t + w,         w   ~ N(0, tau2)
// with conjugate priors sigma2 ~ IG(a0, b0), tau2 ~ IG(c0, d0) and
// x0 ~ N(m0, C0). Fully adapted: both p(y_{t+1}|x_t) and
// p(x_{t+1}|x_t, y_{t+1}) are available in closed form.
struct LocalLevel {
  struct Theta {
    double sigma2 = 1.0;  // observation variance
    double tau2 = 1.0;    // state evolution variance

    void validate() const {
      if (!(sigma2 > 0.0) || !(tau2 > 0.0))
        throw InvalidData("LocalLevel::Theta: variances must be positive");
    }
  };

  struct Prior {
    double a0 = 5.0, b0 = 4.0;    // sigma2 ~ IG(a0, b0)
    double c0 = 5.0, d0 = 0.4;    // tau2 ~ IG(c0, d0)
    double m0 = 0.0, C0 = 10.0;   // x0 ~ N(m0, C0)
    // When false, sigma2 is treated as known: posterior draws hold it at the
    // model truth and only tau2 is learned.
    bool learn_sigma2 = true;
  };

  // 5-dimensional cross-product accumulator plus count; the conjugate IG
  // hyperparameters are a deterministic function of these and the prior.
  struct ParamSuffStats {
    double sum_y2 = 0.0;      // sum of y^2
    double sum_yx = 0.0;      // sum of y * x_next
    double sum_x2 = 0.0;      // sum of x_next^2
    double sum_xprev2 = 0.0;  // sum of x_prev^2
    double sum_xxprev = 0.0;  // sum of x_next * x_prev
    double n = 0.0;           // number of absorbed observations
  };

  using AuxState = NoAux;
  using Obs = double;

  static constexpr bool has_full_adaptation = true;
  static constexpr bool has_param_learning = true;
  static constexpr bool has_state_suffstats = true;

  static std::vector<const char*> param_names() { return {"sigma2", "tau2"}; }
  static double param_value(const Theta& th, std::size_t k) {
    return k == 0 ? th.sigma2 : th.tau2;
  }

  ParamSuffStats init_param_suffstats() const { return {}; }

  Theta truth;  // parameters used for simulation and fixed-theta filtering
  Prior prior;

  // -- densities ------------------------------------------------------------

  static double log_obs(double y, double x_next, const Theta& th) {
    return log_normal_pdf(y, x_next, th.sigma2);
  }

  static double log_transition(double x_next, double x_prev, const Theta& th) {
    return log_normal_pdf(x_next, x_prev, th.tau2);
  }

  // p(y_{t+1} | x_t, theta) = N(y; x_t, sigma2 + tau2).
  static double predictive_logdensity(double y, double x_prev,
                                      const Theta& th) {
    return log_normal_pdf(y, x_prev, th.sigma2 + th.tau2);
  }

  // Rao-Blackwellized form p(y_{t+1} | m_t, C_t, theta) = N(y; m, C+s2+t2).
  static double predictive_logdensity(double y, const StateSuffStats& sx,
                                      const Theta& th) {
    return log_normal_pdf(y, sx.m, sx.C + th.sigma2 + th.tau2);
  }

  static double evolution_mean(double x_prev, const Theta&) { return x_prev; }

  // -- propagation kernels --------------------------------------------------

  static double propagate_prior(RngStream& g, double x_prev, const Theta& th) {
    return draw_normal(g, x_prev, std::sqrt(th.tau2));
  }

  // Exact conditional posterior p(x_{t+1} | x_t, y_{t+1}, theta):
  // precision 1/sigma2 + 1/tau2, mean omega^2 (y/sigma2 + x_t/tau2).
  static double propagate_state(RngStream& g, double y, double x_prev,
                                const Theta& th) {
    const StateSuffStats post = normal_posterior(x_prev, th.tau2, y, th.sigma2);
    return draw_normal(g, post.m, std::sqrt(post.C));
  }

  // -- Rao-Blackwellized state sufficient statistics ------------------------

  // Kalman map: A = (C + tau2) / (C + tau2 + sigma2), m' = (1-A)m + Ay,
  // C' = A sigma2.
  static StateSuffStats update_state_suffstats(const StateSuffStats& sx,
                                               double y, const Theta& th) {
    const double R = sx.C + th.tau2;
    const double Q = R + th.sigma2;
    if (!(Q > 0.0) || !std::isfinite(Q))
      throw SingularInnovation("local level: innovation variance not positive");
    const double A = R / Q;
    return {(1.0 - A) * sx.m + A * y, A * th.sigma2};
  }

  // Joint draw of (x_t, x_{t+1}) given the pre-update moments (m_t, C_t) and
  // the updated moments (m_{t+1}, C_{t+1}): x_{t+1} from the filtered
  // posterior, then x_t from its exact conditional given x_{t+1} (precision
  // 1/C_t + 1/tau2). Feeds the parameter suffstat map in suffstat mode.
  static std::pair<double, double> draw_state_pair(RngStream& g,
                                                   const StateSuffStats& before,
                                                   const StateSuffStats& after,
                                                   const Theta& th) {
    const double x_next = draw_normal(g, after.m, std::sqrt(after.C));
    const StateSuffStats back =
        normal_posterior(before.m, before.C, x_next, th.tau2);
    const double x_prev = draw_normal(g, back.m, std::sqrt(back.C));
    return {x_prev, x_next};
  }

  // -- parameter learning ---------------------------------------------------

  static ParamSuffStats update_param_suffstats(ParamSuffStats s, double y,
                                               double x_next, double x_prev) {
    s.sum_y2 += y * y;
    s.sum_yx += y * x_next;
    s.sum_x2 += x_next * x_next;
    s.sum_xprev2 += x_prev * x_prev;
    s.sum_xxprev += x_next * x_prev;
    s.n += 1.0;
    return s;
  }

  struct IgHyper {
    double a, b;  // sigma2 ~ IG(a, b)
    double c, d;  // tau2 ~ IG(c, d)
  };

  // a_t = a0 + t/2, b_t = b0 + (1/2) sum (y - x)^2, and likewise for the
  // evolution pair, all recovered from the accumulator.
  IgHyper hyperparameters(const ParamSuffStats& s) const {
    IgHyper h;
    h.a = prior.a0 + 0.5 * s.n;
    h.b = prior.b0 +
          0.5 * std::max(0.0, s.sum_y2 - 2.0 * s.sum_yx + s.sum_x2);
    h.c = prior.c0 + 0.5 * s.n;
    h.d = prior.d0 +
          0.5 * std::max(0.0, s.sum_x2 + s.sum_xprev2 - 2.0 * s.sum_xxprev);
    return h;
  }

  Theta sample_theta(RngStream& g, const ParamSuffStats& s) const {
    const IgHyper h = hyperparameters(s);
    Theta th;
    th.sigma2 =
        prior.learn_sigma2 ? draw_inverse_gamma(g, h.a, h.b) : truth.sigma2;
    th.tau2 = draw_inverse_gamma(g, h.c, h.d);
    return th;
  }

  Theta sample_theta_prior(RngStream& g) const {
    return sample_theta(g, ParamSuffStats{});
  }

  double draw_x0(RngStream& g) const {
    return draw_normal(g, prior.m0, std::sqrt(prior.C0));
  }

  // -- unconstrained parameter view for kernel-smoothing filters ------------

  static constexpr std::size_t theta_dim = 2;

  static std::vector<double> theta_to_unconstrained(const Theta& th) {
    return {std::log(th.sigma2), std::log(th.tau2)};
  }

  Theta theta_from_unconstrained(const std::vector<double>& v) const {
    return {std::exp(v[0]), std::exp(v[1])};
  }

  // -- simulation -----------------------------------------------------------

  struct Path {
    double x0 = 0.0;
    std::vector<double> x;  // x_1 .. x_T
    std::vector<Obs> y;     // y_1 .. y_T
  };

  Path simulate_path(RngStream& g, const Theta& th, std::size_t T,
                     double x0) const {
    Path p;
    p.x0 = x0;
    p.x.resize(T);
    p.y.resize(T);
    double x = x0;
    for (std::size_t t = 0; t < T; ++t) {
      x = draw_normal(g, x, std::sqrt(th.tau2));
      p.x[t] = x;
      p.y[t] = draw_normal(g, x, std::sqrt(th.sigma2));
    }
    return p;
  }

  // Generic dynamic-model view of this model for cross-checks.
  CdlmSystem cdlm_system(const Theta& th) const {
    CdlmSystem sys;
    sys.obs_dim = 1;
    sys.aux = CdlmSystem::AuxKind::none;
    sys.V = [s2 = th.sigma2](double) { return s2; };
    sys.G = 1.0;
    sys.W = th.tau2;
    sys.validate();
    return sys;
  }
};

}  // namespace plsmc
