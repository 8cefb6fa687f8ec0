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
#include <vector>

#include "plsmc/cloud.hpp"
#include "plsmc/errors.hpp"
#include "plsmc/models/cdlm.hpp"
#include "plsmc/models/common.hpp"
#include "plsmc/rng.hpp"
#include "plsmc/stats.hpp"

namespace plsmc {

// Heavy-tailed nonlinear model (conditionally Gaussian given the scale
// mixing variable):
//   y_{t+1} = x_{t+1} + eps,        eps ~ N(0, lam_{t+1} sigma2),
//     lam_{t+1} ~ IG(nu/2, nu/2) iid   (Student-t errors, nu known)
//   x_{t+1} = beta h(x_t) + w,      w ~ N(0, tau2),  h(x) = x / (1 + x^2)
// Priors: tau2 ~ IG(n10/2, d10/2) with beta | tau2 ~ N(b0, tau2 B0);
// sigma2 ~ IG(n00/2, d00/2).
struct HeavyTailed {
  struct Theta {
    double beta = 0.9;
    double sigma2 = 0.25;
    double tau2 = 0.1;
    double nu = 4.0;  // fixed, never sampled

    void validate() const {
      if (!(sigma2 > 0.0) || !(tau2 > 0.0) || !(nu > 0.0))
        throw InvalidData("HeavyTailed::Theta: scales must be positive");
    }
  };

  struct Prior {
    double b0 = 1.0, B0 = 1.0;      // beta | tau2 ~ N(b0, tau2 B0)
    double n10 = 10.0, d10 = 2.0;   // tau2 ~ IG(n10/2, d10/2)
    double n00 = 10.0, d00 = 8.0;   // sigma2 ~ IG(n00/2, d00/2)
    double m0 = 0.0, C0 = 1.0;      // x0 ~ N(m0, C0)
  };

  struct ParamSuffStats {
    NigBlock reg;                // beta regression on h(x_prev), scale tau2
    double n1 = 0.0, d1 = 0.0;   // tau2 ~ IG(n1/2, d1/2)
    double n0 = 0.0, d0 = 0.0;   // sigma2 ~ IG(n0/2, d0/2)
  };

  using AuxState = double;  // positive scale mixing variable lam
  using Obs = double;

  static constexpr bool has_full_adaptation = true;  // given lam_{t+1}
  static constexpr bool has_param_learning = true;
  static constexpr bool has_state_suffstats = false;

  static std::vector<const char*> param_names() {
    return {"beta", "sigma2", "tau2"};
  }
  static double param_value(const Theta& th, std::size_t k) {
    switch (k) {
      case 0: return th.beta;
      case 1: return th.sigma2;
      default: return th.tau2;
    }
  }

  Theta truth;
  Prior prior;

  static double h(double x) { return x / (1.0 + x * x); }

  // -- densities ------------------------------------------------------------

  static double log_obs(double y, double x_next, double lam, const Theta& th) {
    return log_normal_pdf(y, x_next, lam * th.sigma2);
  }

  static double log_transition(double x_next, double x_prev, const Theta& th) {
    return log_normal_pdf(x_next, th.beta * h(x_prev), th.tau2);
  }

  // p(y_{t+1} | x_t, lam_{t+1}, theta) = N(y; beta h(x_t), lam sigma2 + tau2).
  static double predictive_logdensity(double y, double x_prev, double lam,
                                      const Theta& th) {
    return log_normal_pdf(y, th.beta * h(x_prev), lam * th.sigma2 + th.tau2);
  }

  static double evolution_mean(double x_prev, const Theta& th) {
    return th.beta * h(x_prev);
  }

  // -- kernels --------------------------------------------------------------

  // Scale mixing variables are iid, so the prior propagation ignores lam_t.
  static double propagate_aux(RngStream& g, const Theta& th) {
    return draw_inverse_gamma(g, 0.5 * th.nu, 0.5 * th.nu);
  }

  static double propagate_prior(RngStream& g, double x_prev, const Theta& th) {
    return draw_normal(g, th.beta * h(x_prev), std::sqrt(th.tau2));
  }

  // Exact conditional posterior given (x_t, lam_{t+1}, y_{t+1}):
  // V^{-1} = 1/(lam sigma2) + 1/tau2.
  static double propagate_state(RngStream& g, double y, double x_prev,
                                double lam, const Theta& th) {
    const StateSuffStats post = normal_posterior(th.beta * h(x_prev), th.tau2,
                                                 y, lam * th.sigma2);
    return draw_normal(g, post.m, std::sqrt(post.C));
  }

  // -- parameter learning ---------------------------------------------------

  ParamSuffStats init_param_suffstats() const {
    ParamSuffStats s;
    s.reg = NigBlock{1.0 / prior.B0, prior.b0};
    s.n1 = prior.n10;
    s.d1 = prior.d10;
    s.n0 = prior.n00;
    s.d0 = prior.d00;
    return s;
  }

  static ParamSuffStats update_param_suffstats(ParamSuffStats s, double y,
                                               double x_next, double x_prev,
                                               double lam) {
    s.n1 += 1.0;
    s.d1 += s.reg.update(h(x_prev), x_next);
    s.n0 += 1.0;
    s.d0 += (y - x_next) * (y - x_next) / lam;
    return s;
  }

  Theta sample_theta(RngStream& g, const ParamSuffStats& s) const {
    Theta th;
    th.nu = truth.nu;
    th.tau2 = draw_inverse_gamma(g, 0.5 * s.n1, 0.5 * s.d1);
    th.beta = draw_normal(g, s.reg.b, std::sqrt(th.tau2 / s.reg.B_inv));
    th.sigma2 = draw_inverse_gamma(g, 0.5 * s.n0, 0.5 * s.d0);
    return th;
  }

  Theta sample_theta_prior(RngStream& g) const {
    return sample_theta(g, init_param_suffstats());
  }

  double draw_x0(RngStream& g) const {
    return draw_normal(g, prior.m0, std::sqrt(prior.C0));
  }

  // -- simulation -----------------------------------------------------------

  struct Path {
    double x0 = 0.0;
    std::vector<double> x;
    std::vector<double> lambda;
    std::vector<Obs> y;
  };

  Path simulate_path(RngStream& g, const Theta& th, std::size_t T,
                     double x0) const {
    Path p;
    p.x0 = x0;
    p.x.resize(T);
    p.lambda.resize(T);
    p.y.resize(T);
    double x = x0;
    for (std::size_t t = 0; t < T; ++t) {
      const double lam = propagate_aux(g, th);
      x = draw_normal(g, th.beta * h(x), std::sqrt(th.tau2));
      p.lambda[t] = lam;
      p.x[t] = x;
      p.y[t] = draw_normal(g, x, std::sqrt(lam * th.sigma2));
    }
    return p;
  }

  CdlmSystem cdlm_system(const Theta& th) const {
    CdlmSystem sys;
    sys.obs_dim = 1;
    sys.aux = CdlmSystem::AuxKind::continuous;
    sys.V = [s2 = th.sigma2](double lam) { return lam * s2; };
    sys.G = th.beta;
    sys.W = th.tau2;
    sys.h = [](double x) { return h(x); };
    sys.validate();
    return sys;
  }
};

}  // namespace plsmc
