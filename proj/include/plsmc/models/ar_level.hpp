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

// AR(1)-plus-noise model:
//   y_{t+1} = x_{t+1} + eps,      eps ~ N(0, sigma2)
//   x_{t+1} = beta x_t + w,       w   ~ N(0, tau2)
// Variances are fixed and known; the AR coefficient beta carries a N(beta_m0,
// beta_C0) prior and is learned through the evolution cross products.
struct ArLevel {
  struct Theta {
    double beta = 1.0;
    double sigma2 = 1.0;
    double tau2 = 1.0;

    void validate() const {
      if (!(sigma2 > 0.0) || !(tau2 > 0.0))
        throw InvalidData("ArLevel::Theta: variances must be positive");
    }
  };

  struct Prior {
    double beta_m0 = 1.0, beta_C0 = 1.0;  // beta ~ N(beta_m0, beta_C0)
    double m0 = 0.0, C0 = 1.0;            // x0 ~ N(m0, C0)
  };

  struct ParamSuffStats {
    double sum_xprev2 = 0.0;  // sum of x_prev^2
    double sum_cross = 0.0;   // sum of x_prev * x_next
    double n = 0.0;
  };

  using AuxState = NoAux;
  using Obs = double;

  static constexpr bool has_full_adaptation = true;
  static constexpr bool has_param_learning = true;
  static constexpr bool has_state_suffstats = false;

  static std::vector<const char*> param_names() { return {"beta"}; }
  static double param_value(const Theta& th, std::size_t) { return th.beta; }

  ParamSuffStats init_param_suffstats() const { return {}; }

  Theta truth;  // simulation values; sigma2/tau2 also used as the known values
  Prior prior;

  // -- densities ------------------------------------------------------------

  static double log_obs(double y, double x_next, const Theta& th) {
    return log_normal_pdf(y, x_next, th.sigma2);
  }

  static double log_transition(double x_next, double x_prev, const Theta& th) {
    return log_normal_pdf(x_next, th.beta * x_prev, th.tau2);
  }

  // p(y_{t+1} | x_t, theta) = N(y; beta x_t, sigma2 + tau2).
  static double predictive_logdensity(double y, double x_prev,
                                      const Theta& th) {
    return log_normal_pdf(y, th.beta * x_prev, th.sigma2 + th.tau2);
  }

  static double evolution_mean(double x_prev, const Theta& th) {
    return th.beta * x_prev;
  }

  // -- propagation kernels --------------------------------------------------

  static double propagate_prior(RngStream& g, double x_prev, const Theta& th) {
    return draw_normal(g, th.beta * x_prev, std::sqrt(th.tau2));
  }

  static double propagate_state(RngStream& g, double y, double x_prev,
                                const Theta& th) {
    const StateSuffStats post =
        normal_posterior(th.beta * x_prev, th.tau2, y, th.sigma2);
    return draw_normal(g, post.m, std::sqrt(post.C));
  }

  // -- parameter learning ---------------------------------------------------

  static ParamSuffStats update_param_suffstats(ParamSuffStats s, double /*y*/,
                                               double x_next, double x_prev) {
    s.sum_xprev2 += x_prev * x_prev;
    s.sum_cross += x_prev * x_next;
    s.n += 1.0;
    return s;
  }

  struct BetaHyper {
    double mean, var;  // beta | s ~ N(mean, var)
  };

  // Conjugate normal regression of x_next on x_prev with known tau2:
  // precision 1/beta_C0 + sum_xprev2 / tau2.
  BetaHyper hyperparameters(const ParamSuffStats& s) const {
    const double prec = 1.0 / prior.beta_C0 + s.sum_xprev2 / truth.tau2;
    const double var = 1.0 / prec;
    const double mean =
        var * (prior.beta_m0 / prior.beta_C0 + s.sum_cross / truth.tau2);
    return {mean, var};
  }

  Theta sample_theta(RngStream& g, const ParamSuffStats& s) const {
    const BetaHyper h = hyperparameters(s);
    Theta th = truth;  // sigma2, tau2 known and fixed
    th.beta = draw_normal(g, h.mean, std::sqrt(h.var));
    return th;
  }

  Theta sample_theta_prior(RngStream& g) const {
    return sample_theta(g, ParamSuffStats{});
  }

  double draw_x0(RngStream& g) const {
    return draw_normal(g, prior.m0, std::sqrt(prior.C0));
  }

  // -- unconstrained parameter view for kernel-smoothing filters ------------

  static constexpr std::size_t theta_dim = 1;

  static std::vector<double> theta_to_unconstrained(const Theta& th) {
    return {th.beta};
  }

  Theta theta_from_unconstrained(const std::vector<double>& v) const {
    Theta th = truth;
    th.beta = v[0];
    return th;
  }

  // -- simulation -----------------------------------------------------------

  struct Path {
    double x0 = 0.0;
    std::vector<double> x;
    std::vector<Obs> y;
  };

  Path simulate_path(RngStream& g, const Theta& th, std::size_t T,
                     double x0) const {
    Path p;
    p.x0 = x0;
    p.x.resize(T);
    p.y.resize(T);
    double x = x0;
    for (std::size_t t = 0; t < T; ++t) {
      x = draw_normal(g, th.beta * x, std::sqrt(th.tau2));
      p.x[t] = x;
      p.y[t] = draw_normal(g, x, std::sqrt(th.sigma2));
    }
    return p;
  }

  CdlmSystem cdlm_system(const Theta& th) const {
    CdlmSystem sys;
    sys.obs_dim = 1;
    sys.aux = CdlmSystem::AuxKind::none;
    sys.V = [s2 = th.sigma2](double) { return s2; };
    sys.G = th.beta;
    sys.W = th.tau2;
    sys.validate();
    return sys;
  }
};

}  // namespace plsmc
