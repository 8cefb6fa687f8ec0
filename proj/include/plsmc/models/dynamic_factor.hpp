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
#include <utility>
#include <vector>

#include "plsmc/cloud.hpp"
#include "plsmc/errors.hpp"
#include "plsmc/models/cdlm.hpp"
#include "plsmc/models/common.hpp"
#include "plsmc/rng.hpp"
#include "plsmc/stats.hpp"

namespace plsmc {

// Markov-switching dynamic one-factor model with two observation series:
//   y_{t+1} = beta_{lam_{t+1}} x_{t+1} + v,  v ~ N(0, sigma2 I2),
//     with loading vector beta_lam = (1, beta_lam)' switching between
//     beta1 and beta2 by the regime lam in {0, 1} (two-state Markov chain,
//     stay probabilities p and q),
//   x_{t+1} = x_t + w,  w ~ N(0, tau2).
// Conditionally conjugate priors: sigma2 ~ IG(nu0/2, d0/2); beta_i | sigma2 ~
// N(b_i0, sigma2 B_i0); tau2 ~ IG(nu1/2, d1/2); p ~ Beta(p1, p2),
// q ~ Beta(q1, q2). Filters for this model are Rao-Blackwellized: particles
// carry (m, C, lam, s, theta).
struct DynamicFactor {
  struct Theta {
    double beta1 = 1.5;
    double beta2 = 0.5;
    double sigma2 = 1.0;
    double tau2 = 0.1;
    double p = 0.95;  // P(stay in regime 0)
    double q = 0.95;  // P(stay in regime 1)

    void validate() const {
      if (!(sigma2 > 0.0) || !(tau2 > 0.0))
        throw InvalidData("DynamicFactor::Theta: variances must be positive");
      if (!(p > 0.0 && p < 1.0) || !(q > 0.0 && q < 1.0))
        throw InvalidData(
            "DynamicFactor::Theta: stay probabilities must lie in (0, 1)");
    }
  };

  struct Prior {
    double nu0 = 10.0, d0 = 10.0;   // sigma2 ~ IG(nu0/2, d0/2)
    double b10 = 1.5, B10 = 1.0;    // beta1 | sigma2 ~ N(b10, sigma2 B10)
    double b20 = 0.5, B20 = 1.0;    // beta2 | sigma2 ~ N(b20, sigma2 B20)
    double nu1 = 10.0, d1 = 1.0;    // tau2 ~ IG(nu1/2, d1/2)
    double p1 = 19.0, p2 = 1.0;     // p ~ Beta(p1, p2)
    double q1 = 19.0, q2 = 1.0;     // q ~ Beta(q1, q2)
    double m0 = 0.0, C0 = 10.0;     // x0 ~ N(m0, C0)
  };

  // Conjugate hyperparameters maintained directly (the regression means need
  // the prior inside the recursion); initialized from Prior at t=0.
  struct ParamSuffStats {
    NigBlock reg[2];        // per-regime loading regressions (y2 on x)
    double nu0 = 0.0, d0 = 0.0;  // sigma2 hyperparameters (shape*2, scale*2)
    double nu1 = 0.0, d1 = 0.0;  // tau2 hyperparameters
    double p1 = 0.0, p2 = 0.0;   // regime-0 stay/leave counts
    double q1 = 0.0, q2 = 0.0;   // regime-1 stay/leave counts
  };

  using AuxState = int;  // regime index in {0, 1}
  using Obs = Obs2;

  static constexpr bool has_full_adaptation = true;
  static constexpr bool has_param_learning = true;
  static constexpr bool has_state_suffstats = true;

  static std::vector<const char*> param_names() {
    return {"beta1", "beta2", "sigma2", "tau2", "p", "q"};
  }
  static double param_value(const Theta& th, std::size_t k) {
    switch (k) {
      case 0: return th.beta1;
      case 1: return th.beta2;
      case 2: return th.sigma2;
      case 3: return th.tau2;
      case 4: return th.p;
      default: return th.q;
    }
  }

  Theta truth;
  Prior prior;

  static double loading(const Theta& th, int regime) {
    return regime == 0 ? th.beta1 : th.beta2;
  }

  // P(lam_{t+1} = to | lam_t = from).
  static double trans_prob(const Theta& th, int from, int to) {
    if (from == 0) return to == 0 ? th.p : 1.0 - th.p;
    return to == 1 ? th.q : 1.0 - th.q;
  }

  // Stationary probability of regime 0.
  static double stationary_p0(const Theta& th) {
    return (1.0 - th.q) / ((1.0 - th.p) + (1.0 - th.q));
  }

  // -- densities ------------------------------------------------------------

  static double log_obs(const Obs2& y, double x, int regime, const Theta& th) {
    const double b = loading(th, regime);
    return log_normal_pdf(y[0], x, th.sigma2) +
           log_normal_pdf(y[1], b * x, th.sigma2);
  }

  static double log_transition(double x_next, double x_prev, const Theta& th) {
    return log_normal_pdf(x_next, x_prev, th.tau2);
  }

  // One mixture component of the predictive: y | (m, C), next regime.
  static double regime_predictive(const Obs2& y, const StateSuffStats& sx,
                                  int regime, const Theta& th) {
    const double b = loading(th, regime);
    const Obs2 mu{sx.m, b * sx.m};
    return mvn2_rank1_logpdf(y, mu, sx.C + th.tau2, b, th.sigma2);
  }

  // p(y_{t+1} | m_t, C_t, lam_t, theta): mixture over the next regime.
  static double predictive_logdensity(const Obs2& y, const StateSuffStats& sx,
                                      int lam_prev, const Theta& th) {
    const double l0 =
        regime_predictive(y, sx, 0, th) + std::log(trans_prob(th, lam_prev, 0));
    const double l1 =
        regime_predictive(y, sx, 1, th) + std::log(trans_prob(th, lam_prev, 1));
    const double mx = std::max(l0, l1);
    return mx + std::log(std::exp(l0 - mx) + std::exp(l1 - mx));
  }

  // -- kernels --------------------------------------------------------------

  // Posterior regime draw with probabilities proportional to
  // regime_predictive * transition probability.
  static int propagate_aux(RngStream& g, const Obs2& y,
                           const StateSuffStats& sx, int lam_prev,
                           const Theta& th) {
    const double l0 =
        regime_predictive(y, sx, 0, th) + std::log(trans_prob(th, lam_prev, 0));
    const double l1 =
        regime_predictive(y, sx, 1, th) + std::log(trans_prob(th, lam_prev, 1));
    const double p0 = 1.0 / (1.0 + std::exp(l1 - l0));
    return draw_uniform(g) < p0 ? 0 : 1;
  }

  // Prior regime draw (for non-adapted filters).
  static int propagate_aux_prior(RngStream& g, int lam_prev, const Theta& th) {
    const double stay = lam_prev == 0 ? th.p : th.q;
    return draw_uniform(g) < stay ? lam_prev : 1 - lam_prev;
  }

  // Blind state propagation through the random-walk evolution.
  static double propagate_prior(RngStream& g, double x_prev, const Theta& th) {
    return draw_normal(g, x_prev, std::sqrt(th.tau2));
  }

  // Kalman update of (m, C) given the next regime: prior x_{t+1} ~ N(m, R)
  // with R = C + tau2, observations y1 = x + e1 and y2 = b x + e2 sharing
  // variance sigma2, combined in precision form.
  static StateSuffStats update_state_suffstats(const StateSuffStats& sx,
                                               const Obs2& y, int regime,
                                               const Theta& th) {
    const double R = sx.C + th.tau2;
    const double b = loading(th, regime);
    if (!(th.sigma2 > 0.0) || !std::isfinite(R) || !(R >= 0.0))
      throw SingularInnovation("dynamic factor: singular innovation");
    if (R == 0.0) return {sx.m, 0.0};
    const double prec = 1.0 / R + (1.0 + b * b) / th.sigma2;
    const double C = 1.0 / prec;
    const double m = C * (sx.m / R + (y[0] + b * y[1]) / th.sigma2);
    return {m, C};
  }

  // Joint draw of (x_t, x_{t+1}) from the pre- and post-update moments; the
  // backward leg uses the random-walk evolution exactly as in the local level
  // case.
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

  ParamSuffStats init_param_suffstats() const {
    ParamSuffStats s;
    s.reg[0] = NigBlock{1.0 / prior.B10, prior.b10};
    s.reg[1] = NigBlock{1.0 / prior.B20, prior.b20};
    s.nu0 = prior.nu0;
    s.d0 = prior.d0;
    s.nu1 = prior.nu1;
    s.d1 = prior.d1;
    s.p1 = prior.p1;
    s.p2 = prior.p2;
    s.q1 = prior.q1;
    s.q2 = prior.q2;
    return s;
  }

  // Deterministic suffstat map given the state pair, regimes and observation.
  // The first series y1 = x + e informs sigma2 directly; the second series
  // updates the active regime's loading regression, whose marginal residual
  // term folds into the sigma2 scale.
  static ParamSuffStats update_param_suffstats(ParamSuffStats s, const Obs2& y,
                                               double x_next, double x_prev,
                                               int lam_prev, int lam_next) {
    const double r1 = y[0] - x_next;
    s.nu0 += 2.0;
    s.d0 += r1 * r1 + s.reg[lam_next].update(x_next, y[1]);
    s.nu1 += 1.0;
    s.d1 += (x_next - x_prev) * (x_next - x_prev);
    if (lam_prev == 0) {
      (lam_next == 0 ? s.p1 : s.p2) += 1.0;
    } else {
      (lam_next == 1 ? s.q1 : s.q2) += 1.0;
    }
    return s;
  }

  Theta sample_theta(RngStream& g, const ParamSuffStats& s) const {
    Theta th;
    th.sigma2 = draw_inverse_gamma(g, 0.5 * s.nu0, 0.5 * s.d0);
    th.beta1 = draw_normal(g, s.reg[0].b, std::sqrt(th.sigma2 / s.reg[0].B_inv));
    th.beta2 = draw_normal(g, s.reg[1].b, std::sqrt(th.sigma2 / s.reg[1].B_inv));
    th.tau2 = draw_inverse_gamma(g, 0.5 * s.nu1, 0.5 * s.d1);
    th.p = draw_beta(g, s.p1, s.p2);
    th.q = draw_beta(g, s.q1, s.q2);
    return th;
  }

  Theta sample_theta_prior(RngStream& g) const {
    return sample_theta(g, init_param_suffstats());
  }

  double draw_x0(RngStream& g) const {
    return draw_normal(g, prior.m0, std::sqrt(prior.C0));
  }

  int draw_lambda0(RngStream& g, const Theta& th) const {
    return draw_uniform(g) < stationary_p0(th) ? 0 : 1;
  }

  // -- simulation -----------------------------------------------------------

  struct Path {
    double x0 = 0.0;
    int lambda0 = 0;
    std::vector<double> x;
    std::vector<int> lambda;
    std::vector<Obs> y;
  };

  Path simulate_path(RngStream& g, const Theta& th, std::size_t T, double x0,
                     int lambda0) const {
    Path p;
    p.x0 = x0;
    p.lambda0 = lambda0;
    p.x.resize(T);
    p.lambda.resize(T);
    p.y.resize(T);
    double x = x0;
    int lam = lambda0;
    const double sd_obs = std::sqrt(th.sigma2);
    for (std::size_t t = 0; t < T; ++t) {
      lam = propagate_aux_prior(g, lam, th);
      x = draw_normal(g, x, std::sqrt(th.tau2));
      const double b = loading(th, lam);
      p.lambda[t] = lam;
      p.x[t] = x;
      p.y[t] = {draw_normal(g, x, sd_obs), draw_normal(g, b * x, sd_obs)};
    }
    return p;
  }

  CdlmSystem cdlm_system(const Theta& th) const {
    CdlmSystem sys;
    sys.obs_dim = 2;
    sys.aux = CdlmSystem::AuxKind::discrete;
    sys.F = [b1 = th.beta1, b2 = th.beta2](double lam) {
      return std::array<double, 2>{1.0, lam < 0.5 ? b1 : b2};
    };
    sys.V = [s2 = th.sigma2](double) { return s2; };
    sys.G = 1.0;
    sys.W = th.tau2;
    sys.Pi = {{{th.p, 1.0 - th.p}, {1.0 - th.q, th.q}}};
    sys.validate();
    return sys;
  }
};

}  // namespace plsmc
