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

#include <cstddef>
#include <vector>

#include "plsmc/errors.hpp"
#include "plsmc/stats.hpp"

namespace plsmc {

// Exact forward recursions for the scalar Gaussian state-space model
//   y_t = x_t + eps,        eps ~ N(0, sigma2)
//   x_t = beta x_{t-1} + w, w   ~ N(0, tau2)
// (beta = 1 gives the local level model). Entry t-1 of each vector holds the
// time-t quantity; (m0, C0) are kept for the smoother.
struct KalmanTrace {
  double beta = 1.0, sigma2 = 1.0, tau2 = 1.0;
  double m0 = 0.0, C0 = 0.0;
  std::vector<double> m, C;                  // filtered moments
  std::vector<double> pred_mean, pred_var;   // one-step predictive of y_t
  std::vector<double> loglik_inc;            // log N(y_t; pred_mean, pred_var)
  double loglik = 0.0;                       // cumulative exact log-likelihood
};

inline KalmanTrace kalman_filter(const std::vector<double>& y, double sigma2,
                                 double tau2, double m0, double C0,
                                 double beta = 1.0) {
  if (!(sigma2 > 0.0) || !(tau2 >= 0.0) || !(C0 >= 0.0))
    throw InvalidData("kalman_filter: invalid variances");
  KalmanTrace tr;
  tr.beta = beta;
  tr.sigma2 = sigma2;
  tr.tau2 = tau2;
  tr.m0 = m0;
  tr.C0 = C0;
  const std::size_t T = y.size();
  tr.m.resize(T);
  tr.C.resize(T);
  tr.pred_mean.resize(T);
  tr.pred_var.resize(T);
  tr.loglik_inc.resize(T);
  double m = m0, C = C0;
  for (std::size_t t = 0; t < T; ++t) {
    const double a = beta * m;
    const double R = beta * beta * C + tau2;
    const double Q = R + sigma2;
    const double A = R / Q;
    tr.pred_mean[t] = a;
    tr.pred_var[t] = Q;
    tr.loglik_inc[t] = log_normal_pdf(y[t], a, Q);
    tr.loglik += tr.loglik_inc[t];
    m = a + A * (y[t] - a);
    C = A * sigma2;
    tr.m[t] = m;
    tr.C[t] = C;
  }
  return tr;
}

// Exact backward smoothing recursions over a complete forward trace:
//   D_t = beta C_t / R_{t+1},   R_{t+1} = beta^2 C_t + tau2
//   m_t^T = m_t + D_t (m_{t+1}^T - beta m_t)
//   C_t^T = C_t + D_t^2 (C_{t+1}^T - R_{t+1})
// For beta = 1 these reduce to m_t^T = (1 - D_t) m_t + D_t m_{t+1}^T and
// C_t^T = (1 - D_t) C_t + D_t^2 C_{t+1}^T with D_t = C_t / (C_t + tau2).
struct SmootherTrace {
  std::vector<double> m, C;  // smoothed moments m_t^T, C_t^T for t = 1..T
  std::vector<double> D;     // smoothing gains (D_T unused, kept 0)
};

inline SmootherTrace kalman_smoother(const KalmanTrace& tr) {
  const std::size_t T = tr.m.size();
  SmootherTrace s;
  s.m.resize(T);
  s.C.resize(T);
  s.D.assign(T, 0.0);
  if (T == 0) return s;
  s.m[T - 1] = tr.m[T - 1];
  s.C[T - 1] = tr.C[T - 1];
  for (std::size_t i = T - 1; i-- > 0;) {
    const double R = tr.beta * tr.beta * tr.C[i] + tr.tau2;
    const double D = tr.beta * tr.C[i] / R;
    s.D[i] = D;
    s.m[i] = tr.m[i] + D * (s.m[i + 1] - tr.beta * tr.m[i]);
    s.C[i] = tr.C[i] + D * D * (s.C[i + 1] - R);
  }
  return s;
}

}  // namespace plsmc
