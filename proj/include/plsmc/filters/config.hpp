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

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "plsmc/cloud.hpp"
#include "plsmc/errors.hpp"
#include "plsmc/stats.hpp"
#include "plsmc/weights.hpp"

namespace plsmc {

enum class Algorithm { bf, apf, fabf, storvik, lw, pl, pl_suff };
enum class StorvikProposal { prior, adapted };
enum class ApfGuess { evolution_mean };

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::bf: return "bf";
    case Algorithm::apf: return "apf";
    case Algorithm::fabf: return "fabf";
    case Algorithm::storvik: return "storvik";
    case Algorithm::lw: return "lw";
    case Algorithm::pl: return "pl";
    default: return "pl_suff";
  }
}

struct FilterConfig {
  Algorithm algorithm = Algorithm::pl;
  std::size_t n_particles = 1000;
  Resampler resampler = Resampler::multinomial;
  double lw_delta = 0.95;                 // Liu-West discount in (0, 1)
  ApfGuess apf_guess = ApfGuess::evolution_mean;
  StorvikProposal storvik_proposal = StorvikProposal::prior;
  bool learn = true;          // sample theta sequentially vs fix at truth
  bool store_history = false; // keep per-step (x, theta) clouds for smoothing
  std::size_t n_threads = 1;
  std::string label;          // optional display name for comparisons

  void validate() const {
    if (n_particles < 2)
      throw ConfigError("filter: n_particles must be at least 2");
    if (!(lw_delta > 0.0 && lw_delta < 1.0))
      throw ConfigError("filter: lw_delta must lie in (0, 1)");
    if (n_threads < 1) throw ConfigError("filter: threads must be at least 1");
  }
};

// Fixed reporting grid for posterior quantiles.
inline constexpr std::array<double, 7> kQuantileLevels{
    0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99};

template <class Model>
struct FilterState {
  ParticleCloud<Model> cloud;
  std::size_t t = 0;           // number of observations absorbed
  double logpred = 0.0;        // cumulative log marginal likelihood estimate
  std::vector<double> logpred_inc;  // per-step increments

  // Optional history for backward smoothing: per-step state draws and theta
  // draws, index t-1 holds the time-t cloud. O(T N) memory.
  bool store_history = false;
  std::vector<std::vector<double>> history_x;
  std::vector<std::vector<typename Model::Theta>> history_theta;
};

// Per-step posterior summary of one scalar target.
struct SummaryRow {
  double mean = 0.0;
  double sd = 0.0;
  std::array<double, kQuantileLevels.size()> q{};
};

// Equal-weight sample summary on the fixed quantile grid.
inline SummaryRow summarize_values(std::vector<double> vals) {
  SummaryRow row;
  row.mean = mean_of(vals);
  row.sd = vals.size() > 1 ? sd_of(vals) : 0.0;
  const auto qs = quantiles_of(
      std::move(vals),
      std::vector<double>(kQuantileLevels.begin(), kQuantileLevels.end()));
  for (std::size_t k = 0; k < qs.size(); ++k) row.q[k] = qs[k];
  return row;
}

struct TargetTrace {
  std::string name;               // "state" or a parameter name
  std::vector<SummaryRow> rows;   // one per time step
};

struct RunReport {
  std::vector<TargetTrace> targets;
  std::vector<double> logpred_inc;
  double logpred = 0.0;
  std::vector<double> elapsed_ms_per_step;
  double elapsed_ms = 0.0;
};

template <class Model>
struct FilterRun {
  FilterState<Model> state;
  RunReport report;
};

namespace detail {

// RNG substream ids for the phases of one filter step; per-particle streams
// hang off the phase stream so thread count cannot affect draws.
enum : std::uint64_t {
  kPhaseInit = 0,
  kPhaseAux = 1,
  kPhaseResample = 2,
  kPhasePropagate = 3,
  kPhaseSuffstat = 4,
  kPhaseTheta = 5,
  kPhaseKernel = 6,
  kPhaseFinalResample = 7,
};

template <class Model>
const typename Model::Theta& theta_of(const Model& model,
                                      const ParticleCloud<Model>& cloud,
                                      std::size_t i) {
  return cloud.thetas.empty() ? model.truth : cloud.thetas[i];
}

}  // namespace detail

}  // namespace plsmc
