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
//
// Command-line driver: simulate / filter / smooth / monitor / compare / bench
// over sectioned key=value config files, emitting CSV artifacts.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "plsmc/plsmc.hpp"

namespace {

using namespace plsmc;
namespace fs = std::filesystem;

using ModelVariant = std::variant<LocalLevel, ArLevel, DynamicFactor, HeavyTailed>;

// Dataset simulation streams live far away from filter replication indices
// so a compare grid can never share randomness between data and runs.
constexpr std::uint64_t kDataRepBase = std::uint64_t{1} << 40;
constexpr std::uint64_t kTruthRepBase = std::uint64_t{1} << 41;

// ---------------------------------------------------------------------------
// config -> domain objects

Algorithm parse_algorithm(const std::string& s) {
  if (s == "bf") return Algorithm::bf;
  if (s == "apf") return Algorithm::apf;
  if (s == "fabf") return Algorithm::fabf;
  if (s == "storvik") return Algorithm::storvik;
  if (s == "lw") return Algorithm::lw;
  if (s == "pl") return Algorithm::pl;
  if (s == "pl_suff") return Algorithm::pl_suff;
  throw ConfigError("unknown algorithm '" + s + "'");
}

Resampler parse_resampler(const std::string& s) {
  if (s == "multinomial") return Resampler::multinomial;
  if (s == "systematic") return Resampler::systematic;
  throw ConfigError("unknown resampler '" + s + "'");
}

StorvikProposal parse_storvik_proposal(const std::string& s) {
  if (s == "prior") return StorvikProposal::prior;
  if (s == "adapted") return StorvikProposal::adapted;
  throw ConfigError("unknown storvik_proposal '" + s + "'");
}

ModelVariant make_model(const Section& s) {
  const std::string name = s.get_string("name");
  if (name == "local_level") {
    LocalLevel m;
    m.truth.sigma2 = s.get_double_or("sigma2", m.truth.sigma2);
    m.truth.tau2 = s.get_double_or("tau2", m.truth.tau2);
    m.prior.a0 = s.get_double_or("a0", m.prior.a0);
    m.prior.b0 = s.get_double_or("b0", m.prior.b0);
    m.prior.c0 = s.get_double_or("c0", m.prior.c0);
    m.prior.d0 = s.get_double_or("d0", m.prior.d0);
    m.prior.m0 = s.get_double_or("m0", m.prior.m0);
    m.prior.C0 = s.get_double_or("C0", m.prior.C0);
    m.prior.learn_sigma2 = s.get_bool_or("learn_sigma2", true);
    m.truth.validate();
    s.finish();
    return m;
  }
  if (name == "ar_level") {
    ArLevel m;
    m.truth.beta = s.get_double_or("beta", m.truth.beta);
    m.truth.sigma2 = s.get_double_or("sigma2", m.truth.sigma2);
    m.truth.tau2 = s.get_double_or("tau2", m.truth.tau2);
    m.prior.beta_m0 = s.get_double_or("beta_m0", m.prior.beta_m0);
    m.prior.beta_C0 = s.get_double_or("beta_C0", m.prior.beta_C0);
    m.prior.m0 = s.get_double_or("m0", m.prior.m0);
    m.prior.C0 = s.get_double_or("C0", m.prior.C0);
    m.truth.validate();
    s.finish();
    return m;
  }
  if (name == "dynamic_factor") {
    DynamicFactor m;
    m.truth.beta1 = s.get_double_or("beta1", m.truth.beta1);
    m.truth.beta2 = s.get_double_or("beta2", m.truth.beta2);
    m.truth.sigma2 = s.get_double_or("sigma2", m.truth.sigma2);
    m.truth.tau2 = s.get_double_or("tau2", m.truth.tau2);
    m.truth.p = s.get_double_or("p", m.truth.p);
    m.truth.q = s.get_double_or("q", m.truth.q);
    m.prior.nu0 = s.get_double_or("nu0", m.prior.nu0);
    m.prior.d0 = s.get_double_or("d0", m.prior.d0);
    m.prior.b10 = s.get_double_or("b10", m.prior.b10);
    m.prior.B10 = s.get_double_or("B10", m.prior.B10);
    m.prior.b20 = s.get_double_or("b20", m.prior.b20);
    m.prior.B20 = s.get_double_or("B20", m.prior.B20);
    m.prior.nu1 = s.get_double_or("nu1", m.prior.nu1);
    m.prior.d1 = s.get_double_or("d1", m.prior.d1);
    m.prior.p1 = s.get_double_or("p1", m.prior.p1);
    m.prior.p2 = s.get_double_or("p2", m.prior.p2);
    m.prior.q1 = s.get_double_or("q1", m.prior.q1);
    m.prior.q2 = s.get_double_or("q2", m.prior.q2);
    m.prior.m0 = s.get_double_or("m0", m.prior.m0);
    m.prior.C0 = s.get_double_or("C0", m.prior.C0);
    m.truth.validate();
    s.finish();
    return m;
  }
  if (name == "heavy_tailed") {
    HeavyTailed m;
    m.truth.beta = s.get_double_or("beta", m.truth.beta);
    m.truth.sigma2 = s.get_double_or("sigma2", m.truth.sigma2);
    m.truth.tau2 = s.get_double_or("tau2", m.truth.tau2);
    m.truth.nu = s.get_double_or("nu", m.truth.nu);
    m.prior.b0 = s.get_double_or("b0", m.prior.b0);
    m.prior.B0 = s.get_double_or("B0", m.prior.B0);
    m.prior.n10 = s.get_double_or("n10", m.prior.n10);
    m.prior.d10 = s.get_double_or("d10", m.prior.d10);
    m.prior.n00 = s.get_double_or("n00", m.prior.n00);
    m.prior.d00 = s.get_double_or("d00", m.prior.d00);
    m.prior.m0 = s.get_double_or("m0", m.prior.m0);
    m.prior.C0 = s.get_double_or("C0", m.prior.C0);
    m.truth.validate();
    s.finish();
    return m;
  }
  throw ConfigError("unknown model '" + name + "'");
}

FilterConfig make_filter_config(const Section& s, std::size_t threads) {
  FilterConfig c;
  c.algorithm = parse_algorithm(s.get_string_or("algorithm", "pl"));
  c.n_particles = s.get_u64_or("n_particles", c.n_particles);
  c.resampler = parse_resampler(s.get_string_or("resampler", "multinomial"));
  c.lw_delta = s.get_double_or("lw_delta", c.lw_delta);
  if (s.has("apf_guess") && s.get_string("apf_guess") != "evolution_mean")
    throw ConfigError("unknown apf_guess '" + s.get_string("apf_guess") + "'");
  c.storvik_proposal =
      parse_storvik_proposal(s.get_string_or("storvik_proposal", "prior"));
  c.learn = s.get_bool_or("learn", c.learn);
  c.store_history = s.get_bool_or("store_history", c.store_history);
  c.label = s.get_string_or("label", s.name());
  c.n_threads = threads;
  s.finish();
  c.validate();
  return c;
}

struct DataSpec {
  std::string path;  // load y from a simulate-format CSV
  std::size_t T = 0; // or simulate inline with the model truth
  double x0_mean = 0.0, x0_var = 0.0;
};

DataSpec make_data(const Section& s) {
  DataSpec d;
  d.path = s.get_string_or("path", "");
  d.T = s.get_u64_or("T", 0);
  d.x0_mean = s.get_double_or("x0_mean", 0.0);
  d.x0_var = s.get_double_or("x0_var", 0.0);
  s.finish();
  if (d.path.empty() && d.T == 0)
    throw ConfigError("[" + s.name() + "]: provide path or a horizon T >= 1");
  if (!d.path.empty() && d.T != 0)
    throw ConfigError("[" + s.name() + "]: path and T are mutually exclusive");
  if (!d.path.empty() && !fs::exists(d.path))
    throw ConfigError("[" + s.name() + "]: no such file '" + d.path + "'");
  return d;
}

// Tracks which config sections a command consumed so typos in section names
// are rejected, mirroring the per-key strictness of Section::finish().
struct Command {
  ConfigFile cf;
  std::set<std::string> used;
  std::uint64_t seed = 1;
  std::string outdir = ".";
  std::size_t threads = 1;

  const Section& sec(const std::string& name) {
    used.insert(name);
    return cf.require(name);
  }
  const Section* opt_sec(const std::string& name) {
    if (!cf.has(name)) return nullptr;
    return &sec(name);
  }
  std::vector<const Section*> filter_blocks() {
    auto blocks = cf.with_prefix("filter");
    for (const Section* b : blocks) used.insert(b->name());
    return blocks;
  }
  void check_sections() const {
    for (const auto& s : cf.sections)
      if (!used.count(s.name()))
        throw ConfigError("unknown section [" + s.name() + "]");
  }
};

struct CliOpts {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::optional<std::string> out;
};

Command begin_command(const CliOpts& opts) {
  Command c;
  c.cf = parse_config_file(opts.config);
  c.threads = opts.threads < 1 ? 1 : opts.threads;
  if (const Section* s = c.opt_sec("seed")) {
    c.seed = s->get_u64_or("seed", c.seed);
    s->finish();
  }
  if (opts.seed) c.seed = *opts.seed;
  if (const Section* s = c.opt_sec("output")) {
    c.outdir = s->get_string_or("dir", c.outdir);
    s->finish();
  }
  if (opts.out) c.outdir = *opts.out;
  return c;
}

// Removes everything it saw unless commit() ran: a failing command leaves no
// partial artifacts behind.
struct OutputGuard {
  std::vector<std::string> paths;
  bool committed = false;
  void add(std::string p) { paths.push_back(std::move(p)); }
  void commit() { committed = true; }
  ~OutputGuard() {
    if (committed) return;
    for (const auto& p : paths) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
};

// ---------------------------------------------------------------------------
// data plumbing

template <class Model>
std::vector<typename Model::Obs> load_obs(const std::string& path) {
  const CsvTable t = read_csv(path);
  if constexpr (std::is_same_v<typename Model::Obs, Obs2>) {
    const auto y1 = t.numeric_column("y1");
    const auto y2 = t.numeric_column("y2");
    std::vector<Obs2> y(y1.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = {y1[i], y2[i]};
    return y;
  } else {
    return t.numeric_column("y1");
  }
}

template <class Model>
std::vector<typename Model::Obs> make_obs(const Model& model,
                                          const DataSpec& d,
                                          std::uint64_t seed,
                                          std::uint64_t dataset) {
  if (!d.path.empty()) return load_obs<Model>(d.path);
  RngStream g(seed, kDataRepBase + dataset, 0);
  return simulate(model, model.truth, d.T, X0Law{d.x0_mean, d.x0_var}, g).y;
}

void write_filter_report(const RunReport& rep, const std::string& outdir,
                         OutputGuard& guard) {
  for (const TargetTrace& tg : rep.targets) {
    CsvWriter w({"t", "mean", "sd", "q01", "q05", "q25", "q50", "q75", "q95",
                 "q99", "logpred", "elapsed_ms"});
    for (std::size_t t = 0; t < tg.rows.size(); ++t) {
      const SummaryRow& r = tg.rows[t];
      std::vector<std::string> cells{std::to_string(t + 1), csv_double(r.mean),
                                     csv_double(r.sd)};
      for (double q : r.q) cells.push_back(csv_double(q));
      cells.push_back(csv_double(rep.logpred_inc[t]));
      cells.push_back(csv_double(rep.elapsed_ms_per_step[t]));
      w.add_row(std::move(cells));
    }
    const std::string path = outdir + "/filter_" + tg.name + ".csv";
    w.write(path);
    guard.add(path);
  }
}

// ---------------------------------------------------------------------------
// subcommands

int run_phases(const std::function<void()>& build,
               const std::function<void()>& run) {
  try {
    build();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  try {
    run();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

int cmd_simulate(const CliOpts& opts) {
  Command c;
  ModelVariant mv;
  DataSpec data;
  return run_phases(
      [&] {
        c = begin_command(opts);
        mv = make_model(c.sec("model"));
        data = make_data(c.sec("data"));
        if (!data.path.empty())
          throw ConfigError("simulate needs [data] T, not a path");
        c.check_sections();
      },
      [&] {
        fs::create_directories(c.outdir);
        OutputGuard guard;
        std::visit(
            [&](const auto& model) {
              RngStream g(c.seed);
              const auto p = simulate(model, model.truth, data.T,
                                      X0Law{data.x0_mean, data.x0_var}, g);
              using Path = std::decay_t<decltype(p)>;
              constexpr bool two_obs =
                  std::is_same_v<typename std::decay_t<decltype(model)>::Obs,
                                 Obs2>;
              constexpr bool has_lambda = requires(const Path& q) { q.lambda; };
              std::vector<std::string> header{"t", "y1"};
              if constexpr (two_obs) header.push_back("y2");
              header.push_back("x_true");
              if constexpr (has_lambda) header.push_back("lambda_true");
              CsvWriter w(header);
              for (std::size_t t = 0; t < data.T; ++t) {
                std::vector<std::string> cells{std::to_string(t + 1)};
                if constexpr (two_obs) {
                  cells.push_back(csv_double(p.y[t][0]));
                  cells.push_back(csv_double(p.y[t][1]));
                } else {
                  cells.push_back(csv_double(p.y[t]));
                }
                cells.push_back(csv_double(p.x[t]));
                if constexpr (has_lambda) {
                  // Discrete regimes are 0-based internally, 1-based on disk.
                  if constexpr (std::is_integral_v<
                                    std::decay_t<decltype(p.lambda[t])>>)
                    cells.push_back(std::to_string(p.lambda[t] + 1));
                  else
                    cells.push_back(csv_double(p.lambda[t]));
                }
                w.add_row(std::move(cells));
              }
              const std::string path = c.outdir + "/data.csv";
              w.write(path);
              guard.add(path);
            },
            mv);
        guard.commit();
      });
}

int cmd_filter(const CliOpts& opts) {
  Command c;
  ModelVariant mv;
  FilterConfig fc;
  DataSpec data;
  return run_phases(
      [&] {
        c = begin_command(opts);
        mv = make_model(c.sec("model"));
        fc = make_filter_config(c.sec("filter"), c.threads);
        data = make_data(c.sec("data"));
        c.check_sections();
      },
      [&] {
        fs::create_directories(c.outdir);
        OutputGuard guard;
        std::visit(
            [&](const auto& model) {
              const auto y = make_obs(model, data, c.seed, 0);
              const auto run = run_filter(model, y, fc, c.seed, 0);
              write_filter_report(run.report, c.outdir, guard);
            },
            mv);
        guard.commit();
      });
}

int cmd_smooth(const CliOpts& opts) {
  Command c;
  ModelVariant mv;
  FilterConfig fc;
  DataSpec data;
  std::size_t m_paths = 1000;
  bool store_paths = false;
  return run_phases(
      [&] {
        c = begin_command(opts);
        mv = make_model(c.sec("model"));
        fc = make_filter_config(c.sec("filter"), c.threads);
        fc.store_history = true;
        data = make_data(c.sec("data"));
        if (const Section* s = c.opt_sec("smooth")) {
          m_paths = s->get_u64_or("m_paths", m_paths);
          store_paths = s->get_bool_or("store_paths", store_paths);
          s->finish();
        }
        if (m_paths < 1) throw ConfigError("[smooth]: m_paths must be >= 1");
        c.check_sections();
      },
      [&] {
        fs::create_directories(c.outdir);
        OutputGuard guard;
        std::visit(
            [&](const auto& model) {
              const auto y = make_obs(model, data, c.seed, 0);
              const auto run = run_filter(model, y, fc, c.seed, 0);
              const auto draws =
                  backward_smooth(model, run.state, m_paths, c.seed, 0,
                                  c.threads);
              const auto rows = smoothed_summary(draws);
              CsvWriter w({"t", "mean", "sd", "q01", "q05", "q25", "q50",
                           "q75", "q95", "q99"});
              for (std::size_t t = 0; t < rows.size(); ++t) {
                std::vector<std::string> cells{std::to_string(t + 1),
                                               csv_double(rows[t].mean),
                                               csv_double(rows[t].sd)};
                for (double q : rows[t].q) cells.push_back(csv_double(q));
                w.add_row(std::move(cells));
              }
              const std::string path = c.outdir + "/smooth.csv";
              w.write(path);
              guard.add(path);
              if (store_paths) {
                CsvWriter pw({"path", "t", "x"});
                for (std::size_t j = 0; j < draws.n_paths(); ++j)
                  for (std::size_t t = 0; t < draws.horizon(); ++t)
                    pw.add_row({std::to_string(j + 1), std::to_string(t + 1),
                                csv_double(draws.x[j][t])});
                const std::string ppath = c.outdir + "/smooth_paths.csv";
                pw.write(ppath);
                guard.add(ppath);
              }
            },
            mv);
        guard.commit();
      });
}

int obs_dim_of(const ModelVariant& mv) {
  return std::visit(
      [](const auto& m) {
        return std::is_same_v<typename std::decay_t<decltype(m)>::Obs, Obs2>
                   ? 2
                   : 1;
      },
      mv);
}

int cmd_monitor(const CliOpts& opts) {
  Command c;
  ModelVariant m0, m1;
  FilterConfig fc;
  DataSpec data;
  return run_phases(
      [&] {
        c = begin_command(opts);
        m0 = make_model(c.sec("model0"));
        m1 = make_model(c.sec("model1"));
        fc = make_filter_config(c.sec("filter"), c.threads);
        data = make_data(c.sec("data"));
        if (data.path.empty())
          throw ConfigError("monitor needs [data] path (a shared dataset)");
        if (obs_dim_of(m0) != obs_dim_of(m1))
          throw ConfigError("model0 and model1 observe different dimensions");
        c.check_sections();
      },
      [&] {
        fs::create_directories(c.outdir);
        OutputGuard guard;
        auto trace_of = [&](const ModelVariant& mv) {
          return std::visit(
              [&](const auto& model) {
                const auto y = make_obs(model, data, c.seed, 0);
                const auto run = run_filter(model, y, fc, c.seed, 0);
                return predictive_trace(run.report.logpred_inc);
              },
              mv);
        };
        const PredictiveTrace tr0 = trace_of(m0);
        const PredictiveTrace tr1 = trace_of(m1);
        if (tr0.cumulative.size() != tr1.cumulative.size())
          throw LengthMismatch("monitored runs cover different horizons");
        CsvWriter w({"t", "logml_M0", "logml_M1", "log_bayes_factor"});
        for (std::size_t t = 0; t < tr0.cumulative.size(); ++t)
          w.add_row({std::to_string(t + 1), csv_double(tr0.cumulative[t]),
                     csv_double(tr1.cumulative[t]),
                     csv_double(tr1.cumulative[t] - tr0.cumulative[t])});
        const std::string path = c.outdir + "/monitor.csv";
        w.write(path);
        guard.add(path);
        guard.commit();
      });
}

// ---- compare ---------------------------------------------------------------

struct CompareSpec {
  std::string target = "state";
  std::string metric = "mse";            // mse | lrmse | mae
  std::string truth = "oracle";          // oracle | grid | reference
  std::string truth_filter;              // when truth = reference
  std::string reference;                 // LRMSE benchmark label
  std::size_t grid_cells = 200;
  std::size_t datasets = 1, runs = 1;
};

GridPosterior::Axis axis_of(const std::string& target) {
  if (target == "sigma2") return GridPosterior::Axis::sigma2;
  if (target == "tau2") return GridPosterior::Axis::tau2;
  if (target == "beta") return GridPosterior::Axis::beta;
  throw ConfigError("no grid axis for target '" + target + "'");
}

GridSpec grid_spec_for(const LocalLevel& m, std::size_t cells) {
  GridSpec s;
  s.sigma2 = m.prior.learn_sigma2
                 ? GridAxis::inverse_gamma(m.prior.a0, m.prior.b0, cells)
                 : GridAxis::fixed(m.truth.sigma2);
  s.tau2 = GridAxis::inverse_gamma(m.prior.c0, m.prior.d0, cells);
  s.beta = GridAxis::fixed(1.0);
  s.m0 = m.prior.m0;
  s.C0 = m.prior.C0;
  return s;
}

GridSpec grid_spec_for(const ArLevel& m, std::size_t cells) {
  GridSpec s;
  s.sigma2 = GridAxis::fixed(m.truth.sigma2);
  s.tau2 = GridAxis::fixed(m.truth.tau2);
  s.beta = GridAxis::normal(m.prior.beta_m0, m.prior.beta_C0, cells);
  s.m0 = m.prior.m0;
  s.C0 = m.prior.C0;
  return s;
}

template <class Model>
QuantSeries oracle_quantiles(const Model& model,
                             const std::vector<double>& y) {
  double beta = 1.0;
  if constexpr (requires { model.truth.beta; }) beta = model.truth.beta;
  const auto kf = kalman_filter(y, model.truth.sigma2, model.truth.tau2,
                                model.prior.m0, model.prior.C0, beta);
  QuantSeries q(y.size(), std::vector<double>(kQuantileLevels.size()));
  for (std::size_t t = 0; t < y.size(); ++t)
    for (std::size_t k = 0; k < kQuantileLevels.size(); ++k)
      q[t][k] = kf.m[t] + normal_quantile(kQuantileLevels[k]) *
                              std::sqrt(kf.C[t]);
  return q;
}

QuantSeries target_series(const RunReport& rep, const std::string& target,
                          const std::string& label) {
  for (const TargetTrace& tg : rep.targets)
    if (tg.name == target) return quantile_series(tg);
  throw InvalidData("filter '" + label + "' does not report target '" +
                    target + "'");
}

template <class Model>
void do_compare(const Model& model, const CompareSpec& spec,
                const std::vector<FilterConfig>& filters,
                const DataSpec& data, std::uint64_t seed,
                const std::string& outdir, OutputGuard& guard) {
  const std::size_t D = spec.datasets, R = spec.runs;
  const std::vector<double> alphas(kQuantileLevels.begin(),
                                   kQuantileLevels.end());

  std::vector<std::vector<typename Model::Obs>> ys(D);
  for (std::size_t d = 0; d < D; ++d) ys[d] = make_obs(model, data, seed, d);

  std::vector<QuantSeries> truth(D);
  for (std::size_t d = 0; d < D; ++d) {
    if (spec.truth == "oracle") {
      if constexpr (std::is_same_v<typename Model::Obs, double> &&
                    requires { oracle_quantiles(model, ys[d]); }) {
        if (spec.target != "state")
          throw ConfigError("truth = oracle only covers the state target");
        truth[d] = oracle_quantiles(model, ys[d]);
      } else {
        throw MissingOracle("no exact filter for this model");
      }
    } else if (spec.truth == "grid") {
      if constexpr (requires { grid_spec_for(model, spec.grid_cells); }) {
        const GridSpec gs = grid_spec_for(model, spec.grid_cells);
        truth[d] = spec.target == "state"
                       ? grid_state_quantiles(ys[d], gs, alphas)
                       : grid_param_quantiles(ys[d], gs,
                                              axis_of(spec.target), alphas);
      } else {
        throw MissingOracle("no grid posterior for this model");
      }
    } else {  // reference run
      for (const FilterConfig& fc : filters)
        if (fc.label == spec.truth_filter) {
          const auto run = run_filter(model, ys[d], fc, seed,
                                      kTruthRepBase + d);
          truth[d] = target_series(run.report, spec.target, fc.label);
          break;
        }
      if (truth[d].empty())
        throw ConfigError("truth_filter '" + spec.truth_filter +
                          "' matches no filter block");
    }
  }

  // est[k][d][r][t][a]
  std::vector<std::vector<std::vector<QuantSeries>>> est(filters.size());
  for (std::size_t k = 0; k < filters.size(); ++k) {
    est[k].resize(D);
    for (std::size_t d = 0; d < D; ++d) {
      est[k][d].resize(R);
      for (std::size_t r = 0; r < R; ++r) {
        const auto run =
            run_filter(model, ys[d], filters[k], seed, d * R + r);
        est[k][d][r] =
            target_series(run.report, spec.target, filters[k].label);
      }
    }
  }

  std::vector<std::vector<std::vector<double>>> mse(filters.size());
  if (spec.metric == "mse" || spec.metric == "lrmse")
    for (std::size_t k = 0; k < filters.size(); ++k)
      mse[k] = mse_table(est[k], truth);

  std::size_t ref_index = filters.size();
  if (spec.metric == "lrmse") {
    for (std::size_t k = 0; k < filters.size(); ++k)
      if (filters[k].label == spec.reference) ref_index = k;
    if (ref_index == filters.size())
      throw ConfigError("reference '" + spec.reference +
                        "' matches no filter block");
  }

  CsvWriter w({"filter", "t", "alpha", "metric", "value"});
  auto emit = [&](const std::string& label,
                  const std::vector<std::vector<double>>& table,
                  const std::string& metric) {
    for (std::size_t t = 0; t < table.size(); ++t)
      for (std::size_t a = 0; a < table[t].size(); ++a)
        w.add_row({label, std::to_string(t + 1), csv_double(alphas[a]),
                   metric, csv_double(table[t][a])});
  };
  for (std::size_t k = 0; k < filters.size(); ++k) {
    if (spec.metric == "mse") {
      emit(filters[k].label, mse[k], "mse");
    } else if (spec.metric == "lrmse") {
      if (k == ref_index) continue;
      emit(filters[k].label, lrmse_table(mse[k], mse[ref_index]), "lrmse");
    } else {
      emit(filters[k].label, mae_table(est[k][0], truth[0]), "mae");
    }
  }
  const std::string path = outdir + "/compare.csv";
  w.write(path);
  guard.add(path);
}

int cmd_compare(const CliOpts& opts) {
  Command c;
  ModelVariant mv;
  std::vector<FilterConfig> filters;
  DataSpec data;
  CompareSpec spec;
  return run_phases(
      [&] {
        c = begin_command(opts);
        mv = make_model(c.sec("model"));
        data = make_data(c.sec("data"));
        if (const Section* s = c.opt_sec("replications")) {
          spec.datasets = s->get_u64_or("datasets", 1);
          spec.runs = s->get_u64_or("runs", 1);
          s->finish();
        }
        {
          const Section& s = c.sec("compare");
          spec.target = s.get_string_or("target", spec.target);
          spec.metric = s.get_string_or("metric", spec.metric);
          spec.truth = s.get_string_or("truth", spec.truth);
          spec.truth_filter = s.get_string_or("truth_filter", "");
          spec.reference = s.get_string_or("reference", "");
          spec.grid_cells = s.get_u64_or("grid_cells", spec.grid_cells);
          s.finish();
        }
        for (const Section* b : c.filter_blocks())
          filters.push_back(make_filter_config(*b, c.threads));
        if (filters.size() < 2)
          throw ConfigError("compare needs at least two [filter*] blocks");
        if (spec.metric != "mse" && spec.metric != "lrmse" &&
            spec.metric != "mae")
          throw ConfigError("unknown metric '" + spec.metric + "'");
        if (spec.truth != "oracle" && spec.truth != "grid" &&
            spec.truth != "reference")
          throw ConfigError("unknown truth source '" + spec.truth + "'");
        if (spec.truth == "reference" && spec.truth_filter.empty())
          throw ConfigError("truth = reference needs truth_filter = <label>");
        if (spec.metric == "lrmse" && spec.reference.empty())
          throw ConfigError("metric = lrmse needs reference = <label>");
        if (spec.datasets < 1 || spec.runs < 1)
          throw ConfigError("[replications]: datasets and runs must be >= 1");
        if (!data.path.empty() && spec.datasets != 1)
          throw ConfigError("a fixed data path allows only datasets = 1");
        if (spec.metric == "mae" && spec.datasets != 1)
          throw ConfigError("mae is defined over runs on a single dataset");
        c.check_sections();
      },
      [&] {
        fs::create_directories(c.outdir);
        OutputGuard guard;
        std::visit(
            [&](const auto& model) {
              do_compare(model, spec, filters, data, c.seed, c.outdir, guard);
            },
            mv);
        guard.commit();
      });
}

int cmd_bench(const CliOpts& opts) {
  Command c;
  ModelVariant mv;
  FilterConfig fc;
  std::vector<std::uint64_t> n_list{500, 1000, 2000};
  std::vector<std::uint64_t> t_list{100};
  std::size_t m_paths = 0;  // 0 -> as many smoothing paths as particles
  return run_phases(
      [&] {
        c = begin_command(opts);
        mv = make_model(c.sec("model"));
        fc = make_filter_config(c.sec("filter"), c.threads);
        fc.store_history = true;
        if (const Section* s = c.opt_sec("bench")) {
          auto parse_list = [&](const std::string& key,
                                std::vector<std::uint64_t>& out) {
            if (!s->has(key)) return;
            out.clear();
            std::stringstream ss(s->get_string(key));
            std::string item;
            while (std::getline(ss, item, ','))
              out.push_back(std::stoull(item));
            if (out.empty())
              throw ConfigError("[bench]: empty list for " + key);
          };
          parse_list("n_list", n_list);
          parse_list("t_list", t_list);
          m_paths = s->get_u64_or("m_paths", 0);
          s->finish();
        }
        c.check_sections();
      },
      [&] {
        fs::create_directories(c.outdir);
        OutputGuard guard;
        CsvWriter w({"phase", "N", "T", "elapsed_ms"});
        std::visit(
            [&](const auto& model) {
              for (std::uint64_t T : t_list) {
                RngStream g(c.seed, kDataRepBase + T, 0);
                const auto y =
                    simulate(model, model.truth, T, X0Law{}, g).y;
                for (std::uint64_t N : n_list) {
                  FilterConfig cfg = fc;
                  cfg.n_particles = N;
                  const auto run = run_filter(model, y, cfg, c.seed, 0);
                  w.add_row({"filter", std::to_string(N), std::to_string(T),
                             csv_double(run.report.elapsed_ms)});
                  const std::size_t M = m_paths ? m_paths : N;
                  const auto t0 = std::chrono::steady_clock::now();
                  backward_smooth(model, run.state, M, c.seed, 0, c.threads);
                  const auto t1 = std::chrono::steady_clock::now();
                  const double ms =
                      std::chrono::duration<double, std::milli>(t1 - t0)
                          .count();
                  w.add_row({"smooth", std::to_string(N), std::to_string(T),
                             csv_double(ms)});
                }
              }
            },
            mv);
        const std::string path = c.outdir + "/bench.csv";
        w.write(path);
        guard.add(path);
        guard.commit();
      });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"particle learning for state-space models"};
  app.require_subcommand(1);

  CliOpts opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "run configuration file")
        ->required();
    sub->add_option("--seed", opts.seed, "override the config seed");
    sub->add_option("--threads", opts.threads,
                    "worker threads (default 1, bit-reproducible)");
    sub->add_option("--out", opts.out, "override the output directory");
  };

  CLI::App* sim = app.add_subcommand(
      "simulate", "draw a synthetic dataset and write data.csv");
  CLI::App* fil = app.add_subcommand(
      "filter", "run one filter, write per-target summary CSVs");
  CLI::App* smo = app.add_subcommand(
      "smooth", "filter with history, then backward smoothing");
  CLI::App* mon = app.add_subcommand(
      "monitor", "sequential marginal likelihoods and Bayes factor");
  CLI::App* cmp = app.add_subcommand(
      "compare", "replicate filters against a truth source, emit metrics");
  CLI::App* ben = app.add_subcommand(
      "bench", "time filtering and smoothing over N and T grids");
  for (CLI::App* sub : {sim, fil, smo, mon, cmp, ben}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (sim->parsed()) return cmd_simulate(opts);
  if (fil->parsed()) return cmd_filter(opts);
  if (smo->parsed()) return cmd_smooth(opts);
  if (mon->parsed()) return cmd_monitor(opts);
  if (cmp->parsed()) return cmd_compare(opts);
  return cmd_bench(opts);
}
