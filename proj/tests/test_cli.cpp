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

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "plsmc/csv.hpp"

using namespace plsmc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("plsmc_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& child = "") const {
    return child.empty() ? path.string() : (path / child).string();
  }
};

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(PLSMC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  REQUIRE(out.good());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

const std::string kLocalLevelModel =
    "[model]\n"
    "name = local_level\n"
    "sigma2 = 1.0\n"
    "tau2 = 0.5\n";

}  // namespace

TEST_CASE("simulate writes a reproducible dataset", "[cli]") {
  TempDir dir("simulate");
  write_text(dir.str("sim.ini"), kLocalLevelModel +
                                     "[data]\n"
                                     "T = 100\n"
                                     "[seed]\n"
                                     "seed = 7\n");
  REQUIRE(run_cli("simulate --config " + dir.str("sim.ini") + " --out " +
                  dir.str("a")) == 0);
  const std::string first = slurp(dir.str("a/data.csv"));
  CHECK(count_lines(first) == 101);

  const auto table = read_csv(dir.str("a/data.csv"));
  CHECK(table.header ==
        std::vector<std::string>{"t", "y1", "x_true"});
  CHECK(table.numeric_column("t").front() == 1.0);
  CHECK(table.numeric_column("t").back() == 100.0);

  REQUIRE(run_cli("simulate --config " + dir.str("sim.ini") + " --out " +
                  dir.str("b")) == 0);
  CHECK(slurp(dir.str("b/data.csv")) == first);

  // A different seed produces different data.
  REQUIRE(run_cli("simulate --config " + dir.str("sim.ini") +
                  " --seed 8 --out " + dir.str("c")) == 0);
  CHECK(slurp(dir.str("c/data.csv")) != first);
}

TEST_CASE("simulate covers every model's dataset layout", "[cli]") {
  TempDir dir("simulate_models");
  write_text(dir.str("dfm.ini"),
             "[model]\n"
             "name = dynamic_factor\n"
             "[data]\n"
             "T = 12\n");
  REQUIRE(run_cli("simulate --config " + dir.str("dfm.ini") + " --out " +
                  dir.str("dfm")) == 0);
  const auto dfm = read_csv(dir.str("dfm/data.csv"));
  CHECK(dfm.header == std::vector<std::string>{"t", "y1", "y2", "x_true",
                                               "lambda_true"});
  for (double lam : dfm.numeric_column("lambda_true"))
    CHECK((lam == 1.0 || lam == 2.0));

  write_text(dir.str("heavy.ini"),
             "[model]\n"
             "name = heavy_tailed\n"
             "nu = 10\n"
             "[data]\n"
             "T = 12\n");
  REQUIRE(run_cli("simulate --config " + dir.str("heavy.ini") + " --out " +
                  dir.str("heavy")) == 0);
  const auto heavy = read_csv(dir.str("heavy/data.csv"));
  CHECK(heavy.header ==
        std::vector<std::string>{"t", "y1", "x_true", "lambda_true"});
  for (double lam : heavy.numeric_column("lambda_true")) CHECK(lam > 0.0);
}

TEST_CASE("filter emits one summary file per reported target", "[cli]") {
  TempDir dir("filter");
  write_text(dir.str("sim.ini"), kLocalLevelModel + "[data]\nT = 40\n");
  REQUIRE(run_cli("simulate --config " + dir.str("sim.ini") + " --out " +
                  dir.str("")) == 0);

  write_text(dir.str("filter.ini"), kLocalLevelModel +
                                        "[filter]\n"
                                        "algorithm = pl\n"
                                        "n_particles = 300\n"
                                        "resampler = systematic\n"
                                        "learn = true\n"
                                        "[data]\n"
                                        "path = " +
                                        dir.str("data.csv") + "\n");
  REQUIRE(run_cli("filter --config " + dir.str("filter.ini") +
                  " --seed 3 --out " + dir.str("out")) == 0);

  for (const std::string target : {"state", "sigma2", "tau2"}) {
    const auto table = read_csv(dir.str("out/filter_" + target + ".csv"));
    REQUIRE(table.rows.size() == 40);
    REQUIRE(table.header ==
            std::vector<std::string>{"t", "mean", "sd", "q01", "q05", "q25",
                                     "q50", "q75", "q95", "q99", "logpred",
                                     "elapsed_ms"});
    const auto q01 = table.numeric_column("q01");
    const auto q50 = table.numeric_column("q50");
    const auto q99 = table.numeric_column("q99");
    const auto sd = table.numeric_column("sd");
    for (std::size_t t = 0; t < 40; ++t) {
      CHECK(q01[t] <= q50[t]);
      CHECK(q50[t] <= q99[t]);
      CHECK(sd[t] >= 0.0);
      CHECK(std::isfinite(table.numeric_column("mean")[t]));
    }
  }

  // Learned variances stay positive.
  const auto s2 = read_csv(dir.str("out/filter_sigma2.csv"));
  for (double v : s2.numeric_column("q01")) CHECK(v > 0.0);

  // Same invocation is bit-identical.
  REQUIRE(run_cli("filter --config " + dir.str("filter.ini") +
                  " --seed 3 --out " + dir.str("out2")) == 0);
  CHECK(slurp(dir.str("out2/filter_state.csv")) ==
        slurp(dir.str("out/filter_state.csv")));
}

TEST_CASE("monitoring a model against itself gives Bayes factor one",
          "[cli]") {
  TempDir dir("monitor");
  write_text(dir.str("sim.ini"), kLocalLevelModel + "[data]\nT = 25\n");
  REQUIRE(run_cli("simulate --config " + dir.str("sim.ini") + " --out " +
                  dir.str("")) == 0);

  const std::string model_body =
      "name = local_level\n"
      "sigma2 = 1.0\n"
      "tau2 = 0.5\n";
  write_text(dir.str("monitor.ini"),
             "[model0]\n" + model_body + "[model1]\n" + model_body +
                 "[filter]\n"
                 "algorithm = pl\n"
                 "n_particles = 150\n"
                 "learn = false\n"
                 "[data]\n"
                 "path = " +
                 dir.str("data.csv") + "\n");
  REQUIRE(run_cli("monitor --config " + dir.str("monitor.ini") +
                  " --seed 5 --out " + dir.str("out")) == 0);

  const auto table = read_csv(dir.str("out/monitor.csv"));
  REQUIRE(table.header == std::vector<std::string>{
                              "t", "logml_M0", "logml_M1",
                              "log_bayes_factor"});
  REQUIRE(table.rows.size() == 25);
  const auto m0 = table.numeric_column("logml_M0");
  const auto m1 = table.numeric_column("logml_M1");
  for (std::size_t t = 0; t < 25; ++t) {
    CHECK(m0[t] == m1[t]);
    CHECK(table.numeric_column("log_bayes_factor")[t] == 0.0);
  }
  // Cumulative log marginal likelihood decreases as data accrue.
  CHECK(m0.back() < m0.front());
}

TEST_CASE("compare emits metric rows for the non-reference filters",
          "[cli]") {
  TempDir dir("compare");
  write_text(dir.str("compare.ini"), kLocalLevelModel +
                                         "[data]\n"
                                         "T = 10\n"
                                         "[compare]\n"
                                         "target = state\n"
                                         "metric = lrmse\n"
                                         "truth = oracle\n"
                                         "reference = base\n"
                                         "[replications]\n"
                                         "datasets = 2\n"
                                         "runs = 2\n"
                                         "[filter1]\n"
                                         "algorithm = bf\n"
                                         "label = base\n"
                                         "n_particles = 80\n"
                                         "learn = false\n"
                                         "[filter2]\n"
                                         "algorithm = pl\n"
                                         "label = pl\n"
                                         "n_particles = 80\n"
                                         "learn = false\n");
  REQUIRE(run_cli("compare --config " + dir.str("compare.ini") +
                  " --seed 11 --out " + dir.str("out")) == 0);
  const auto table = read_csv(dir.str("out/compare.csv"));
  REQUIRE(table.header == std::vector<std::string>{"filter", "t", "alpha",
                                                   "metric", "value"});
  CHECK(table.rows.size() == 10 * 7);
  for (const auto& row : table.rows) {
    CHECK(row[0] == "pl");
    CHECK(row[3] == "lrmse");
  }
}

TEST_CASE("smooth writes summaries and optional path draws", "[cli]") {
  TempDir dir("smooth");
  write_text(dir.str("smooth.ini"), kLocalLevelModel +
                                        "[filter]\n"
                                        "algorithm = pl\n"
                                        "n_particles = 120\n"
                                        "learn = false\n"
                                        "[data]\n"
                                        "T = 15\n"
                                        "[smooth]\n"
                                        "m_paths = 50\n"
                                        "store_paths = true\n");
  REQUIRE(run_cli("smooth --config " + dir.str("smooth.ini") +
                  " --seed 2 --out " + dir.str("out")) == 0);
  const auto summary = read_csv(dir.str("out/smooth.csv"));
  CHECK(summary.rows.size() == 15);
  const auto paths = read_csv(dir.str("out/smooth_paths.csv"));
  REQUIRE(paths.header == std::vector<std::string>{"path", "t", "x"});
  CHECK(paths.rows.size() == 50 * 15);
  CHECK(paths.numeric_column("path").back() == 50.0);
}

TEST_CASE("bench times filtering and smoothing over the grids", "[cli]") {
  TempDir dir("bench");
  write_text(dir.str("bench.ini"), kLocalLevelModel +
                                       "[filter]\n"
                                       "algorithm = pl\n"
                                       "n_particles = 50\n"
                                       "learn = false\n"
                                       "[bench]\n"
                                       "n_list = 50,100\n"
                                       "t_list = 10\n"
                                       "m_paths = 20\n");
  REQUIRE(run_cli("bench --config " + dir.str("bench.ini") + " --out " +
                  dir.str("out")) == 0);
  const auto table = read_csv(dir.str("out/bench.csv"));
  REQUIRE(table.header ==
          std::vector<std::string>{"phase", "N", "T", "elapsed_ms"});
  REQUIRE(table.rows.size() == 4);
  int n_filter = 0, n_smooth = 0;
  for (const auto& row : table.rows) {
    if (row[0] == "filter") ++n_filter;
    if (row[0] == "smooth") ++n_smooth;
    CHECK(csv_parse_double(row[3]) >= 0.0);
  }
  CHECK(n_filter == 2);
  CHECK(n_smooth == 2);
}

TEST_CASE("configuration mistakes exit with status two", "[cli]") {
  TempDir dir("config_errors");

  // Missing required --config flag.
  CHECK(run_cli("simulate") == 2);
  // Unknown subcommand.
  CHECK(run_cli("frobnicate --config x.ini") == 2);
  // Nonexistent config file.
  CHECK(run_cli("simulate --config " + dir.str("nope.ini")) == 2);

  // [data] needs either a horizon or a path.
  write_text(dir.str("no_horizon.ini"), kLocalLevelModel + "[data]\n");
  CHECK(run_cli("simulate --config " + dir.str("no_horizon.ini") +
                " --out " + dir.str("out")) == 2);

  // Stray keys and stray sections are rejected.
  write_text(dir.str("stray_key.ini"),
             kLocalLevelModel + "bogus = 1\n[data]\nT = 5\n");
  CHECK(run_cli("simulate --config " + dir.str("stray_key.ini") + " --out " +
                dir.str("out")) == 2);
  write_text(dir.str("stray_section.ini"),
             kLocalLevelModel + "[data]\nT = 5\n[extra]\nx = 1\n");
  CHECK(run_cli("simulate --config " + dir.str("stray_section.ini") +
                " --out " + dir.str("out")) == 2);

  // Unsupported model/algorithm pair is a config-level error.
  write_text(dir.str("bad_alg.ini"),
             "[model]\n"
             "name = heavy_tailed\n"
             "[filter]\n"
             "algorithm = lw\n"
             "n_particles = 50\n"
             "[data]\n"
             "T = 5\n");
  const int rc = run_cli("filter --config " + dir.str("bad_alg.ini") +
                         " --out " + dir.str("out"));
  CHECK((rc == 2 || rc == 3));

  // Nothing was left behind by any failing invocation.
  CHECK((!fs::exists(dir.str("out")) || fs::is_empty(dir.str("out"))));
}

TEST_CASE("failed runs leave no partial artifacts", "[cli]") {
  TempDir dir("partial");
  write_text(dir.str("bad_data.csv"),
             "t,y1\n"
             "1,0.5\n"
             "2,nan\n"
             "3,0.25\n");
  write_text(dir.str("filter.ini"), kLocalLevelModel +
                                        "[filter]\n"
                                        "algorithm = pl\n"
                                        "n_particles = 50\n"
                                        "learn = false\n"
                                        "[data]\n"
                                        "path = " +
                                        dir.str("bad_data.csv") + "\n");
  CHECK(run_cli("filter --config " + dir.str("filter.ini") + " --out " +
                dir.str("out")) == 3);
  CHECK((!fs::exists(dir.str("out")) || fs::is_empty(dir.str("out"))));
}
