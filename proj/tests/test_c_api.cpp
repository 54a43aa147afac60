// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "netrecon/netrecon.h"

extern "C" int c_default_restarts(void);

namespace fs = std::filesystem;

namespace {

fs::path workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "netrecon_c_api";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

void put(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

std::string get(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nr_data* read_ok(const fs::path& p, const char* format = "tally", int directed = 0) {
  nr_data* d = nullptr;
  REQUIRE(nr_data_read(p.c_str(), format, directed, &d) == NR_OK);
  return d;
}

}  // namespace

TEST_CASE("defaults and names") {
  nr_em_config cfg;
  nr_em_config_default(&cfg);
  CHECK(cfg.tol == 1e-8);
  CHECK(cfg.max_iter == 10000);
  CHECK(cfg.restarts == 10);
  CHECK(cfg.sparse == 1);
  CHECK(cfg.kmax == 3);
  CHECK(c_default_restarts() == 10);
  CHECK(std::strcmp(nr_status_name(NR_OK), "ok") == 0);
  CHECK(std::strcmp(nr_status_name(NR_PARSE_ERROR), "parse-error") == 0);
  CHECK(std::strcmp(nr_status_name(NR_TOO_LARGE), "too-large") == 0);
}

TEST_CASE("errors map to status codes") {
  nr_data* d = nullptr;
  CHECK(nr_data_read("/nonexistent/x.tsv", "tally", 0, &d) == NR_IO_ERROR);
  CHECK(d == nullptr);
  CHECK(std::string(nr_last_error()).find("/nonexistent/x.tsv") != std::string::npos);

  put(workdir() / "bad.tsv", "a\tb\t1\t2\n");
  CHECK(nr_data_read((workdir() / "bad.tsv").c_str(), "tally", 0, &d) == NR_PARSE_ERROR);
  CHECK(std::string(nr_last_error()).find(":1:") != std::string::npos);
  CHECK(nr_data_read((workdir() / "bad.tsv").c_str(), "csv", 0, &d) == NR_INVALID_ARGUMENT);
  CHECK(nr_data_read(nullptr, "tally", 0, &d) == NR_INVALID_ARGUMENT);

  put(workdir() / "ok.tsv", "a\tb\t2\t1\n");
  d = read_ok(workdir() / "ok.tsv");
  nr_fit* f = nullptr;
  CHECK(nr_fit_run("gaussian", d, nullptr, &f) == NR_UNSUPPORTED);
  CHECK(nr_fit_run("per_node", d, nullptr, &f) == NR_INVALID_ARGUMENT);
  CHECK(f == nullptr);
  nr_data_free(d);
  nr_data_free(nullptr);
  nr_fit_free(nullptr);
}

TEST_CASE("fit, write, reload") {
  put(workdir() / "obs.tsv",
      "a\tb\t5\t5\na\tc\t5\t0\nb\tc\t5\t4\nc\td\t5\t1\nd\te\t5\t5\na\te\t5\t0\n");
  nr_data* d = read_ok(workdir() / "obs.tsv");
  std::uint64_t nodes = 0, pairs = 0;
  CHECK(nr_data_size(d, &nodes, &pairs) == NR_OK);
  CHECK(nodes == 5);
  CHECK(pairs == 6);
  double thr = 0.0;
  CHECK(nr_data_threshold_degree(d, 4, &thr) == NR_OK);
  CHECK(thr == doctest::Approx(2.0 * 3.0 / 5.0));

  nr_em_config cfg;
  nr_em_config_default(&cfg);
  cfg.restarts = 3;
  cfg.seed = 5;
  nr_fit* f = nullptr;
  REQUIRE(nr_fit_run("bernoulli", d, &cfg, &f) == NR_OK);
  double obj = 0.0, mean = 0.0, sd = 0.0;
  std::uint64_t iters = 0;
  int conv = 0;
  CHECK(nr_fit_summary(f, &obj, &iters, &conv) == NR_OK);
  CHECK(conv == 1);
  CHECK(iters > 0);
  CHECK(nr_fit_mean_degree(f, &mean, &sd) == NR_OK);
  CHECK(mean > 0.0);

  const auto out = workdir() / "fit";
  REQUIRE(nr_fit_write(f, out.c_str(), 0.01) == NR_OK);
  for (auto name : {"params.json", "edges.tsv", "trace.tsv"}) CHECK(fs::exists(out / name));

  nr_fit* g = nullptr;
  REQUIRE(nr_fit_load((out / "params.json").c_str(), d, &g) == NR_OK);
  double mean2 = 0.0, sd2 = 0.0;
  CHECK(nr_fit_mean_degree(g, &mean2, &sd2) == NR_OK);
  CHECK(mean2 == mean);
  CHECK(sd2 == sd);
  const auto again = workdir() / "again";
  REQUIRE(nr_fit_write(g, again.c_str(), 0.01) == NR_OK);
  CHECK(get(again / "edges.tsv") == get(out / "edges.tsv"));
  CHECK(get(again / "params.json") == get(out / "params.json"));

  double m = 0.0, s = 0.0;
  CHECK(nr_fit_estimate(g, "mean-degree", 20000, 3, &m, &s) == NR_OK);
  CHECK(std::abs(m - mean) < 5.0 * sd / std::sqrt(20000.0) + 1e-12);
  CHECK(nr_fit_estimate(g, "diameter", 10, 3, &m, &s) == NR_UNSUPPORTED);

  CHECK(nr_fit_sample_write(g, 3, 1, (workdir() / "samples.tsv").c_str()) == NR_OK);
  CHECK(nr_fit_export_dot(g, (workdir() / "g.dot").c_str(), 0.01) == NR_OK);
  CHECK(get(workdir() / "g.dot").starts_with("graph"));

  put(workdir() / "labels.tsv", "a\tb\thigh\na\tc\tlow\n");
  double agree = 0.0;
  CHECK(nr_fit_band_agreement(g, (workdir() / "labels.tsv").c_str(), &agree) == NR_OK);
  CHECK(agree == 1.0);

  CHECK(nr_oracle_run((out / "params.json").c_str(), d, (workdir() / "oracle.tsv").c_str()) ==
        NR_OK);
  CHECK(get(workdir() / "oracle.tsv").find("# log_evidence") != std::string::npos);

  nr_fit_free(g);
  nr_fit_free(f);
  nr_data_free(d);
}

TEST_CASE("oracle refuses large inputs") {
  std::string text;
  for (char a = 'a'; a < 'h'; ++a)
    for (char b = a + 1; b < 'h'; ++b) text += std::string{a} + "\t" + b + "\t2\t1\n";
  put(workdir() / "big.tsv", text);
  put(workdir() / "p.json",
      R"({"model": "bernoulli", "params": {"omega": 0.1, "alpha": 0.8, "beta": 0.1}})");
  nr_data* d = read_ok(workdir() / "big.tsv");
  CHECK(nr_oracle_run((workdir() / "p.json").c_str(), d, (workdir() / "o.tsv").c_str()) ==
        NR_TOO_LARGE);
  nr_data_free(d);
}

TEST_CASE("synthetic data") {
  put(workdir() / "spec.json",
      R"({"model": "bernoulli", "n": 30, "trials": 3, "seed": 4,
          "params": {"omega": 0.1, "alpha": 0.8, "beta": 0.05}})");
  const auto out = workdir() / "synth";
  REQUIRE(nr_synth_run((workdir() / "spec.json").c_str(), out.c_str()) == NR_OK);
  for (auto name : {"truth.tsv", "observations.tsv", "spec.json"}) CHECK(fs::exists(out / name));
  nr_data* d = read_ok(out / "observations.tsv");
  std::uint64_t nodes = 0, pairs = 0;
  nr_data_size(d, &nodes, &pairs);
  CHECK(nodes == 30);
  CHECK(pairs == 435);
  nr_data_free(d);
  CHECK(nr_synth_run((workdir() / "missing.json").c_str(), out.c_str()) == NR_IO_ERROR);
}
