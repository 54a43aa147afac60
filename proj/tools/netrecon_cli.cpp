// SPDX-License-Identifier: Apache-2.0
// netrecon command-line front end; talks to the library only through the C API.
#include <CLI11.hpp>
#include <cstdio>
#include <memory>
#include <string>

#include "netrecon/netrecon.h"

namespace {

struct Failure {
  nr_status status;
};

void check(nr_status s) {
  if (s != NR_OK) throw Failure{s};
}

struct DataDeleter {
  void operator()(nr_data* d) const { nr_data_free(d); }
};
struct FitDeleter {
  void operator()(nr_fit* f) const { nr_fit_free(f); }
};
using DataPtr = std::unique_ptr<nr_data, DataDeleter>;
using FitPtr = std::unique_ptr<nr_fit, FitDeleter>;

struct DataArgs {
  std::string path;
  std::string format = "tally";
  bool directed = false;

  void add(CLI::App* app) {
    app->add_option("--data", path, "measurement file")->required();
    app->add_option("--format", format, "pairs | tally | multimodal")
        ->check(CLI::IsMember({"pairs", "tally", "multimodal"}));
    app->add_flag("--directed", directed, "ordered pairs (i reports j)");
  }

  DataPtr load() const {
    nr_data* d = nullptr;
    check(nr_data_read(path.c_str(), format.c_str(), directed ? 1 : 0, &d));
    return DataPtr(d);
  }
};

FitPtr load_fit(const std::string& report, const nr_data* data) {
  nr_fit* f = nullptr;
  check(nr_fit_load(report.c_str(), data, &f));
  return FitPtr(f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network reconstruction from noisy edge measurements"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "run EM and write params.json, edges.tsv, trace.tsv");
  DataArgs fit_data;
  fit_data.add(fit);
  std::string model = "bernoulli", out_dir;
  nr_em_config cfg;
  nr_em_config_default(&cfg);
  bool exact = false;
  double q_min = 0.01;
  fit->add_option("--model", model, "bernoulli | poisson | config | multimodal | per_node | edge_types");
  fit->add_option("--tol", cfg.tol, "convergence tolerance")->capture_default_str();
  fit->add_option("--max-iter", cfg.max_iter)->capture_default_str();
  fit->add_option("--restarts", cfg.restarts)->capture_default_str();
  fit->add_option("--seed", cfg.seed)->capture_default_str();
  auto* sparse_flag = fit->add_flag("--sparse", "multiplicities k in {0,1} (default)");
  fit->add_flag("--exact", exact, "multiplicities up to --kmax")->excludes(sparse_flag);
  fit->add_option("--kmax", cfg.kmax)->capture_default_str();
  fit->add_option("--states", cfg.edge_states, "edge_types state count")->capture_default_str();
  fit->add_option("--out", out_dir, "output directory")->required();
  fit->add_option("--qmin", q_min, "edges.tsv threshold")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "generate ground truth and observations");
  std::string spec_path, synth_out;
  synth->add_option("--spec", spec_path, "synthetic spec JSON")->required();
  synth->add_option("--out", synth_out, "output directory")->required();

  // oracle
  auto* oracle = app.add_subcommand("oracle", "exact posterior by enumeration (tiny inputs)");
  DataArgs oracle_data;
  oracle_data.add(oracle);
  std::string oracle_params, oracle_out;
  oracle->add_option("--params", oracle_params, "params.json or {model, params} file")->required();
  oracle->add_option("--out", oracle_out, "output TSV")->required();

  // sample
  auto* sample = app.add_subcommand("sample", "draw networks from a fitted posterior");
  DataArgs sample_data;
  sample_data.add(sample);
  std::string sample_fit, sample_out;
  std::uint64_t n_samples = 1, sample_seed = 0;
  sample->add_option("--fit", sample_fit, "params.json from fit")->required();
  sample->add_option("--samples", n_samples)->capture_default_str();
  sample->add_option("--seed", sample_seed)->capture_default_str();
  sample->add_option("--out", sample_out, "output TSV")->required();

  // estimate
  auto* estimate = app.add_subcommand("estimate", "posterior functional with uncertainty");
  DataArgs est_data;
  est_data.add(estimate);
  std::string est_fit, functional = "mean-degree";
  std::uint64_t est_samples = 0, est_seed = 0;
  estimate->add_option("--fit", est_fit, "params.json from fit")->required();
  estimate->add_option("--functional", functional, "mean-degree | edge-count")
      ->check(CLI::IsMember({"mean-degree", "edge-count"}));
  estimate->add_option("--samples", est_samples, "0: closed form (mean-degree only)")
      ->capture_default_str();
  estimate->add_option("--seed", est_seed)->capture_default_str();

  // export
  auto* exp = app.add_subcommand("export", "write a Graphviz file");
  DataArgs exp_data;
  exp_data.add(exp);
  std::string exp_fit, dot_path;
  double exp_qmin = 0.01;
  exp->add_option("--fit", exp_fit, "params.json from fit")->required();
  exp->add_option("--dot", dot_path, "output .dot path")->required();
  exp->add_option("--qmin", exp_qmin)->capture_default_str();

  // threshold
  auto* thr = app.add_subcommand("threshold", "mean degree of pairs reported at least k times");
  DataArgs thr_data;
  thr_data.add(thr);
  std::uint32_t min_positive = 1;
  thr->add_option("--min-positive", min_positive)->capture_default_str();

  // agreement
  auto* agree = app.add_subcommand("agreement", "three-band agreement with labelled pairs");
  DataArgs agree_data;
  agree_data.add(agree);
  std::string agree_fit, labels;
  agree->add_option("--fit", agree_fit, "params.json from fit")->required();
  agree->add_option("--labels", labels, "i<TAB>j<TAB>high|medium|low")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) {
      cfg.sparse = exact ? 0 : 1;
      auto data = fit_data.load();
      nr_fit* raw = nullptr;
      check(nr_fit_run(model.c_str(), data.get(), &cfg, &raw));
      FitPtr f(raw);
      check(nr_fit_write(f.get(), out_dir.c_str(), q_min));
      double obj = 0.0, mean = 0.0, sd = 0.0;
      std::uint64_t iters = 0;
      int conv = 0;
      check(nr_fit_summary(f.get(), &obj, &iters, &conv));
      check(nr_fit_mean_degree(f.get(), &mean, &sd));
      std::printf("objective %.17g\niterations %llu\nconverged %s\nmean_degree %.6g +/- %.6g\n", obj,
                  static_cast<unsigned long long>(iters), conv ? "yes" : "no", mean, sd);
    } else if (*synth) {
      check(nr_synth_run(spec_path.c_str(), synth_out.c_str()));
    } else if (*oracle) {
      auto data = oracle_data.load();
      check(nr_oracle_run(oracle_params.c_str(), data.get(), oracle_out.c_str()));
    } else if (*sample) {
      auto data = sample_data.load();
      auto f = load_fit(sample_fit, data.get());
      check(nr_fit_sample_write(f.get(), n_samples, sample_seed, sample_out.c_str()));
    } else if (*estimate) {
      auto data = est_data.load();
      auto f = load_fit(est_fit, data.get());
      double mean = 0.0, sd = 0.0;
      if (est_samples == 0 && functional == "mean-degree")
        check(nr_fit_mean_degree(f.get(), &mean, &sd));
      else
        check(nr_fit_estimate(f.get(), functional.c_str(), est_samples, est_seed, &mean, &sd));
      std::printf("%s %.17g +/- %.17g\n", functional.c_str(), mean, sd);
    } else if (*exp) {
      auto data = exp_data.load();
      auto f = load_fit(exp_fit, data.get());
      check(nr_fit_export_dot(f.get(), dot_path.c_str(), exp_qmin));
    } else if (*thr) {
      auto data = thr_data.load();
      double c = 0.0;
      check(nr_data_threshold_degree(data.get(), min_positive, &c));
      std::printf("mean_degree %.17g\n", c);
    } else if (*agree) {
      auto data = agree_data.load();
      auto f = load_fit(agree_fit, data.get());
      double a = 0.0;
      check(nr_fit_band_agreement(f.get(), labels.c_str(), &a));
      std::printf("agreement %.17g\n", a);
    }
  } catch (const Failure& e) {
    std::fprintf(stderr, "error [%s]: %s\n", nr_status_name(e.status), nr_last_error());
    return static_cast<int>(e.status);
  }
  return 0;
}
