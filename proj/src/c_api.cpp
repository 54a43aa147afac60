// SPDX-License-Identifier: Apache-2.0
#include "netrecon/netrecon.h"

#include <fmt/format.h>
#include <fstream>
#include <sstream>
#include <string>

#include "netrecon/em.hpp"
#include "netrecon/io.hpp"
#include "netrecon/posterior.hpp"
#include "netrecon/synth.hpp"

using namespace netrecon;

struct nr_data {
  Dataset data;
  Provenance provenance;
};

struct nr_fit {
  ModelId model;
  const NodeIndex* nodes = nullptr;  // owned by `data`
  Dataset data;
  FitResult fit;
  Report report;
};

namespace {

thread_local std::string last_error;

nr_status status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_argument:
      return NR_INVALID_ARGUMENT;
    case ErrorKind::parse:
      return NR_PARSE_ERROR;
    case ErrorKind::io:
      return NR_IO_ERROR;
    case ErrorKind::unsupported:
      return NR_UNSUPPORTED;
    case ErrorKind::too_large:
      return NR_TOO_LARGE;
  }
  return NR_INTERNAL;
}

template <class Fn>
nr_status guarded(Fn&& fn) {
  last_error.clear();
  try {
    fn();
    return NR_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return NR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return NR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw Error(ErrorKind::invalid_argument, fmt::format("{} is null", what));
}

EmConfig to_config(const nr_em_config& c) {
  EmConfig out;
  out.tol = c.tol;
  out.max_iter = c.max_iter;
  out.restarts = c.restarts;
  out.seed = c.seed;
  out.sparse = c.sparse != 0;
  out.kmax = c.kmax;
  out.edge_states = c.edge_states;
  return out;
}

nr_fit* make_fit(const ModelId& model, const nr_data& d, FitResult fit, Provenance prov) {
  auto* f = new nr_fit{model, nullptr, d.data, std::move(fit), {}};
  f->nodes = &dataset_nodes(f->data);
  f->report = make_report(model, f->data, f->fit, prov);
  return f;
}

}  // namespace

extern "C" {

const char* nr_last_error(void) { return last_error.c_str(); }

const char* nr_status_name(nr_status s) {
  switch (s) {
    case NR_OK:
      return "ok";
    case NR_INVALID_ARGUMENT:
      return "invalid-argument";
    case NR_PARSE_ERROR:
      return "parse-error";
    case NR_IO_ERROR:
      return "io-error";
    case NR_UNSUPPORTED:
      return "unsupported";
    case NR_TOO_LARGE:
      return "too-large";
    case NR_INTERNAL:
      return "internal-error";
  }
  return "unknown";
}

void nr_em_config_default(nr_em_config* c) {
  if (!c) return;
  const EmConfig d;
  *c = {d.tol, d.max_iter, d.restarts, d.seed, d.sparse ? 1 : 0, d.kmax, d.edge_states};
}

nr_status nr_data_read(const char* path, const char* format, int directed, nr_data** out) {
  return guarded([&] {
    need(path, "path");
    need(format, "format");
    need(out, "out");
    *out = nullptr;
    const auto f = parse_tally_format(format);
    auto data = read_dataset(path, f, directed != 0);
    const bool dir = f == TallyFormat::multimodal || directed != 0;
    *out = new nr_data{std::move(data), {path, std::string(to_string(f)), dir, {}}};
  });
}

void nr_data_free(nr_data* data) { delete data; }

nr_status nr_data_size(const nr_data* d, uint64_t* nodes, uint64_t* pairs) {
  return guarded([&] {
    need(d, "data");
    if (nodes) *nodes = dataset_nodes(d->data).size();
    if (pairs) {
      *pairs = std::visit(
          [](const auto& t) -> uint64_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(t)>, MeasurementTally>)
              return t.pairs().size();
            else
              return t.rows().size();
          },
          d->data);
    }
  });
}

nr_status nr_data_threshold_degree(const nr_data* d, uint32_t min_positive, double* out) {
  return guarded([&] {
    need(d, "data");
    need(out, "out");
    const auto* t = std::get_if<MeasurementTally>(&d->data);
    if (!t) throw Error(ErrorKind::unsupported, "thresholding needs a single-mode tally");
    *out = threshold_mean_degree(*t, min_positive);
  });
}

nr_status nr_fit_run(const char* model, const nr_data* d, const nr_em_config* config,
                     nr_fit** out) {
  return guarded([&] {
    need(model, "model");
    need(d, "data");
    need(out, "out");
    *out = nullptr;
    EmConfig c;
    if (config) c = to_config(*config);
    const auto id = ModelId::parse(model);
    auto fit = run_em(id, d->data, c);
    auto prov = d->provenance;
    prov.config = c;
    *out = make_fit(id, *d, std::move(fit), std::move(prov));
  });
}

nr_status nr_fit_load(const char* report_path, const nr_data* d, nr_fit** out) {
  return guarded([&] {
    need(report_path, "report path");
    need(d, "data");
    need(out, "out");
    *out = nullptr;
    auto report = read_report(report_path);
    const auto id = ModelId::parse(report.model);
    const auto& labels = dataset_nodes(d->data).labels();
    if (!std::equal(labels.begin(), labels.end(), report.nodes.begin(), report.nodes.end()))
      throw Error(ErrorKind::invalid_argument, "report nodes do not match the data");
    FitResult fit;
    fit.params = report.params;
    auto step = posterior_at(id, d->data, fit.params, report.provenance.config.support());
    fit.posterior = std::move(step.posterior);
    fit.objective_trace = {step.objective};
    fit.iterations = report.iterations;
    fit.converged = report.converged;
    fit.restart_index = report.restart_index;
    fit.restart_objectives = report.restart_objectives;
    fit.diagnostics = report.diagnostics;
    auto* f = new nr_fit{id, nullptr, d->data, std::move(fit), std::move(report)};
    f->nodes = &dataset_nodes(f->data);
    *out = f;
  });
}

void nr_fit_free(nr_fit* fit) { delete fit; }

nr_status nr_fit_summary(const nr_fit* f, double* objective, uint64_t* iterations, int* converged) {
  return guarded([&] {
    need(f, "fit");
    if (objective) *objective = f->fit.objective();
    if (iterations) *iterations = f->fit.iterations;
    if (converged) *converged = f->fit.converged ? 1 : 0;
  });
}

nr_status nr_fit_write(const nr_fit* f, const char* out_dir, double q_min) {
  return guarded([&] {
    need(f, "fit");
    need(out_dir, "output directory");
    write_outputs(f->report, f->fit, *f->nodes, out_dir, q_min);
  });
}

nr_status nr_fit_export_dot(const nr_fit* f, const char* path, double q_min) {
  return guarded([&] {
    need(f, "fit");
    need(path, "path");
    std::ostringstream ss;
    export_dot(ss, f->fit.posterior, f->fit.params, *f->nodes, q_min);
    write_file(path, ss.str());
  });
}

nr_status nr_fit_mean_degree(const nr_fit* f, double* mean, double* std) {
  return guarded([&] {
    need(f, "fit");
    const auto e = mean_degree(f->fit.posterior);
    if (mean) *mean = e.mean;
    if (std) *std = e.std;
  });
}

nr_status nr_fit_estimate(const nr_fit* f, const char* functional, uint64_t samples, uint64_t seed,
                          double* mean, double* std) {
  return guarded([&] {
    need(f, "fit");
    need(functional, "functional");
    const std::string name = functional;
    const bool presence = f->fit.posterior.form() == PosteriorForm::edge_state;
    NetworkFunctional fn;
    if (name == "mean-degree") {
      fn = [presence](const Network& a) { return average_degree(a, presence); };
    } else if (name == "edge-count") {
      fn = [presence](const Network& a) {
        double s = 0.0;
        for (const auto& e : a.edges()) s += presence ? 1.0 : e.multiplicity;
        return s;
      };
    } else {
      throw Error(ErrorKind::unsupported,
                  fmt::format("unknown functional '{}' (expected mean-degree or edge-count)", name));
    }
    const auto e = estimate_functional(f->fit.posterior, fn, samples, seed);
    if (mean) *mean = e.mean;
    if (std) *std = e.std;
  });
}

nr_status nr_fit_sample_write(const nr_fit* f, uint64_t samples, uint64_t seed, const char* path) {
  return guarded([&] {
    need(f, "fit");
    need(path, "path");
    std::mt19937_64 rng(seed);
    std::ostringstream ss;
    ss << "sample\ti\tj\tA_ij\n";
    for (uint64_t s = 0; s < samples; ++s) {
      const auto a = sample_network(f->fit.posterior, rng);
      for (const auto& e : a.edges())
        ss << s << '\t' << f->nodes->label(e.i) << '\t' << f->nodes->label(e.j) << '\t'
           << e.multiplicity << '\n';
    }
    write_file(path, ss.str());
  });
}

nr_status nr_fit_band_agreement(const nr_fit* f, const char* labels_path, double* out) {
  return guarded([&] {
    need(f, "fit");
    need(labels_path, "labels path");
    need(out, "out");
    const auto labels = parse_labels(labels_path, *f->nodes);
    *out = band_agreement(f->fit.posterior, labels);
  });
}

nr_status nr_synth_run(const char* spec_path, const char* out_dir) {
  return guarded([&] {
    need(spec_path, "spec path");
    need(out_dir, "output directory");
    const auto spec = read_synth_spec(spec_path);
    const auto truth = generate_network(spec);
    const auto data = generate_observations(truth, spec);
    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::io, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
    const auto& nodes = dataset_nodes(data);
    std::ostringstream t, o;
    write_network(t, truth, nodes);
    if (const auto* mm = std::get_if<MultimodalTally>(&data))
      write_multimodal(o, *mm);
    else
      write_tally(o, std::get<MeasurementTally>(data));
    write_file(dir / "truth.tsv", t.str());
    write_file(dir / "observations.tsv", o.str());
    write_file(dir / "spec.json", read_file(spec_path));
  });
}

nr_status nr_oracle_run(const char* report_path, const nr_data* d, const char* path) {
  return guarded([&] {
    need(report_path, "parameter path");
    need(d, "data");
    need(path, "path");
    const auto pf = parse_param_file(read_file(report_path));
    const auto bf = brute_force_posterior(d->data, pf.params, pf.model, pf.support);
    const auto& nodes = dataset_nodes(d->data);
    std::ostringstream ss;
    ss << "i\tj";
    for (std::size_t k = 0; k < bf.states; ++k) ss << "\tQ(" << k << ")";
    ss << '\n';
    for (std::size_t r = 0; r < bf.pairs.size(); ++r) {
      ss << nodes.label(bf.pairs[r].i) << '\t' << nodes.label(bf.pairs[r].j);
      for (std::size_t k = 0; k < bf.states; ++k)
        ss << '\t' << fmt::format("{:.17g}", bf.dist[r * bf.states + k]);
      ss << '\n';
    }
    ss << "# log_evidence\t" << fmt::format("{:.17g}", bf.log_evidence) << '\n';
    write_file(path, ss.str());
  });
}

}  // extern "C"
