// SPDX-License-Identifier: Apache-2.0
#include "netrecon/io.hpp"

#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

namespace netrecon {

using nlohmann::json;

namespace {

[[noreturn]] void parse_error(std::string_view source, std::size_t line, const std::string& msg) {
  throw Error(ErrorKind::parse, fmt::format("{}:{}: {}", source, line, msg));
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::invalid_argument, msg); }

std::vector<std::string_view> split_tabs(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = s.find('\t', start);
    out.push_back(s.substr(start, tab == std::string_view::npos ? s.npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

std::uint32_t parse_count(std::string_view field, std::string_view what, std::string_view source,
                          std::size_t line) {
  std::uint32_t v = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc{} || ptr != end)
    parse_error(source, line, fmt::format("{} '{}' is not a nonnegative integer", what, field));
  return v;
}

int parse_outcome(std::string_view field, std::string_view source, std::size_t line) {
  if (field == "0") return 0;
  if (field == "1") return 1;
  parse_error(source, line, fmt::format("outcome '{}' is not 0 or 1", field));
}

// Calls fn(fields, line_number) for every data line.
template <class Fn>
void for_each_record(std::istream& in, std::string_view source, std::size_t expected, Fn&& fn) {
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s(raw);
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    if (s.empty() || s.front() == '#') continue;
    auto fields = split_tabs(s);
    if (fields.size() != expected)
      parse_error(source, line,
                  fmt::format("expected {} tab-separated fields, found {}", expected, fields.size()));
    if (fields[0].empty() || fields[1].empty()) parse_error(source, line, "empty node label");
    if (fields[0] == fields[1]) parse_error(source, line, fmt::format("self-pair '{}'", fields[0]));
    fn(fields, line);
  }
  if (in.bad()) throw Error(ErrorKind::io, fmt::format("{}: read failed", source));
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, fmt::format("cannot open '{}' for reading", path.string()));
  return in;
}

std::string num(double x) { return fmt::format("{:.17g}", x); }

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

// ---- parameter JSON -------------------------------------------------------

json params_to_json(ModelKind kind, const ModelParams& p) {
  json j = json::object();
  switch (kind) {
    case ModelKind::bernoulli:
      j["omega"] = p.omega;
      j["alpha"] = p.alpha;
      j["beta"] = p.beta;
      break;
    case ModelKind::multimodal:
      j["omega"] = p.omega;
      j["alpha_m"] = p.alpha_m;
      j["beta_m"] = p.beta_m;
      break;
    case ModelKind::poisson:
      j["omega"] = p.omega;
      j["alpha_k"] = p.alpha_k;
      break;
    case ModelKind::config:
      j["omega"] = p.omega;
      j["alpha_k"] = p.alpha_k;
      j["phi"] = p.phi;
      break;
    case ModelKind::per_node:
      j["omega"] = p.omega;
      j["phi"] = p.phi;
      j["alpha_ik"] = p.alpha_ik;
      break;
    case ModelKind::edge_types:
      j["omega_types"] = p.omega_types;
      j["alpha_k"] = p.alpha_k;
      break;
  }
  return j;
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

ModelParams params_from_json(const ModelId& model, const json& j) {
  ModelParams p;
  p.network_model = model.network;
  p.data_model = model.data;
  read_opt(j, "omega", p.omega);
  read_opt(j, "alpha", p.alpha);
  read_opt(j, "beta", p.beta);
  read_opt(j, "alpha_k", p.alpha_k);
  read_opt(j, "alpha_m", p.alpha_m);
  read_opt(j, "beta_m", p.beta_m);
  read_opt(j, "phi", p.phi);
  read_opt(j, "alpha_ik", p.alpha_ik);
  read_opt(j, "omega_types", p.omega_types);
  return p;
}

json config_to_json(const EmConfig& c) {
  return json{{"tol", c.tol},         {"max_iter", c.max_iter}, {"restarts", c.restarts},
              {"seed", c.seed},       {"sparse", c.sparse},     {"kmax", c.kmax},
              {"edge_states", c.edge_states}};
}

EmConfig config_from_json(const json& j) {
  EmConfig c;
  read_opt(j, "tol", c.tol);
  read_opt(j, "max_iter", c.max_iter);
  read_opt(j, "restarts", c.restarts);
  read_opt(j, "seed", c.seed);
  read_opt(j, "sparse", c.sparse);
  read_opt(j, "kmax", c.kmax);
  read_opt(j, "edge_states", c.edge_states);
  return c;
}

json nullable(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double from_nullable(const json& j) {
  return j.is_null() ? -std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

TallyFormat parse_tally_format(std::string_view s) {
  if (s == "pairs") return TallyFormat::pairs;
  if (s == "tally") return TallyFormat::tally;
  if (s == "multimodal") return TallyFormat::multimodal;
  throw Error(ErrorKind::invalid_argument,
              fmt::format("unknown format '{}' (expected pairs, tally or multimodal)", s));
}

std::string_view to_string(TallyFormat f) {
  switch (f) {
    case TallyFormat::pairs:
      return "pairs";
    case TallyFormat::tally:
      return "tally";
    case TallyFormat::multimodal:
      return "multimodal";
  }
  return "?";
}

MeasurementTally parse_measurements(std::istream& in, TallyFormat format, bool directed,
                                    std::string_view source) {
  if (format == TallyFormat::multimodal) invalid("use parse_multimodal for multimodal files");
  TallyBuilder builder(directed);
  const std::size_t fields = format == TallyFormat::pairs ? 3 : 4;
  for_each_record(in, source, fields, [&](const std::vector<std::string_view>& f, std::size_t line) {
    std::uint32_t n = 1, e;
    if (format == TallyFormat::pairs) {
      e = static_cast<std::uint32_t>(parse_outcome(f[2], source, line));
    } else {
      n = parse_count(f[2], "N", source, line);
      e = parse_count(f[3], "E", source, line);
      if (e > n) parse_error(source, line, fmt::format("E = {} exceeds N = {}", e, n));
    }
    try {
      builder.add(f[0], f[1], n, e);
    } catch (const Error& err) {
      parse_error(source, line, err.what());
    }
  });
  return builder.build();
}

MeasurementTally parse_measurements(const std::filesystem::path& path, TallyFormat format,
                                    bool directed) {
  auto in = open_in(path);
  return parse_measurements(in, format, directed, path.string());
}

MultimodalTally parse_multimodal(std::istream& in, std::string_view source) {
  NodeIndex nodes;
  std::vector<std::string> modes;
  std::map<std::string, std::size_t, std::less<>> mode_id;
  std::map<NodePair, std::vector<std::array<std::uint32_t, 2>>> acc;
  for_each_record(in, source, 4, [&](const std::vector<std::string_view>& f, std::size_t line) {
    const int outcome = parse_outcome(f[3], source, line);
    if (f[2].empty()) parse_error(source, line, "empty mode label");
    const NodeId i = nodes.intern(f[0]);
    const NodeId j = nodes.intern(f[1]);
    auto it = mode_id.find(f[2]);
    if (it == mode_id.end()) {
      it = mode_id.emplace(std::string(f[2]), modes.size()).first;
      modes.emplace_back(f[2]);
    }
    auto& counts = acc[NodePair{i, j}];
    if (counts.size() <= it->second) counts.resize(it->second + 1, {0, 0});
    counts[it->second][0] += 1;
    counts[it->second][1] += static_cast<std::uint32_t>(outcome);
  });
  std::vector<MultimodalTally::Row> rows;
  for (auto& [pair, counts] : acc) {
    MultimodalTally::Row row{pair, std::vector<std::uint32_t>(modes.size(), 0),
                             std::vector<std::uint32_t>(modes.size(), 0)};
    for (std::size_t m = 0; m < counts.size(); ++m) {
      row.trials[m] = counts[m][0];
      row.positives[m] = counts[m][1];
    }
    rows.push_back(std::move(row));
  }
  return MultimodalTally(std::move(nodes), std::move(modes), std::move(rows));
}

MultimodalTally parse_multimodal(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_multimodal(in, path.string());
}

Dataset read_dataset(const std::filesystem::path& path, TallyFormat format, bool directed) {
  if (format == TallyFormat::multimodal) return parse_multimodal(path);
  return parse_measurements(path, format, directed);
}

std::vector<LabelledPair> parse_labels(const std::filesystem::path& path, const NodeIndex& nodes) {
  auto in = open_in(path);
  const auto source = path.string();
  std::vector<LabelledPair> out;
  for_each_record(in, source, 3, [&](const std::vector<std::string_view>& f, std::size_t line) {
    auto i = nodes.find(f[0]);
    auto j = nodes.find(f[1]);
    if (!i || !j) parse_error(source, line, "pair refers to a node absent from the data");
    try {
      out.push_back({{*i, *j}, parse_certainty(f[2])});
    } catch (const Error& err) {
      parse_error(source, line, err.what());
    }
  });
  return out;
}

void write_tally(std::ostream& out, const MeasurementTally& t) {
  out << (t.directed() ? "# directed tally: i\tj\tN\tE\n" : "# tally: i\tj\tN\tE\n");
  const auto& nodes = t.nodes();
  for (const auto& pc : t.pairs())
    out << nodes.label(pc.pair.i) << '\t' << nodes.label(pc.pair.j) << '\t' << pc.trials << '\t'
        << pc.positives << '\n';
}

void write_multimodal(std::ostream& out, const MultimodalTally& t) {
  out << "# multimodal: i\tj\tmode\t0|1 (edge from j to i)\n";
  const auto& nodes = t.nodes();
  for (const auto& row : t.rows()) {
    for (std::size_t m = 0; m < t.mode_count(); ++m) {
      for (std::uint32_t x = 0; x < row.trials[m]; ++x)
        out << nodes.label(row.pair.i) << '\t' << nodes.label(row.pair.j) << '\t' << t.modes()[m]
            << '\t' << (x < row.positives[m] ? 1 : 0) << '\n';
    }
  }
}

void write_network(std::ostream& out, const Network& a, const NodeIndex& nodes) {
  out << "# i\tj\tA_ij\n";
  for (const auto& e : a.edges())
    out << nodes.label(e.i) << '\t' << nodes.label(e.j) << '\t' << e.multiplicity << '\n';
}

Report make_report(const ModelId& model, const Dataset& data, const FitResult& fit,
                   const Provenance& provenance) {
  const auto kind = model.kind();
  Report r;
  r.model = std::string(model.name());
  r.directed = fit.posterior.directed();
  const auto& nodes = dataset_nodes(data);
  r.nodes.assign(nodes.labels().begin(), nodes.labels().end());
  r.params = fit.params;
  if (kind == ModelKind::multimodal) {
    const auto& t = std::get<MultimodalTally>(data);
    r.modes.assign(t.modes().begin(), t.modes().end());
    for (std::size_t m = 0; m < t.mode_count(); ++m)
      r.fdr.push_back({r.modes[m], false_discovery_rate(fit.params, m)});
  } else if (kind == ModelKind::bernoulli) {
    r.fdr.push_back({"", false_discovery_rate(fit.params, 0)});
  } else if (kind == ModelKind::per_node) {
    const auto& t = std::get<MeasurementTally>(data);
    for (NodeId i = 0; i < t.node_count(); ++i)
      r.precision.push_back(reporter_precision(fit.params, t, i));
  }
  r.mean_degree = mean_degree(fit.posterior);
  r.iterations = fit.iterations;
  r.converged = fit.converged;
  r.restart_index = fit.restart_index;
  r.restart_objectives = fit.restart_objectives;
  r.objective = fit.objective();
  r.diagnostics = fit.diagnostics;
  r.provenance = provenance;
  return r;
}

std::string report_to_json(const Report& r) {
  const auto kind = ModelId::parse(r.model).kind();
  json j;
  j["model"] = r.model;
  j["directed"] = r.directed;
  j["nodes"] = r.nodes;
  if (!r.modes.empty()) j["modes"] = r.modes;
  j["params"] = params_to_json(kind, r.params);

  json derived = json::object();
  if (!r.fdr.empty()) {
    json fdr = json::array();
    for (const auto& f : r.fdr)
      fdr.push_back({{"mode", f.mode}, {"value", f.fdr.value}, {"degenerate", f.fdr.degenerate}});
    derived["fdr"] = fdr;
  }
  if (!r.precision.empty()) {
    json prec = json::array();
    for (const auto& p : r.precision) prec.push_back(p ? json(*p) : json(nullptr));
    derived["precision"] = prec;
  }
  derived["mean_degree"] = {{"mean", r.mean_degree.mean}, {"std", r.mean_degree.std}};
  j["derived"] = derived;

  json restarts = json::array();
  for (double x : r.restart_objectives) restarts.push_back(nullable(x));
  j["fit"] = {{"iterations", r.iterations},
              {"converged", r.converged},
              {"restart_index", r.restart_index},
              {"restart_objectives", restarts},
              {"objective", nullable(r.objective)},
              {"diagnostics", r.diagnostics}};
  j["provenance"] = {{"input", r.provenance.input},
                     {"format", r.provenance.format},
                     {"directed", r.provenance.directed},
                     {"config", config_to_json(r.provenance.config)}};
  return j.dump(2) + "\n";
}

Report report_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, fmt::format("report JSON: {}", e.what()));
  }
  try {
    Report r;
    r.model = j.at("model").get<std::string>();
    const auto model = ModelId::parse(r.model);
    r.directed = j.at("directed").get<bool>();
    r.nodes = j.at("nodes").get<std::vector<std::string>>();
    read_opt(j, "modes", r.modes);
    r.params = params_from_json(model, j.at("params"));
    const auto& d = j.at("derived");
    if (d.contains("fdr"))
      for (const auto& f : d.at("fdr"))
        r.fdr.push_back({f.at("mode").get<std::string>(),
                         {f.at("value").get<double>(), f.at("degenerate").get<bool>()}});
    if (d.contains("precision"))
      for (const auto& p : d.at("precision"))
        r.precision.push_back(p.is_null() ? std::nullopt : std::optional<double>(p.get<double>()));
    r.mean_degree.mean = d.at("mean_degree").at("mean").get<double>();
    r.mean_degree.std = d.at("mean_degree").at("std").get<double>();
    const auto& f = j.at("fit");
    r.iterations = f.at("iterations").get<std::size_t>();
    r.converged = f.at("converged").get<bool>();
    r.restart_index = f.at("restart_index").get<std::size_t>();
    for (const auto& x : f.at("restart_objectives")) r.restart_objectives.push_back(from_nullable(x));
    r.objective = from_nullable(f.at("objective"));
    r.diagnostics = f.at("diagnostics").get<std::vector<std::string>>();
    const auto& p = j.at("provenance");
    r.provenance.input = p.at("input").get<std::string>();
    r.provenance.format = p.at("format").get<std::string>();
    r.provenance.directed = p.at("directed").get<bool>();
    r.provenance.config = config_from_json(p.at("config"));
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, fmt::format("report JSON: {}", e.what()));
  }
}

Report read_report(const std::filesystem::path& path) { return report_from_json(read_file(path)); }

void write_edges(std::ostream& out, const EdgePosterior& post, const NodeIndex& nodes,
                 double q_min) {
  out << "i\tj\tQ\n";
  const auto pairs = post.stored_pairs();
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const double q = distribution_edge_probability(post.stored_distribution(r));
    if (q >= q_min)
      out << nodes.label(pairs[r].i) << '\t' << nodes.label(pairs[r].j) << '\t' << num(q) << '\n';
  }
  const double n = static_cast<double>(post.node_count());
  const double slots = post.directed() ? n * (n - 1.0) : 0.5 * n * (n - 1.0);
  const double unmeasured = slots - static_cast<double>(pairs.size());
  if (unmeasured <= 0.0) return;
  // Implicit pairs: walk every slot, skipping stored rows.
  double sum = 0.0, max = 0.0;
  std::size_t next = 0;
  post.for_each_pair([&](NodeId i, NodeId j, std::span<const double> q) {
    if (next < pairs.size() && pairs[next].i == i && pairs[next].j == j) {
      ++next;
      return;
    }
    const double p = distribution_edge_probability(q);
    sum += p;
    max = std::max(max, p);
  });
  if (max >= q_min)
    out << "# unmeasured\t" << static_cast<std::uint64_t>(unmeasured) << '\t' << num(sum / unmeasured)
        << '\n';
}

void write_trace(std::ostream& out, std::span<const double> trace) {
  out << "iteration\tobjective\n";
  for (std::size_t t = 0; t < trace.size(); ++t) out << t << '\t' << num(trace[t]) << '\n';
}

void write_outputs(const Report& report, const FitResult& fit, const NodeIndex& nodes,
                   const std::filesystem::path& dir, double q_min) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw Error(ErrorKind::io, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  write_file(dir / "params.json", report_to_json(report));
  std::ostringstream edges, trace;
  write_edges(edges, fit.posterior, nodes, q_min);
  write_trace(trace, fit.objective_trace);
  write_file(dir / "edges.tsv", edges.str());
  write_file(dir / "trace.tsv", trace.str());
}

void export_dot(std::ostream& out, const EdgePosterior& post, const ModelParams& params,
                const NodeIndex& nodes, double q_min) {
  const bool directed = post.directed();
  struct Drawn {
    NodeId from, to;
    double q;
  };
  std::vector<Drawn> edges;
  const auto pairs = post.stored_pairs();
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const double q = distribution_edge_probability(post.stored_distribution(r));
    if (q < q_min) continue;
    // A_ij is an edge from j to i.
    if (directed)
      edges.push_back({pairs[r].j, pairs[r].i, q});
    else
      edges.push_back({pairs[r].i, pairs[r].j, q});
  }
  std::vector<bool> keep(post.node_count(), edges.empty());
  for (const auto& e : edges) keep[e.from] = keep[e.to] = true;

  out << (directed ? "digraph" : "graph") << " netrecon {\n";
  out << "  node [shape=circle, fixedsize=true];\n";
  for (NodeId i = 0; i < post.node_count(); ++i) {
    if (!keep[i]) continue;
    out << "  " << dot_quote(nodes.label(i));
    if (!params.phi.empty()) out << fmt::format(" [width={:.6g}]", 0.3 * params.phi[i]);
    out << ";\n";
  }
  const char* arrow = directed ? " -> " : " -- ";
  for (const auto& e : edges)
    out << "  " << dot_quote(nodes.label(e.from)) << arrow << dot_quote(nodes.label(e.to))
        << fmt::format(" [penwidth={:.6g}];\n", 5.0 * e.q);
  out << "}\n";
}

ParamFile parse_param_file(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, fmt::format("parameter JSON: {}", e.what()));
  }
  try {
    ParamFile f;
    f.model = ModelId::parse(j.at("model").get<std::string>());
    f.params = params_from_json(f.model, j.at("params"));
    const json* c = &j;
    if (j.contains("provenance")) c = &j.at("provenance").at("config");
    read_opt(*c, "sparse", f.support.sparse);
    read_opt(*c, "kmax", f.support.kmax);
    return f;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, fmt::format("parameter JSON: {}", e.what()));
  }
}

SynthSpec parse_synth_spec(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, fmt::format("synth spec JSON: {}", e.what()));
  }
  try {
    SynthSpec s;
    s.model = ModelId::parse(j.at("model").get<std::string>());
    s.n = j.at("n").get<std::size_t>();
    read_opt(j, "directed", s.directed);
    read_opt(j, "trials", s.trials);
    read_opt(j, "seed", s.seed);
    read_opt(j, "modes", s.modes);
    s.params = params_from_json(s.model, j.at("params"));
    const auto kind = s.model.kind();
    if ((kind == ModelKind::config || kind == ModelKind::per_node) && s.params.phi.empty())
      s.params.phi.assign(s.n, 1.0);
    // Shared reporter rates may be given once as alpha_k.
    if (kind == ModelKind::per_node && s.params.alpha_ik.empty() && !s.params.alpha_k.empty())
      s.params.alpha_ik.assign(s.n, s.params.alpha_k);
    if (kind == ModelKind::per_node) s.params.alpha_k.clear();
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, fmt::format("synth spec JSON: {}", e.what()));
  }
}

SynthSpec read_synth_spec(const std::filesystem::path& path) {
  return parse_synth_spec(read_file(path));
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, fmt::format("cannot open '{}' for writing", path.string()));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorKind::io, fmt::format("write to '{}' failed", path.string()));
}

}  // namespace netrecon
