// SPDX-License-Identifier: Apache-2.0
#include "netrecon/models.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numeric>

#include "kernels.hpp"

namespace netrecon {

namespace {

using detail::binom_log;
using detail::kNegInf;

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::invalid_argument, msg); }

struct Named {
  ModelKind kind;
  std::string_view name;
  NetworkModel network;
  DataModel data;
};

constexpr Named kModels[] = {
    {ModelKind::bernoulli, "bernoulli", NetworkModel::bernoulli_rg, DataModel::independent},
    {ModelKind::poisson, "poisson", NetworkModel::poisson_rg, DataModel::multiedge},
    {ModelKind::config, "config", NetworkModel::config_model, DataModel::multiedge},
    {ModelKind::multimodal, "multimodal", NetworkModel::bernoulli_rg, DataModel::multimodal},
    {ModelKind::per_node, "per_node", NetworkModel::config_model, DataModel::per_node},
    {ModelKind::edge_types, "edge_types", NetworkModel::edge_types, DataModel::edge_types},
};

// x log p with 0 log 0 = 0.
double xlogy(double x, double p) { return x == 0.0 ? 0.0 : x * std::log(p); }

double log_factorial(double k) { return std::lgamma(k + 1.0); }

double phi_of(const ModelParams& p, NodeId i) { return p.phi.empty() ? 1.0 : p.phi[i]; }

double rate_at(const std::vector<double>& rates, std::uint32_t k, const char* what) {
  if (k >= rates.size())
    invalid(fmt::format("A_ij = {} has no {} entry (only {} given)", k, what, rates.size()));
  return rates[k];
}

void require_undirected_multigraph(const Network& a) {
  if (a.directed()) invalid("multigraph models need an undirected network");
}

void require_simple(const Network& a) {
  if (!a.is_simple()) invalid("model needs a simple network (A_ij in {0,1}, no self-edges)");
}

double bernoulli_prior(const Network& a, double omega) {
  const double n = static_cast<double>(a.node_count());
  const double slots = a.directed() ? n * (n - 1.0) : 0.5 * n * (n - 1.0);
  const double m = static_cast<double>(a.edges().size());
  return xlogy(m, omega) + (slots - m == 0.0 ? 0.0 : (slots - m) * std::log1p(-omega));
}

// Degree-corrected Poisson multigraph prior; phi empty gives the plain
// Poisson random graph.
double poisson_prior(const Network& a, const ModelParams& p) {
  const auto n = a.node_count();
  double s = 0.0;
  for (const auto& e : a.edges()) {
    const double k = e.multiplicity;
    if (e.i == e.j) {
      const double lambda = 0.5 * p.omega * phi_of(p, e.i) * phi_of(p, e.i);
      const double r = 0.5 * k;
      s += xlogy(r, lambda) - log_factorial(r);
    } else {
      const double lambda = p.omega * phi_of(p, e.i) * phi_of(p, e.j);
      s += xlogy(k, lambda) - log_factorial(k);
    }
  }
  double phi_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) phi_sum += phi_of(p, static_cast<NodeId>(i));
  return s - 0.5 * p.omega * phi_sum * phi_sum;
}

double edge_type_prior(const Network& a, const ModelParams& p) {
  const double n = static_cast<double>(a.node_count());
  std::vector<double> count(p.omega_types.size(), 0.0);
  for (const auto& e : a.edges()) {
    if (e.i == e.j) invalid("edge-type networks carry no self-edges");
    rate_at(p.omega_types, e.multiplicity, "omega_types");
    count[e.multiplicity] += 1.0;
  }
  count[0] = 0.5 * n * (n - 1.0) - std::accumulate(count.begin() + 1, count.end(), 0.0);
  double s = 0.0;
  for (std::size_t k = 0; k < count.size(); ++k) s += xlogy(count[k], p.omega_types[k]);
  return s;
}

const MeasurementTally& single_tally(const Dataset& data) {
  if (const auto* t = std::get_if<MeasurementTally>(&data)) return *t;
  invalid("model needs a single-mode measurement tally");
}

const MultimodalTally& multimodal_tally(const Dataset& data) {
  if (const auto* t = std::get_if<MultimodalTally>(&data)) return *t;
  invalid("multimodal model needs a multimodal tally");
}

}  // namespace

ModelId ModelId::of(ModelKind kind) {
  for (const auto& m : kModels)
    if (m.kind == kind) return {m.network, m.data};
  throw Error(ErrorKind::unsupported, "unknown model kind");
}

ModelId ModelId::parse(std::string_view name) {
  for (const auto& m : kModels)
    if (m.name == name) return {m.network, m.data};
  throw Error(ErrorKind::unsupported,
              fmt::format("unknown model '{}' (expected bernoulli, poisson, config, multimodal, "
                          "per_node or edge_types)",
                          name));
}

ModelKind ModelId::kind() const {
  for (const auto& m : kModels)
    if (m.network == network && m.data == data) return m.kind;
  throw Error(ErrorKind::unsupported, fmt::format("unsupported combination {} x {}",
                                                  to_string(network), to_string(data)));
}

std::string_view ModelId::name() const {
  const auto k = kind();
  for (const auto& m : kModels)
    if (m.kind == k) return m.name;
  return "?";
}

void check_params(const ModelId& model, const Dataset& data, const ModelParams& p,
                  const Support& support) {
  const auto kind = model.kind();
  if (p.network_model != model.network || p.data_model != model.data)
    invalid(fmt::format("parameters are for {} x {}, model is {}", to_string(p.network_model),
                        to_string(p.data_model), model.name()));
  p.validate();
  const auto n = dataset_nodes(data).size();
  const auto states = support.states();
  switch (kind) {
    case ModelKind::bernoulli:
      single_tally(data);
      break;
    case ModelKind::multimodal: {
      const auto& t = multimodal_tally(data);
      if (p.alpha_m.size() != t.mode_count())
        invalid(fmt::format("{} mode rates for {} modes", p.alpha_m.size(), t.mode_count()));
      break;
    }
    case ModelKind::poisson:
    case ModelKind::config: {
      if (single_tally(data).directed()) invalid("multiedge data model needs an undirected tally");
      if (p.alpha_k.size() < states)
        invalid(fmt::format("alpha_k has {} entries, support needs {}", p.alpha_k.size(), states));
      if (kind == ModelKind::config && p.phi.size() != n)
        invalid(fmt::format("phi has {} entries for {} nodes", p.phi.size(), n));
      break;
    }
    case ModelKind::per_node: {
      if (!single_tally(data).directed()) invalid("per-node data model needs a directed tally");
      if (p.phi.size() != n) invalid(fmt::format("phi has {} entries for {} nodes", p.phi.size(), n));
      if (p.alpha_ik.size() != n)
        invalid(fmt::format("alpha_ik has {} rows for {} nodes", p.alpha_ik.size(), n));
      for (const auto& row : p.alpha_ik)
        if (row.size() < states) invalid("alpha_ik rows shorter than the support");
      break;
    }
    case ModelKind::edge_types: {
      if (single_tally(data).directed()) invalid("edge-type model needs an undirected tally");
      if (p.omega_types.size() < 2) invalid("edge-type model needs at least two states");
      if (p.alpha_k.size() != p.omega_types.size())
        invalid("edge-type model needs one alpha per state");
      break;
    }
  }
}

double log_prior(const ModelId& model, const Network& a, const ModelParams& p) {
  switch (model.kind()) {
    case ModelKind::bernoulli:
      require_simple(a);
      return bernoulli_prior(a, p.omega);
    case ModelKind::multimodal:
      if (!a.directed()) invalid("multimodal model needs a directed network");
      require_simple(a);
      return bernoulli_prior(a, p.omega);
    case ModelKind::poisson: {
      require_undirected_multigraph(a);
      ModelParams plain = p;
      plain.phi.clear();
      return poisson_prior(a, plain);
    }
    case ModelKind::config:
    case ModelKind::per_node:
      require_undirected_multigraph(a);
      if (p.phi.size() != a.node_count()) invalid("phi size does not match the network");
      return poisson_prior(a, p);
    case ModelKind::edge_types:
      if (a.directed()) invalid("edge-type model needs an undirected network");
      return edge_type_prior(a, p);
  }
  return kNegInf;
}

double log_likelihood(const ModelId& model, const Dataset& data, const Network& a,
                      const ModelParams& p) {
  const auto kind = model.kind();
  if (dataset_nodes(data).size() != a.node_count()) invalid("data and network differ in node count");
  double s = 0.0;
  switch (kind) {
    case ModelKind::bernoulli: {
      const auto& t = single_tally(data);
      if (t.directed() != a.directed()) invalid("data and network differ in directedness");
      for (const auto& pc : t.pairs()) {
        const auto k = a.at(pc.pair.i, pc.pair.j);
        if (k > 1) invalid("Bernoulli model needs a simple network");
        s += binom_log(pc.positives, pc.trials, k ? p.alpha : p.beta);
      }
      return s;
    }
    case ModelKind::multimodal: {
      const auto& t = multimodal_tally(data);
      if (!a.directed()) invalid("multimodal model needs a directed network");
      for (const auto& row : t.rows()) {
        const auto k = a.at(row.pair.i, row.pair.j);
        for (std::size_t m = 0; m < t.mode_count(); ++m)
          s += binom_log(row.positives[m], row.trials[m], k ? p.alpha_m[m] : p.beta_m[m]);
      }
      return s;
    }
    case ModelKind::poisson:
    case ModelKind::config:
    case ModelKind::edge_types: {
      const auto& t = single_tally(data);
      if (t.directed() || a.directed()) invalid("model needs undirected data and network");
      for (const auto& pc : t.pairs())
        s += binom_log(pc.positives, pc.trials,
                       rate_at(p.alpha_k, a.at(pc.pair.i, pc.pair.j), "alpha_k"));
      return s;
    }
    case ModelKind::per_node: {
      const auto& t = single_tally(data);
      if (!t.directed() || a.directed())
        invalid("per-node model needs directed data and an undirected network");
      for (const auto& pc : t.pairs()) {
        const auto k = a.at(pc.pair.i, pc.pair.j);
        s += binom_log(pc.positives, pc.trials, rate_at(p.alpha_ik.at(pc.pair.i), k, "alpha_ik"));
      }
      return s;
    }
  }
  return s;
}

double log_posterior_objective(const ModelId& model, const Dataset& data, const ModelParams& p,
                               const Support& support) {
  check_params(model, data, p, support);
  const auto kind = model.kind();
  std::vector<double> dist;
  switch (kind) {
    case ModelKind::bernoulli: {
      auto rows = detail::signature_rows(single_tally(data), true);
      return detail::mixture_estep(rows, detail::mixture_for(kind, p, 2, 1), dist);
    }
    case ModelKind::multimodal: {
      const auto& t = multimodal_tally(data);
      auto rows = detail::signature_rows(t, true);
      return detail::mixture_estep(rows, detail::mixture_for(kind, p, 2, t.mode_count()), dist);
    }
    case ModelKind::edge_types: {
      auto rows = detail::signature_rows(single_tally(data), true);
      return detail::mixture_estep(rows, detail::mixture_for(kind, p, p.omega_types.size(), 1),
                                   dist);
    }
    case ModelKind::poisson: {
      const auto& t = single_tally(data);
      auto rows = detail::signature_rows(t, true);
      const double self = -0.5 * p.omega * static_cast<double>(t.node_count());
      return detail::mixture_estep(rows, detail::mixture_for(kind, p, support.states(), 1), dist) +
             self;
    }
    case ModelKind::config:
    case ModelKind::per_node: {
      const auto& t = single_tally(data);
      const auto S = support.states();
      std::vector<double> rate;
      if (kind == ModelKind::config) {
        rate.assign(p.alpha_k.begin(), p.alpha_k.begin() + static_cast<std::ptrdiff_t>(S));
      } else {
        for (const auto& row : p.alpha_ik)
          rate.insert(rate.end(), row.begin(), row.begin() + static_cast<std::ptrdiff_t>(S));
      }
      detail::DegreeModel dm{p.omega, p.phi, S, rate, kind == ModelKind::per_node};
      return detail::degree_sweep(detail::degree_rows(t), dm, false).objective;
    }
  }
  return kNegInf;
}

}  // namespace netrecon
