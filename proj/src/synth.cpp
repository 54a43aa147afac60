// SPDX-License-Identifier: Apache-2.0
#include "netrecon/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <random>

#include "kernels.hpp"

namespace netrecon {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::invalid_argument, msg); }

bool multigraph(ModelKind k) {
  return k == ModelKind::poisson || k == ModelKind::config || k == ModelKind::per_node;
}

double phi_of(const ModelParams& p, NodeId i) { return p.phi.empty() ? 1.0 : p.phi[i]; }

std::uint32_t binomial(std::mt19937_64& rng, std::uint32_t n, double p) {
  return static_cast<std::uint32_t>(std::binomial_distribution<std::uint32_t>(n, p)(rng));
}

double rate_for(const std::vector<double>& rates, std::uint32_t k) {
  return rates.at(std::min<std::size_t>(k, rates.size() - 1));
}

std::vector<NodePair> slots(std::size_t n, bool directed) {
  std::vector<NodePair> out;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = directed ? 0 : i + 1; j < n; ++j)
      if (i != j) out.push_back({i, j});
  return out;
}

}  // namespace

void SynthSpec::validate() const {
  const auto kind = model.kind();
  if (trials < 1) invalid("synthetic spec needs at least one trial per pair");
  if (params.network_model != model.network || params.data_model != model.data)
    invalid("synthetic parameters do not match the model");
  params.validate();
  if (kind == ModelKind::bernoulli || kind == ModelKind::multimodal)
    if (params.omega > 1.0) invalid("edge probability above 1");
  if (kind == ModelKind::multimodal) {
    if (params.alpha_m.empty() || params.alpha_m.size() != params.beta_m.size())
      invalid("multimodal spec needs matching alpha_m and beta_m");
    if (!modes.empty() && modes.size() != params.alpha_m.size())
      invalid("mode labels do not match the mode rates");
  }
  if ((kind == ModelKind::config || kind == ModelKind::per_node) && params.phi.size() != n)
    invalid("phi must have one entry per node");
  if (kind == ModelKind::per_node && params.alpha_ik.size() != n)
    invalid("alpha_ik must have one row per node");
  if ((kind == ModelKind::poisson || kind == ModelKind::config || kind == ModelKind::edge_types) &&
      params.alpha_k.empty())
    invalid("alpha_k must not be empty");
  if (kind == ModelKind::edge_types && params.alpha_k.size() != params.omega_types.size())
    invalid("edge-type spec needs one alpha per state");
}

Network generate_network(const SynthSpec& spec) {
  spec.validate();
  const auto kind = spec.model.kind();
  const auto& p = spec.params;
  const bool directed = kind == ModelKind::multimodal || (kind == ModelKind::bernoulli && spec.directed);
  std::mt19937_64 rng(spec.seed);
  std::vector<Network::Edge> edges;

  if (multigraph(kind)) {
    for (NodeId i = 0; i < spec.n; ++i) {
      for (NodeId j = i; j < spec.n; ++j) {
        const double f = phi_of(p, i) * phi_of(p, j);
        const double lambda = i == j ? 0.5 * p.omega * f : p.omega * f;
        if (lambda <= 0.0) continue;
        auto k = static_cast<std::uint32_t>(std::poisson_distribution<std::uint64_t>(lambda)(rng));
        if (i == j) k *= 2;
        if (k > 0) edges.push_back({i, j, k});
      }
    }
    return Network(spec.n, false, std::move(edges));
  }

  if (kind == ModelKind::edge_types) {
    std::discrete_distribution<std::uint32_t> state(p.omega_types.begin(), p.omega_types.end());
    for (const auto& s : slots(spec.n, false)) {
      const auto k = state(rng);
      if (k > 0) edges.push_back({s.i, s.j, k});
    }
    return Network(spec.n, false, std::move(edges));
  }

  std::bernoulli_distribution edge(p.omega);
  for (const auto& s : slots(spec.n, directed))
    if (edge(rng)) edges.push_back({s.i, s.j, 1});
  return Network(spec.n, directed, std::move(edges));
}

Dataset generate_observations(const Network& a, const SynthSpec& spec) {
  spec.validate();
  const auto kind = spec.model.kind();
  const auto& p = spec.params;
  if (a.node_count() != spec.n) invalid("network size does not match the spec");
  // Offset so that observations are not correlated with the network draw.
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  const auto N = spec.trials;
  auto nodes = NodeIndex::numbered(spec.n);

  if (kind == ModelKind::multimodal) {
    if (!a.directed()) invalid("multimodal observations need a directed network");
    const auto M = p.alpha_m.size();
    std::vector<std::string> modes = spec.modes;
    if (modes.empty())
      for (std::size_t m = 0; m < M; ++m) modes.push_back(fmt::format("m{}", m));
    std::vector<MultimodalTally::Row> rows;
    for (const auto& s : slots(spec.n, true)) {
      const bool edge = a.at(s.i, s.j) > 0;
      MultimodalTally::Row row{s, std::vector<std::uint32_t>(M, N), {}};
      for (std::size_t m = 0; m < M; ++m)
        row.positives.push_back(binomial(rng, N, edge ? p.alpha_m[m] : p.beta_m[m]));
      rows.push_back(std::move(row));
    }
    return MultimodalTally(std::move(nodes), std::move(modes), std::move(rows));
  }

  std::vector<PairCounts> pairs;
  if (kind == ModelKind::per_node) {
    for (const auto& s : slots(spec.n, true)) {
      const auto k = a.at(s.i, s.j);
      pairs.push_back({s, N, binomial(rng, N, rate_for(p.alpha_ik[s.i], k))});
    }
    return MeasurementTally(std::move(nodes), true, std::move(pairs));
  }

  const bool directed = a.directed();
  for (const auto& s : slots(spec.n, directed)) {
    const auto k = a.at(s.i, s.j);
    double rate;
    if (kind == ModelKind::bernoulli) {
      if (k > 1) invalid("Bernoulli observations need a simple network");
      rate = k ? p.alpha : p.beta;
    } else {
      rate = rate_for(p.alpha_k, k);
    }
    pairs.push_back({s, N, binomial(rng, N, rate)});
  }
  return MeasurementTally(std::move(nodes), directed, std::move(pairs));
}

std::span<const double> BruteForce::distribution(NodeId i, NodeId j) const {
  if (!directed && i > j) std::swap(i, j);
  auto it = std::lower_bound(pairs.begin(), pairs.end(), NodePair{i, j});
  if (it == pairs.end() || *it != NodePair{i, j}) invalid("pair not in the enumeration");
  const auto r = static_cast<std::size_t>(it - pairs.begin());
  return {dist.data() + r * states, states};
}

double BruteForce::edge_probability(NodeId i, NodeId j) const {
  return distribution_edge_probability(distribution(i, j));
}

BruteForce brute_force_posterior(const Dataset& data, const ModelParams& params,
                                 const ModelId& model, const Support& support) {
  const auto kind = model.kind();
  check_params(model, data, params, support);
  BruteForce out;
  out.n = dataset_nodes(data).size();
  out.directed = kind == ModelKind::multimodal ||
                 (kind == ModelKind::bernoulli && std::get<MeasurementTally>(data).directed());
  out.states = kind == ModelKind::edge_types
                   ? params.omega_types.size()
                   : (multigraph(kind) ? support.states() : 2);
  out.pairs = slots(out.n, out.directed);
  const auto P = out.pairs.size();
  const auto S = out.states;

  double count = 1.0;
  for (std::size_t x = 0; x < P; ++x) count *= static_cast<double>(S);
  if (count > static_cast<double>(kBruteForceLimit))
    throw Error(ErrorKind::too_large,
                fmt::format("{} networks to enumerate (limit {})", count, kBruteForceLimit));
  out.networks = static_cast<std::size_t>(count);

  std::vector<double> lp(out.networks);
  std::vector<std::uint32_t> digit(P, 0);
  for (std::size_t g = 0; g < out.networks; ++g) {
    std::vector<Network::Edge> edges;
    for (std::size_t x = 0; x < P; ++x)
      if (digit[x]) edges.push_back({out.pairs[x].i, out.pairs[x].j, digit[x]});
    Network a(out.n, out.directed, std::move(edges));
    lp[g] = log_prior(model, a, params) + log_likelihood(model, data, a, params);
    for (std::size_t x = 0; x < P; ++x) {
      if (++digit[x] < S) break;
      digit[x] = 0;
    }
  }
  out.log_evidence = detail::log_sum_exp(lp);
  out.dist.assign(P * S, 0.0);
  std::fill(digit.begin(), digit.end(), 0);
  for (std::size_t g = 0; g < out.networks; ++g) {
    const double w = std::exp(lp[g] - out.log_evidence);
    for (std::size_t x = 0; x < P; ++x) out.dist[x * S + digit[x]] += w;
    for (std::size_t x = 0; x < P; ++x) {
      if (++digit[x] < S) break;
      digit[x] = 0;
    }
  }
  return out;
}

double brute_force_log_probability(const Dataset& data, const ModelParams& params,
                                   const ModelId& model, const Network& network,
                                   const Support& support) {
  const auto bf = brute_force_posterior(data, params, model, support);
  return log_prior(model, network, params) + log_likelihood(model, data, network, params) -
         bf.log_evidence;
}

}  // namespace netrecon
