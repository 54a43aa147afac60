// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netrecon/models.hpp"
#include "netrecon/types.hpp"

namespace netrecon {

struct SynthSpec {
  ModelId model;
  std::size_t n = 0;
  bool directed = false;  // Bernoulli only; multimodal is always directed
  ModelParams params;
  std::uint32_t trials = 1;  // per pair, per mode, per direction
  std::uint64_t seed = 0;
  std::vector<std::string> modes;  // multimodal labels; defaults to "m0", "m1", ...

  void validate() const;
};

/// Ground truth drawn from the network model. Multigraph models include
/// self-edges (A_ii = 2 x count).
Network generate_network(const SynthSpec& spec);

/// Dense observations: every off-diagonal pair slot is measured `trials`
/// times (per mode / per direction). Multiplicities beyond the last alpha_k
/// entry use that entry.
Dataset generate_observations(const Network& network, const SynthSpec& spec);

/// Exact posterior by enumeration over every network on the E-step support.
struct BruteForce {
  std::size_t n = 0;
  bool directed = false;
  std::size_t states = 2;
  std::vector<NodePair> pairs;  // every off-diagonal slot, lexicographic
  std::vector<double> dist;     // pairs x states
  double log_evidence = 0.0;
  std::size_t networks = 0;

  std::span<const double> distribution(NodeId i, NodeId j) const;
  double edge_probability(NodeId i, NodeId j) const;
};

inline constexpr std::size_t kBruteForceLimit = std::size_t{1} << 20;

/// Throws Error(too_large) when the enumeration exceeds kBruteForceLimit networks.
BruteForce brute_force_posterior(const Dataset& data, const ModelParams& params,
                                 const ModelId& model, const Support& support = {});

/// log P(A | D) under the exact posterior.
double brute_force_log_probability(const Dataset& data, const ModelParams& params,
                                   const ModelId& model, const Network& network,
                                   const Support& support = {});

}  // namespace netrecon
