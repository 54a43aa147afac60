// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string_view>

#include "netrecon/types.hpp"

namespace netrecon {

/// The supported network-model x data-model combinations.
enum class ModelKind { bernoulli, poisson, config, multimodal, per_node, edge_types };

struct ModelId {
  NetworkModel network = NetworkModel::bernoulli_rg;
  DataModel data = DataModel::independent;

  static ModelId of(ModelKind kind);
  /// Accepts the short names "bernoulli", "poisson", "config", "multimodal",
  /// "per_node", "edge_types".
  static ModelId parse(std::string_view name);

  /// Throws Error(unsupported) for combinations outside the supported set.
  ModelKind kind() const;
  std::string_view name() const;

  bool operator==(const ModelId&) const = default;
};

/// Which multiplicities the Poisson-family posteriors carry: k in {0, 1}
/// (sparse) or k in [0, kmax] (exact).
struct Support {
  bool sparse = true;
  std::size_t kmax = 3;

  std::size_t states() const { return sparse ? 2 : kmax + 1; }
};

/// log P(A | network parameters). Self-edges of multigraph models follow the
/// A_ii = 2 x count convention. Returns -inf for impossible networks.
double log_prior(const ModelId& model, const Network& network, const ModelParams& params);

/// log P(D | A, data parameters), summed over measured pairs (and modes).
double log_likelihood(const ModelId& model, const Dataset& data, const Network& network,
                      const ModelParams& params);

/// log sum_A P(D | A) P(A), evaluated pair by pair through the factorised
/// posterior. For the multigraph models the sum runs over the support selected
/// by `support`, with self-edges held at zero.
double log_posterior_objective(const ModelId& model, const Dataset& data, const ModelParams& params,
                               const Support& support = {});

/// Checks that params carry every field the model needs with matching sizes.
void check_params(const ModelId& model, const Dataset& data, const ModelParams& params,
                  const Support& support = {});

}  // namespace netrecon
