// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netrecon/models.hpp"
#include "netrecon/types.hpp"

namespace netrecon {

struct EmConfig {
  double tol = 1e-8;           // max absolute parameter change
  std::size_t max_iter = 10000;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  bool sparse = true;          // multigraph models: k in {0, 1}
  std::size_t kmax = 3;        // exact mode only
  std::size_t edge_states = 3; // edge_types model

  Support support() const { return {sparse, kmax}; }
  bool operator==(const EmConfig&) const = default;
  void validate() const;
};

/// Updated parameters plus notes on anything held at its previous value.
struct MStep {
  ModelParams params;
  std::vector<std::string> held;
};

/// Posterior and log objective at fixed parameters.
struct EStep {
  EdgePosterior posterior;
  double objective = 0.0;
};

EStep posterior_at(const ModelId& model, const Dataset& data, const ModelParams& params,
                   const Support& support = {});

EdgePosterior estep_bernoulli(const ModelParams& params, const MeasurementTally& tally);
MStep mstep_bernoulli(const EdgePosterior& posterior, const MeasurementTally& tally,
                      const ModelParams& previous);

EdgePosterior estep_poisson(const ModelParams& params, const MeasurementTally& tally,
                            const Support& support = {});
MStep mstep_poisson(const EdgePosterior& posterior, const MeasurementTally& tally,
                    const ModelParams& previous);

EdgePosterior estep_config(const ModelParams& params, const MeasurementTally& tally,
                           const Support& support = {});
MStep mstep_config(const EdgePosterior& posterior, const MeasurementTally& tally,
                   const ModelParams& previous);

EdgePosterior estep_multimodal(const ModelParams& params, const MultimodalTally& tally);
MStep mstep_multimodal(const EdgePosterior& posterior, const MultimodalTally& tally,
                       const ModelParams& previous);

EdgePosterior estep_pernode(const ModelParams& params, const MeasurementTally& tally,
                            const Support& support = {});
MStep mstep_pernode(const EdgePosterior& posterior, const MeasurementTally& tally,
                    const ModelParams& previous);

/// K-state edge model; K comes from start->omega_types when given, otherwise
/// from config.edge_states.
FitResult em_edge_types(const MeasurementTally& tally, const EmConfig& config,
                        const ModelParams* start = nullptr);

/// Random restarts, or a single run from `start` when it is non-null.
FitResult run_em(const ModelId& model, const Dataset& data, const EmConfig& config,
                 const ModelParams* start = nullptr);

/// Random starting point for restart r (deterministic in seed and r).
ModelParams initial_params(const ModelId& model, const Dataset& data, const EmConfig& config,
                           std::size_t restart);

/// Max absolute difference over every scalar, rate vector and phi.
double param_distance(const ModelParams& a, const ModelParams& b);

}  // namespace netrecon
