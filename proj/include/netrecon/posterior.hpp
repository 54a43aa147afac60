// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>

#include "netrecon/types.hpp"

namespace netrecon {

struct FunctionalEstimate {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n_samples = 0;  // 0 for closed forms
  std::size_t skipped = 0;    // samples on which the functional threw

  bool operator==(const FunctionalEstimate&) const = default;
};

/// Closed-form posterior mean and standard deviation of the average degree.
/// Directed posteriors report the mean out-degree. Edge-state posteriors
/// count a pair as connected when its state is nonzero.
FunctionalEstimate mean_degree(const EdgePosterior& posterior);

/// Sum_ij A_ij / n (ordered pairs); with presence_only every nonzero entry counts once.
double average_degree(const Network& network, bool presence_only = false);

using NetworkFunctional = std::function<double(const Network&)>;

/// Monte Carlo mean and sample standard deviation over independent draws.
FunctionalEstimate estimate_functional(const EdgePosterior& posterior, const NetworkFunctional& f,
                                       std::size_t n_samples, std::uint64_t seed);

Network sample_network(const EdgePosterior& posterior, std::uint64_t seed);
Network sample_network(const EdgePosterior& posterior, std::mt19937_64& rng);

/// Simple network with an edge wherever P(A_ij > 0) > threshold.
Network map_network(const EdgePosterior& posterior, double threshold = 0.5);

enum class Certainty { low, medium, high };

/// high: q > hi, low: q < lo, medium otherwise.
Certainty certainty_band(double q, double hi = 0.9, double lo = 0.1);
std::string_view to_string(Certainty c);
Certainty parse_certainty(std::string_view s);

struct LabelledPair {
  NodePair pair;
  Certainty label = Certainty::low;
};

/// Fraction of labelled pairs whose posterior band matches the label.
double band_agreement(const EdgePosterior& posterior, std::span<const LabelledPair> labels,
                      double hi = 0.9, double lo = 0.1);

struct Rate {
  double value = 0.0;
  bool degenerate = false;  // zero denominator

  bool operator==(const Rate&) const = default;
};

/// (1 - omega) beta_m / (omega alpha_m + (1 - omega) beta_m) for a
/// multimodal (or, with mode 0, Bernoulli) fit.
Rate false_discovery_rate(const ModelParams& params, std::size_t mode);

/// Average of omega phi_i phi_j a / (omega phi_i phi_j a + b) over the pairs
/// node i reports (E_ij >= 1), with a = alpha_i1, b = alpha_i0. nullopt when
/// i reports nobody.
std::optional<double> reporter_precision(const ModelParams& params, const MeasurementTally& tally,
                                         NodeId i);

/// Average degree of the network keeping pairs with E_ij >= min_positive.
double threshold_mean_degree(const MeasurementTally& tally, std::uint32_t min_positive);

}  // namespace netrecon
