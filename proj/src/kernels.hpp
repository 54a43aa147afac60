// SPDX-License-Identifier: Apache-2.0
//
// Log-space per-pair machinery shared by the objective, the E-steps and the
// M-steps. Two families:
//   * signature kernels: the pair posterior depends only on the measurement
//     counts, so pairs with identical counts collapse into one weighted row
//     (Bernoulli, Poisson, multimodal, edge types);
//   * degree kernels: the pair posterior depends on (i, j) through phi and
//     per-node rates, so every pair slot is visited (configuration model,
//     per-node reporters).
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "netrecon/models.hpp"
#include "netrecon/types.hpp"

namespace netrecon::detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// E log p + (N - E) log(1 - p) with 0 * log 0 = 0.
inline double binom_log(std::uint32_t e, std::uint32_t n, double p) {
  double s = 0.0;
  if (e > 0) s += static_cast<double>(e) * std::log(p);
  if (n > e) s += static_cast<double>(n - e) * std::log1p(-p);
  return s;
}

/// log(lambda^k e^-lambda / k!).
inline double poisson_log_weight(double lambda, std::size_t k) {
  if (k == 0) return -lambda;
  return (-lambda + static_cast<double>(k) * std::log(lambda)) -
         std::lgamma(static_cast<double>(k) + 1.0);
}

/// Overwrites v with exp(v - logsumexp(v)) and returns logsumexp(v).
double log_normalize(std::span<double> v);
double log_sum_exp(std::span<const double> v);

struct SignatureRows {
  std::size_t modes = 1;
  std::vector<double> weight;
  std::vector<std::uint32_t> trials;     // rows x modes
  std::vector<std::uint32_t> positives;  // rows x modes
  std::vector<std::uint32_t> row_of_pair;
  double unmeasured = 0.0;  // pair slots with no stored counts

  std::size_t rows() const { return weight.size(); }
};

/// With merge = false every stored pair is its own row of weight 1.
SignatureRows signature_rows(const MeasurementTally& tally, bool merge);
SignatureRows signature_rows(const MultimodalTally& tally, bool merge);

/// Finite mixture over pair states: unnormalised log prior weights per state
/// and per-state, per-mode detection rates.
struct Mixture {
  std::size_t states = 2;
  std::size_t modes = 1;
  std::vector<double> log_weight;  // states
  std::vector<double> rate;        // states x modes
};

/// Mixture for the signature-kernel models (bernoulli, poisson, multimodal,
/// edge_types). State 1 is "edge" for the binary models.
Mixture mixture_for(ModelKind kind, const ModelParams& params, std::size_t states,
                    std::size_t modes);

/// Fills dist (rows x states) and returns sum_rows w log Z + unmeasured log Z0.
double mixture_estep(const SignatureRows& rows, const Mixture& mix, std::vector<double>& dist);

/// Normalised distribution for a pair with no measurements.
std::vector<double> mixture_prior(const Mixture& mix);

/// sum_rows w Q_s per state.
std::vector<double> state_mass(const SignatureRows& rows, std::span<const double> dist,
                               std::size_t states);

/// rate_sm <- sum w Q_s E_m / sum w Q_s N_m. Entries with zero denominator
/// keep their value and are flagged in `held` (states x modes).
void mixture_rates(const SignatureRows& rows, std::span<const double> dist, std::size_t states,
                   std::span<double> rate, std::vector<bool>& held);

/// Undirected pairs (i < j) with counts per direction. For undirected tallies
/// everything sits in the (i, j) direction.
struct DegreeRows {
  std::size_t n = 0;
  std::vector<NodePair> pairs;
  std::vector<std::uint32_t> n_ij, e_ij, n_ji, e_ji;
};

DegreeRows degree_rows(const MeasurementTally& tally);

struct DegreeModel {
  double omega = 0.0;
  std::span<const double> phi;  // empty means all ones
  std::size_t states = 2;
  std::span<const double> rate;  // states, or n x states when per_node
  bool per_node = false;
};

struct DegreeSweep {
  double objective = 0.0;
  std::vector<double> degree;  // sum_j Ahat_ij
  std::vector<double> num;     // rate numerators, same layout as DegreeModel::rate
  std::vector<double> den;
  std::vector<double> dist;  // stored rows x states, only when requested
};

/// One pass over all C(n,2) pair slots.
DegreeSweep degree_sweep(const DegreeRows& rows, const DegreeModel& model, bool keep_dist);

/// Rates clamped to this interval after each M-step keep the logs finite.
inline constexpr double kRateFloor = 1e-12;
inline double clamp_rate(double p) {
  return p < kRateFloor ? kRateFloor : (p > 1.0 - kRateFloor ? 1.0 - kRateFloor : p);
}

}  // namespace netrecon::detail
