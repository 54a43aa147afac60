// SPDX-License-Identifier: Apache-2.0
// Scalar reference formulas written directly from the model definitions, plus
// small random-instance builders shared by the test binaries.
#pragma once

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "netrecon/em.hpp"
#include "netrecon/models.hpp"
#include "netrecon/types.hpp"

namespace ref {

inline double binom(double e, double n, double p) {
  return std::pow(p, e) * std::pow(1.0 - p, n - e);
}

inline double factorial(int k) {
  double f = 1.0;
  for (int x = 2; x <= k; ++x) f *= x;
  return f;
}

// Q = w a^E (1-a)^(N-E) / (w a^E (1-a)^(N-E) + (1-w) b^E (1-b)^(N-E)).
inline double bernoulli_q(double w, double a, double b, int n, int e) {
  const double x = w * binom(e, n, a);
  const double y = (1.0 - w) * binom(e, n, b);
  return x / (x + y);
}

// Q(k) proportional to lambda^k / k! alpha_k^E (1 - alpha_k)^(N-E), k < states.
inline std::vector<double> multiplicity_q(double lambda, const std::vector<double>& alpha, int n,
                                          int e, std::size_t states) {
  std::vector<double> q(states);
  for (std::size_t k = 0; k < states; ++k)
    q[k] = std::pow(lambda, static_cast<double>(k)) / factorial(static_cast<int>(k)) *
           binom(e, n, alpha[k]);
  const double z = std::accumulate(q.begin(), q.end(), 0.0);
  for (auto& v : q) v /= z;
  return q;
}

// Unnormalised pair sum for the multiplicity models: sum_k lambda^k e^-lambda / k! like_k.
inline double multiplicity_evidence(double lambda, const std::vector<double>& alpha, int n, int e,
                                    std::size_t states) {
  double s = 0.0;
  for (std::size_t k = 0; k < states; ++k)
    s += std::pow(lambda, static_cast<double>(k)) * std::exp(-lambda) /
         factorial(static_cast<int>(k)) * binom(e, n, alpha[k]);
  return s;
}

}  // namespace ref

namespace fixture {

using namespace netrecon;

inline ModelParams params_for(ModelKind kind) {
  const auto id = ModelId::of(kind);
  ModelParams p;
  p.network_model = id.network;
  p.data_model = id.data;
  return p;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Random counts on a random subset of pair slots (N up to max_trials).
inline MeasurementTally random_tally(std::mt19937_64& rng, std::size_t n, bool directed,
                                     std::uint32_t max_trials, double fill = 1.0) {
  std::vector<PairCounts> pairs;
  std::uniform_int_distribution<std::uint32_t> trials(0, max_trials);
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = directed ? 0 : i + 1; j < n; ++j) {
      if (i == j || uniform(rng, 0, 1) >= fill) continue;
      const auto t = trials(rng);
      const auto e = std::uniform_int_distribution<std::uint32_t>(0, t)(rng);
      pairs.push_back({{i, j}, t, e});
    }
  return MeasurementTally(NodeIndex::numbered(n), directed, std::move(pairs));
}

inline MultimodalTally random_multimodal(std::mt19937_64& rng, std::size_t n, std::size_t modes,
                                         std::uint32_t max_trials, double fill = 1.0) {
  std::vector<MultimodalTally::Row> rows;
  std::uniform_int_distribution<std::uint32_t> trials(0, max_trials);
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = 0; j < n; ++j) {
      if (i == j || uniform(rng, 0, 1) >= fill) continue;
      MultimodalTally::Row row{{i, j}, {}, {}};
      for (std::size_t m = 0; m < modes; ++m) {
        const auto t = trials(rng);
        row.trials.push_back(t);
        row.positives.push_back(std::uniform_int_distribution<std::uint32_t>(0, t)(rng));
      }
      rows.push_back(std::move(row));
    }
  std::vector<std::string> labels;
  for (std::size_t m = 0; m < modes; ++m) labels.push_back("m" + std::to_string(m));
  return MultimodalTally(NodeIndex::numbered(n), std::move(labels), std::move(rows));
}

inline std::vector<double> random_phi(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> phi(n);
  for (auto& p : phi) p = uniform(rng, 0.3, 2.0);
  const double mean = std::accumulate(phi.begin(), phi.end(), 0.0) / static_cast<double>(n);
  for (auto& p : phi) p /= mean;
  return phi;
}

// Random valid parameters for any model.
inline ModelParams random_params(std::mt19937_64& rng, ModelKind kind, std::size_t n,
                                 std::size_t states, std::size_t modes = 1) {
  auto p = params_for(kind);
  switch (kind) {
    case ModelKind::bernoulli:
      p.omega = uniform(rng, 0.05, 0.6);
      p.alpha = uniform(rng, 0.5, 0.95);
      p.beta = uniform(rng, 0.01, 0.3);
      break;
    case ModelKind::multimodal:
      p.omega = uniform(rng, 0.05, 0.6);
      for (std::size_t m = 0; m < modes; ++m) {
        p.alpha_m.push_back(uniform(rng, 0.5, 0.95));
        p.beta_m.push_back(uniform(rng, 0.01, 0.3));
      }
      break;
    case ModelKind::edge_types: {
      double total = 0.0;
      for (std::size_t k = 0; k < states; ++k) {
        p.omega_types.push_back(uniform(rng, 0.1, 1.0));
        total += p.omega_types.back();
        p.alpha_k.push_back(uniform(rng, 0.02, 0.95));
      }
      for (auto& w : p.omega_types) w /= total;
      break;
    }
    default:
      p.omega = uniform(rng, 0.05, 0.8);
      for (std::size_t k = 0; k < states; ++k)
        p.alpha_k.push_back(k == 0 ? uniform(rng, 0.01, 0.2) : uniform(rng, 0.4, 0.95));
      if (kind == ModelKind::config || kind == ModelKind::per_node) p.phi = random_phi(rng, n);
      if (kind == ModelKind::per_node) {
        for (std::size_t i = 0; i < n; ++i) {
          std::vector<double> row;
          for (std::size_t k = 0; k < states; ++k)
            row.push_back(k == 0 ? uniform(rng, 0.01, 0.2) : uniform(rng, 0.4, 0.95));
          p.alpha_ik.push_back(row);
        }
        p.alpha_k.clear();
      }
  }
  return p;
}

}  // namespace fixture
