// SPDX-License-Identifier: Apache-2.0
#include "netrecon/posterior.hpp"

#include <cmath>
#include <fmt/format.h>

namespace netrecon {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::invalid_argument, msg); }

double pair_value(PosteriorForm form, std::span<const double> q) {
  return form == PosteriorForm::edge_state ? distribution_edge_probability(q) : distribution_mean(q);
}

double pair_variance(PosteriorForm form, std::span<const double> q) {
  if (form == PosteriorForm::edge_state) {
    const double p = distribution_edge_probability(q);
    return p * (1.0 - p);
  }
  return distribution_variance(q);
}

std::uint32_t draw(std::span<const double> q, double u) {
  double c = 0.0;
  for (std::size_t k = 0; k + 1 < q.size(); ++k) {
    c += q[k];
    if (u < c) return static_cast<std::uint32_t>(k);
  }
  return static_cast<std::uint32_t>(q.size() - 1);
}

// Every pair slot with its distribution, in for_each_pair order.
struct PairTable {
  std::size_t n, states;
  bool directed;
  std::vector<NodePair> pairs;
  std::vector<double> dist;

  explicit PairTable(const EdgePosterior& post)
      : n(post.node_count()), states(post.prior().states), directed(post.directed()) {
    post.for_each_pair([&](NodeId i, NodeId j, std::span<const double> q) {
      pairs.push_back({i, j});
      dist.insert(dist.end(), q.begin(), q.end());
    });
  }

  Network sample(std::mt19937_64& rng) const {
    std::vector<Network::Edge> edges;
    for (std::size_t r = 0; r < pairs.size(); ++r) {
      // Top 53 bits as a uniform double in [0, 1).
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      const auto k = draw({dist.data() + r * states, states}, u);
      if (k > 0) edges.push_back({pairs[r].i, pairs[r].j, k});
    }
    return Network(n, directed, std::move(edges));
  }
};

}  // namespace

FunctionalEstimate mean_degree(const EdgePosterior& post) {
  FunctionalEstimate out;
  const double n = static_cast<double>(post.node_count());
  if (n == 0) return out;
  double mean = 0.0, var = 0.0;
  post.for_each_pair([&](NodeId, NodeId, std::span<const double> q) {
    mean += pair_value(post.form(), q);
    var += pair_variance(post.form(), q);
  });
  // An undirected pair enters the degree sum twice.
  const double w = post.directed() ? 1.0 : 2.0;
  out.mean = w * mean / n;
  out.std = w * std::sqrt(var) / n;
  return out;
}

double average_degree(const Network& a, bool presence_only) {
  if (a.node_count() == 0) return 0.0;
  double s = 0.0;
  for (const auto& e : a.edges()) {
    const double m = presence_only ? 1.0 : e.multiplicity;
    s += (a.directed() || e.i == e.j) ? m : 2.0 * m;
  }
  return s / static_cast<double>(a.node_count());
}

Network sample_network(const EdgePosterior& post, std::mt19937_64& rng) {
  return PairTable(post).sample(rng);
}

Network sample_network(const EdgePosterior& post, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_network(post, rng);
}

FunctionalEstimate estimate_functional(const EdgePosterior& post, const NetworkFunctional& f,
                                       std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 2) invalid("estimate_functional needs at least two samples");
  std::mt19937_64 rng(seed);
  const PairTable table(post);
  FunctionalEstimate out;
  double mean = 0.0, m2 = 0.0;
  std::size_t used = 0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const auto a = table.sample(rng);
    double x;
    try {
      x = f(a);
    } catch (const std::exception&) {
      ++out.skipped;
      continue;
    }
    ++used;
    const double d = x - mean;
    mean += d / static_cast<double>(used);
    m2 += d * (x - mean);
  }
  out.n_samples = used;
  out.mean = mean;
  out.std = used > 1 ? std::sqrt(m2 / static_cast<double>(used - 1)) : 0.0;
  return out;
}

Network map_network(const EdgePosterior& post, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) invalid("threshold must lie in (0, 1)");
  std::vector<Network::Edge> edges;
  post.for_each_pair([&](NodeId i, NodeId j, std::span<const double> q) {
    if (distribution_edge_probability(q) > threshold) edges.push_back({i, j, 1});
  });
  return Network(post.node_count(), post.directed(), std::move(edges));
}

Certainty certainty_band(double q, double hi, double lo) {
  if (q > hi) return Certainty::high;
  if (q < lo) return Certainty::low;
  return Certainty::medium;
}

std::string_view to_string(Certainty c) {
  switch (c) {
    case Certainty::high:
      return "high";
    case Certainty::medium:
      return "medium";
    case Certainty::low:
      return "low";
  }
  return "?";
}

Certainty parse_certainty(std::string_view s) {
  if (s == "high") return Certainty::high;
  if (s == "medium") return Certainty::medium;
  if (s == "low") return Certainty::low;
  throw Error(ErrorKind::parse, fmt::format("unknown certainty label '{}'", s));
}

double band_agreement(const EdgePosterior& post, std::span<const LabelledPair> labels, double hi,
                      double lo) {
  if (labels.empty()) return 0.0;
  std::size_t agree = 0;
  for (const auto& l : labels)
    if (certainty_band(post.edge_probability(l.pair.i, l.pair.j), hi, lo) == l.label) ++agree;
  return static_cast<double>(agree) / static_cast<double>(labels.size());
}

Rate false_discovery_rate(const ModelParams& p, std::size_t mode) {
  double a, b;
  if (p.alpha_m.empty()) {
    if (mode != 0) invalid("single-mode parameters only have mode 0");
    a = p.alpha;
    b = p.beta;
  } else {
    if (mode >= p.alpha_m.size()) invalid(fmt::format("mode {} out of range", mode));
    a = p.alpha_m[mode];
    b = p.beta_m[mode];
  }
  const double fp = (1.0 - p.omega) * b;
  const double den = p.omega * a + fp;
  if (den == 0.0) return {0.0, true};
  return {fp / den, false};
}

std::optional<double> reporter_precision(const ModelParams& p, const MeasurementTally& tally,
                                         NodeId i) {
  if (p.alpha_ik.size() <= i || p.alpha_ik[i].size() < 2) invalid("no per-node rates for this node");
  const double a = p.alpha_ik[i][1];
  const double b = p.alpha_ik[i][0];
  auto phi = [&](NodeId x) { return p.phi.empty() ? 1.0 : p.phi[x]; };
  double s = 0.0;
  std::size_t count = 0;
  for (const auto& pc : tally.pairs()) {
    if (pc.pair.i != i || pc.positives == 0) continue;
    const double x = p.omega * phi(i) * phi(pc.pair.j) * a;
    s += x + b > 0.0 ? x / (x + b) : 0.0;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return s / static_cast<double>(count);
}

double threshold_mean_degree(const MeasurementTally& tally, std::uint32_t min_positive) {
  if (tally.node_count() == 0) return 0.0;
  double m = 0.0;
  for (const auto& pc : tally.pairs())
    if (pc.positives >= min_positive) m += 1.0;
  return (tally.directed() ? m : 2.0 * m) / static_cast<double>(tally.node_count());
}

}  // namespace netrecon
