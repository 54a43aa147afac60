// SPDX-License-Identifier: Apache-2.0
#include "netrecon/types.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <numeric>

namespace netrecon {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::invalid_argument, msg); }

bool in_unit(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

void check_rates(const std::vector<double>& v, const char* name) {
  for (std::size_t k = 0; k < v.size(); ++k)
    if (!in_unit(v[k])) invalid(fmt::format("{}[{}] = {} outside [0,1]", name, k, v[k]));
}

}  // namespace

// ---------------------------------------------------------------------------
// NodeIndex

NodeIndex NodeIndex::numbered(std::size_t n) {
  NodeIndex idx;
  for (std::size_t i = 0; i < n; ++i) idx.intern(std::to_string(i));
  return idx;
}

NodeId NodeIndex::intern(std::string_view label) {
  if (label.empty()) invalid("empty node label");
  auto it = ids_.find(std::string(label));
  if (it != ids_.end()) return it->second;
  auto id = static_cast<NodeId>(labels_.size());
  labels_.emplace_back(label);
  ids_.emplace(labels_.back(), id);
  return id;
}

std::optional<NodeId> NodeIndex::find(std::string_view label) const {
  auto it = ids_.find(std::string(label));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// MeasurementTally

MeasurementTally::MeasurementTally(NodeIndex nodes, bool directed, std::vector<PairCounts> pairs)
    : nodes_(std::move(nodes)), directed_(directed), pairs_(std::move(pairs)) {
  const auto n = nodes_.size();
  for (auto& p : pairs_) {
    if (p.pair.i >= n || p.pair.j >= n)
      invalid(fmt::format("pair ({}, {}) outside node range {}", p.pair.i, p.pair.j, n));
    if (p.pair.i == p.pair.j) invalid(fmt::format("self pair ({0}, {0})", p.pair.i));
    if (p.positives > p.trials)
      invalid(fmt::format("pair ({}, {}): E = {} exceeds N = {}", p.pair.i, p.pair.j, p.positives,
                          p.trials));
    if (!directed_ && p.pair.i > p.pair.j) std::swap(p.pair.i, p.pair.j);
  }
  std::sort(pairs_.begin(), pairs_.end(),
            [](const PairCounts& a, const PairCounts& b) { return a.pair < b.pair; });
  for (std::size_t r = 1; r < pairs_.size(); ++r)
    if (pairs_[r].pair == pairs_[r - 1].pair)
      invalid(fmt::format("duplicate pair ({}, {})", pairs_[r].pair.i, pairs_[r].pair.j));
}

const PairCounts* MeasurementTally::find(NodeId i, NodeId j) const {
  if (!directed_ && i > j) std::swap(i, j);
  NodePair key{i, j};
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), key,
                             [](const PairCounts& p, const NodePair& k) { return p.pair < k; });
  if (it == pairs_.end() || it->pair != key) return nullptr;
  return &*it;
}

double MeasurementTally::pair_slots() const noexcept {
  const double n = static_cast<double>(nodes_.size());
  return directed_ ? n * (n - 1.0) : 0.5 * n * (n - 1.0);
}

std::uint64_t MeasurementTally::total_trials() const {
  std::uint64_t s = 0;
  for (const auto& p : pairs_) s += p.trials;
  return s;
}

std::uint64_t MeasurementTally::total_positives() const {
  std::uint64_t s = 0;
  for (const auto& p : pairs_) s += p.positives;
  return s;
}

MeasurementTally MeasurementTally::direction_summed() const {
  if (!directed_) return *this;
  std::map<NodePair, PairCounts> acc;
  for (const auto& p : pairs_) {
    NodePair key{std::min(p.pair.i, p.pair.j), std::max(p.pair.i, p.pair.j)};
    auto& slot = acc[key];
    slot.pair = key;
    slot.trials += p.trials;
    slot.positives += p.positives;
  }
  std::vector<PairCounts> out;
  out.reserve(acc.size());
  for (auto& [k, v] : acc) out.push_back(v);
  return MeasurementTally(nodes_, false, std::move(out));
}

// ---------------------------------------------------------------------------
// TallyBuilder

void TallyBuilder::add(std::string_view a, std::string_view b, std::uint32_t trials,
                       std::uint32_t positives) {
  if (a == b) invalid(fmt::format("self pair '{}'", a));
  auto ia = nodes_.intern(a);
  auto ib = nodes_.intern(b);
  add(ia, ib, trials, positives);
}

void TallyBuilder::add(NodeId a, NodeId b, std::uint32_t trials, std::uint32_t positives) {
  if (a == b) invalid(fmt::format("self pair ({0}, {0})", a));
  if (positives > trials)
    invalid(fmt::format("positives {} exceed trials {}", positives, trials));
  if (!directed_ && a > b) std::swap(a, b);
  records_.push_back({{a, b}, trials, positives});
}

MeasurementTally TallyBuilder::build() const {
  std::map<NodePair, PairCounts> acc;
  for (const auto& r : records_) {
    auto& slot = acc[r.pair];
    slot.pair = r.pair;
    slot.trials += r.trials;
    slot.positives += r.positives;
  }
  std::vector<PairCounts> pairs;
  pairs.reserve(acc.size());
  for (auto& [k, v] : acc) pairs.push_back(v);
  return MeasurementTally(nodes_, directed_, std::move(pairs));
}

MeasurementTally build_tallies(std::span<const Observation> observations, bool directed) {
  TallyBuilder builder(directed);
  for (const auto& o : observations) {
    if (o.outcome != 0 && o.outcome != 1)
      invalid(fmt::format("outcome {} for ({}, {}) is not 0 or 1", o.outcome, o.a, o.b));
    builder.add(o.a, o.b, 1, static_cast<std::uint32_t>(o.outcome));
  }
  return builder.build();
}

// ---------------------------------------------------------------------------
// MultimodalTally

MultimodalTally::MultimodalTally(NodeIndex nodes, std::vector<std::string> modes,
                                 std::vector<Row> rows)
    : nodes_(std::move(nodes)), modes_(std::move(modes)), rows_(std::move(rows)) {
  const auto n = nodes_.size();
  const auto m = modes_.size();
  for (const auto& r : rows_) {
    if (r.pair.i >= n || r.pair.j >= n) invalid("multimodal pair outside node range");
    if (r.pair.i == r.pair.j) invalid(fmt::format("self pair ({0}, {0})", r.pair.i));
    if (r.trials.size() != m || r.positives.size() != m)
      invalid(fmt::format("row ({}, {}) has counts for {} modes, expected {}", r.pair.i, r.pair.j,
                          r.trials.size(), m));
    for (std::size_t k = 0; k < m; ++k)
      if (r.positives[k] > r.trials[k])
        invalid(fmt::format("pair ({}, {}) mode {}: E exceeds N", r.pair.i, r.pair.j, k));
  }
  std::sort(rows_.begin(), rows_.end(), [](const Row& a, const Row& b) { return a.pair < b.pair; });
  for (std::size_t r = 1; r < rows_.size(); ++r)
    if (rows_[r].pair == rows_[r - 1].pair)
      invalid(fmt::format("duplicate pair ({}, {})", rows_[r].pair.i, rows_[r].pair.j));
}

const MultimodalTally::Row* MultimodalTally::find(NodeId i, NodeId j) const {
  NodePair key{i, j};
  auto it = std::lower_bound(rows_.begin(), rows_.end(), key,
                             [](const Row& r, const NodePair& k) { return r.pair < k; });
  if (it == rows_.end() || it->pair != key) return nullptr;
  return &*it;
}

double MultimodalTally::pair_slots() const noexcept {
  const double n = static_cast<double>(nodes_.size());
  return n * (n - 1.0);
}

MeasurementTally MultimodalTally::mode_tally(std::size_t m) const {
  if (m >= modes_.size()) invalid(fmt::format("mode {} out of range", m));
  std::vector<PairCounts> pairs;
  for (const auto& r : rows_)
    if (r.trials[m] > 0) pairs.push_back({r.pair, r.trials[m], r.positives[m]});
  return MeasurementTally(nodes_, true, std::move(pairs));
}

const NodeIndex& dataset_nodes(const Dataset& data) {
  return std::visit([](const auto& t) -> const NodeIndex& { return t.nodes(); }, data);
}

// ---------------------------------------------------------------------------
// Model tags

std::string_view to_string(NetworkModel m) {
  switch (m) {
    case NetworkModel::bernoulli_rg: return "bernoulli_rg";
    case NetworkModel::poisson_rg: return "poisson_rg";
    case NetworkModel::config_model: return "config_model";
    case NetworkModel::edge_types: return "edge_types";
  }
  return "?";
}

std::string_view to_string(DataModel m) {
  switch (m) {
    case DataModel::independent: return "independent";
    case DataModel::multiedge: return "multiedge";
    case DataModel::multimodal: return "multimodal";
    case DataModel::per_node: return "per_node";
    case DataModel::edge_types: return "edge_types";
  }
  return "?";
}

NetworkModel parse_network_model(std::string_view s) {
  for (auto m : {NetworkModel::bernoulli_rg, NetworkModel::poisson_rg, NetworkModel::config_model,
                 NetworkModel::edge_types})
    if (to_string(m) == s) return m;
  invalid(fmt::format("unknown network model '{}'", s));
}

DataModel parse_data_model(std::string_view s) {
  for (auto m : {DataModel::independent, DataModel::multiedge, DataModel::multimodal,
                 DataModel::per_node, DataModel::edge_types})
    if (to_string(m) == s) return m;
  invalid(fmt::format("unknown data model '{}'", s));
}

// ---------------------------------------------------------------------------
// ModelParams

void ModelParams::validate() const {
  if (!std::isfinite(omega) || omega < 0.0) invalid(fmt::format("omega = {} is invalid", omega));
  if (network_model == NetworkModel::bernoulli_rg && omega > 1.0)
    invalid(fmt::format("omega = {} exceeds 1 for the Bernoulli random graph", omega));
  if (!in_unit(alpha)) invalid(fmt::format("alpha = {} outside [0,1]", alpha));
  if (!in_unit(beta)) invalid(fmt::format("beta = {} outside [0,1]", beta));
  check_rates(alpha_k, "alpha_k");
  check_rates(alpha_m, "alpha_m");
  check_rates(beta_m, "beta_m");
  if (alpha_m.size() != beta_m.size()) invalid("alpha_m and beta_m differ in length");
  for (std::size_t i = 0; i < alpha_ik.size(); ++i) check_rates(alpha_ik[i], "alpha_ik");
  for (double p : phi)
    if (!std::isfinite(p) || p < 0.0) invalid(fmt::format("phi value {} is negative", p));
  if (!phi.empty()) {
    double mean = std::accumulate(phi.begin(), phi.end(), 0.0) / static_cast<double>(phi.size());
    if (std::abs(mean - 1.0) > 1e-9) invalid(fmt::format("phi has mean {}, expected 1", mean));
  }
  if (!omega_types.empty()) {
    check_rates(omega_types, "omega_types");
    double s = std::accumulate(omega_types.begin(), omega_types.end(), 0.0);
    if (std::abs(s - 1.0) > 1e-9) invalid(fmt::format("omega_types sums to {}, expected 1", s));
  }
}

// ---------------------------------------------------------------------------
// Network

Network::Network(std::size_t n, bool directed, std::vector<Edge> edges)
    : n_(n), directed_(directed), edges_(std::move(edges)) {
  for (auto& e : edges_) {
    if (e.i >= n_ || e.j >= n_) invalid("edge endpoint outside node range");
    if (!directed_ && e.i > e.j) std::swap(e.i, e.j);
    if (e.i == e.j && directed_) invalid("directed networks carry no self-edges");
    if (e.i == e.j && e.multiplicity % 2 != 0)
      invalid(fmt::format("self-edge A_{0}{0} = {1} must be even", e.i, e.multiplicity));
  }
  std::erase_if(edges_, [](const Edge& e) { return e.multiplicity == 0; });
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return NodePair{a.i, a.j} < NodePair{b.i, b.j};
  });
  for (std::size_t r = 1; r < edges_.size(); ++r)
    if (edges_[r].i == edges_[r - 1].i && edges_[r].j == edges_[r - 1].j)
      invalid("duplicate edge entry");
}

std::uint32_t Network::at(NodeId i, NodeId j) const {
  if (!directed_ && i > j) std::swap(i, j);
  NodePair key{i, j};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key, [](const Edge& e, const NodePair& k) {
    return NodePair{e.i, e.j} < k;
  });
  if (it == edges_.end() || it->i != i || it->j != j) return 0;
  return it->multiplicity;
}

bool Network::is_simple() const {
  return std::all_of(edges_.begin(), edges_.end(),
                     [](const Edge& e) { return e.i != e.j && e.multiplicity <= 1; });
}

double Network::adjacency_sum() const {
  double s = 0.0;
  for (const auto& e : edges_) {
    if (directed_ || e.i == e.j)
      s += e.multiplicity;
    else
      s += 2.0 * e.multiplicity;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Posterior

void PairPrior::distribution(NodeId i, NodeId j, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (i == j) {
    out[0] = 1.0;
    return;
  }
  switch (form) {
    case PosteriorForm::binary:
      out[0] = 1.0 - omega;
      out[1] = omega;
      return;
    case PosteriorForm::edge_state:
      std::copy(state_weights.begin(), state_weights.end(), out.begin());
      return;
    case PosteriorForm::multiplicity: {
      double lambda = omega;
      if (!phi.empty()) lambda *= phi[i] * phi[j];
      // lambda^k / k!, normalised over the truncated support
      double term = 1.0;
      double total = 0.0;
      for (std::size_t k = 0; k < states; ++k) {
        if (k > 0) term *= lambda / static_cast<double>(k);
        out[k] = term;
        total += term;
      }
      for (auto& v : out) v /= total;
      return;
    }
  }
}

EdgePosterior::EdgePosterior(std::size_t n, bool directed, PairPrior prior,
                             std::vector<NodePair> pairs, std::vector<double> dist)
    : n_(n), directed_(directed), prior_(std::move(prior)), pairs_(std::move(pairs)),
      dist_(std::move(dist)) {
  if (prior_.states < 2) invalid("posterior needs at least two states");
  if (dist_.size() != pairs_.size() * prior_.states) invalid("posterior storage size mismatch");
  for (std::size_t r = 0; r < pairs_.size(); ++r) {
    const auto& p = pairs_[r];
    if (p.i >= n_ || p.j >= n_ || p.i == p.j || (!directed_ && p.i > p.j))
      invalid("posterior pair not canonical");
    if (r > 0 && !(pairs_[r - 1] < p)) invalid("posterior pairs not strictly sorted");
    double total = 0.0;
    for (double q : stored_distribution(r)) {
      if (!(q >= 0.0 && q <= 1.0 + 1e-12)) invalid(fmt::format("posterior value {} outside [0,1]", q));
      total += q;
    }
    if (std::abs(total - 1.0) > 1e-9) invalid(fmt::format("posterior row sums to {}", total));
  }
}

std::optional<std::size_t> EdgePosterior::row_of(NodeId i, NodeId j) const {
  if (!directed_ && i > j) std::swap(i, j);
  NodePair key{i, j};
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), key);
  if (it == pairs_.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - pairs_.begin());
}

void EdgePosterior::distribution(NodeId i, NodeId j, std::span<double> out) const {
  if (auto r = row_of(i, j)) {
    auto d = stored_distribution(*r);
    std::copy(d.begin(), d.end(), out.begin());
  } else {
    prior_.distribution(i, j, out);
  }
}

double EdgePosterior::edge_probability(NodeId i, NodeId j) const {
  std::vector<double> q(prior_.states);
  distribution(i, j, q);
  return distribution_edge_probability(q);
}

double EdgePosterior::expected(NodeId i, NodeId j) const {
  std::vector<double> q(prior_.states);
  distribution(i, j, q);
  return distribution_mean(q);
}

double distribution_edge_probability(std::span<const double> q) {
  if (q.size() == 2) return q[1];
  double s = 0.0;
  for (std::size_t k = 1; k < q.size(); ++k) s += q[k];
  return s;
}

double distribution_mean(std::span<const double> q) {
  if (q.size() == 2) return q[1];
  double s = 0.0;
  for (std::size_t k = 1; k < q.size(); ++k) s += static_cast<double>(k) * q[k];
  return s;
}

double distribution_variance(std::span<const double> q) {
  if (q.size() == 2) return q[1] * (1.0 - q[1]);
  double m = distribution_mean(q);
  double s = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    double d = static_cast<double>(k) - m;
    s += d * d * q[k];
  }
  return s;
}

}  // namespace netrecon
