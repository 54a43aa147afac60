// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace netrecon {

using NodeId = std::uint32_t;

// Failure categories surfaced through the C API as distinct status codes.
enum class ErrorKind { invalid_argument, parse, io, unsupported, too_large };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Bijection between external node labels and dense ids [0, n).
/// Ids are handed out in first-seen order.
class NodeIndex {
 public:
  NodeIndex() = default;

  /// Labels "0", "1", ... "n-1".
  static NodeIndex numbered(std::size_t n);

  NodeId intern(std::string_view label);
  std::optional<NodeId> find(std::string_view label) const;
  const std::string& label(NodeId id) const { return labels_.at(id); }
  std::span<const std::string> labels() const { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }

  bool operator==(const NodeIndex& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> ids_;
};

struct NodePair {
  NodeId i = 0;
  NodeId j = 0;
  auto operator<=>(const NodePair&) const = default;
};

/// N_ij measurements of one pair, E_ij of which reported an edge.
struct PairCounts {
  NodePair pair;
  std::uint32_t trials = 0;
  std::uint32_t positives = 0;
};

/// Sparse per-pair measurement counts. Unstored pairs have N = E = 0.
/// Undirected tallies keep each pair once with i < j; directed tallies keep
/// ordered pairs (i, j), i != j, where the pair describes A_ij. Self pairs are
/// never stored.
class MeasurementTally {
 public:
  MeasurementTally() = default;
  /// Validates and sorts. Duplicate pairs are rejected; use TallyBuilder to
  /// aggregate raw records.
  MeasurementTally(NodeIndex nodes, bool directed, std::vector<PairCounts> pairs);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  bool directed() const noexcept { return directed_; }
  const NodeIndex& nodes() const noexcept { return nodes_; }
  std::span<const PairCounts> pairs() const noexcept { return pairs_; }

  /// Lookup with canonicalisation for undirected tallies; nullptr if unmeasured.
  const PairCounts* find(NodeId i, NodeId j) const;

  /// Number of distinct off-diagonal pair slots: C(n,2) or n(n-1).
  double pair_slots() const noexcept;

  std::uint64_t total_trials() const;
  std::uint64_t total_positives() const;

  /// Undirected tally with N_ij + N_ji, E_ij + E_ji. Identity on undirected input.
  MeasurementTally direction_summed() const;

 private:
  NodeIndex nodes_;
  bool directed_ = false;
  std::vector<PairCounts> pairs_;
};

/// Accumulates raw observations into a MeasurementTally.
class TallyBuilder {
 public:
  explicit TallyBuilder(bool directed) : directed_(directed) {}
  TallyBuilder(NodeIndex nodes, bool directed) : nodes_(std::move(nodes)), directed_(directed) {}

  /// Throws Error(invalid_argument) for self pairs or positives > trials.
  void add(std::string_view a, std::string_view b, std::uint32_t trials, std::uint32_t positives);
  void add(NodeId a, NodeId b, std::uint32_t trials, std::uint32_t positives);
  /// Registers a node that may have no measurements.
  NodeId add_node(std::string_view label) { return nodes_.intern(label); }

  MeasurementTally build() const;

 private:
  NodeIndex nodes_;
  bool directed_;
  std::vector<PairCounts> records_;
};

struct Observation {
  std::string a;
  std::string b;
  int outcome = 0;
};

/// Aggregates yes/no observation records into per-pair counts.
MeasurementTally build_tallies(std::span<const Observation> observations, bool directed);

/// Directed per-mode counts N_ij^(m), E_ij^(m) sharing one node index.
class MultimodalTally {
 public:
  struct Row {
    NodePair pair;
    std::vector<std::uint32_t> trials;     // one per mode
    std::vector<std::uint32_t> positives;  // one per mode
  };

  MultimodalTally() = default;
  MultimodalTally(NodeIndex nodes, std::vector<std::string> modes, std::vector<Row> rows);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t mode_count() const noexcept { return modes_.size(); }
  const NodeIndex& nodes() const noexcept { return nodes_; }
  std::span<const std::string> modes() const noexcept { return modes_; }
  std::span<const Row> rows() const noexcept { return rows_; }
  const Row* find(NodeId i, NodeId j) const;
  double pair_slots() const noexcept;

  /// The directed single-mode tally for mode m.
  MeasurementTally mode_tally(std::size_t m) const;

 private:
  NodeIndex nodes_;
  std::vector<std::string> modes_;
  std::vector<Row> rows_;
};

using Dataset = std::variant<MeasurementTally, MultimodalTally>;

const NodeIndex& dataset_nodes(const Dataset& data);

enum class NetworkModel { bernoulli_rg, poisson_rg, config_model, edge_types };
enum class DataModel { independent, multiedge, multimodal, per_node, edge_types };

std::string_view to_string(NetworkModel m);
std::string_view to_string(DataModel m);
NetworkModel parse_network_model(std::string_view s);
DataModel parse_data_model(std::string_view s);

/// One network-prior plus data-model parameter set. Only the fields relevant
/// to the model combination are populated.
struct ModelParams {
  NetworkModel network_model = NetworkModel::bernoulli_rg;
  DataModel data_model = DataModel::independent;

  double omega = 0.0;  // edge probability (Bernoulli) or mean multiplicity (Poisson)
  double alpha = 0.0;  // true-positive rate
  double beta = 0.0;   // false-positive rate
  std::vector<double> alpha_k;                // detection rate given multiplicity / state k
  std::vector<double> alpha_m;                // per-mode true-positive rates
  std::vector<double> beta_m;                 // per-mode false-positive rates
  std::vector<double> phi;                    // degree parameters, mean 1
  std::vector<std::vector<double>> alpha_ik;  // [node][k] reporter rates
  std::vector<double> omega_types;            // edge-state probabilities, sum 1

  /// Throws Error(invalid_argument) on out-of-range values.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

/// A realised (multi)graph. Undirected networks store i <= j; self-edges keep
/// the A_ii = 2 * count convention. Directed networks store ordered (i, j)
/// meaning A_ij.
class Network {
 public:
  struct Edge {
    NodeId i = 0;
    NodeId j = 0;
    std::uint32_t multiplicity = 0;
    bool operator==(const Edge&) const = default;
  };

  Network() = default;
  Network(std::size_t n, bool directed) : n_(n), directed_(directed) {}
  /// Sorts, canonicalises and validates; zero multiplicities are dropped.
  Network(std::size_t n, bool directed, std::vector<Edge> edges);

  std::size_t node_count() const noexcept { return n_; }
  bool directed() const noexcept { return directed_; }
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::uint32_t at(NodeId i, NodeId j) const;
  bool is_simple() const;

  /// sum_ij A_ij over ordered pairs, self-edges counted as A_ii.
  double adjacency_sum() const;

  bool operator==(const Network&) const = default;

 private:
  std::size_t n_ = 0;
  bool directed_ = false;
  std::vector<Edge> edges_;
};

enum class PosteriorForm {
  binary,        // A in {0,1}
  multiplicity,  // A = k parallel edges, k < states
  edge_state,    // A = edge type index, k < states
};

/// Per-pair distribution for pairs that carry no measurements; with no data
/// the posterior equals the prior.
struct PairPrior {
  PosteriorForm form = PosteriorForm::binary;
  std::size_t states = 2;
  double omega = 0.0;
  std::vector<double> phi;          // empty means all ones
  std::vector<double> state_weights;  // edge_state form only

  void distribution(NodeId i, NodeId j, std::span<double> out) const;
};

/// Factorised posterior over networks: one distribution over A_ij per pair.
/// Measured pairs are stored explicitly; everything else comes from the prior.
class EdgePosterior {
 public:
  EdgePosterior() = default;
  EdgePosterior(std::size_t n, bool directed, PairPrior prior, std::vector<NodePair> pairs,
                std::vector<double> dist);

  std::size_t node_count() const noexcept { return n_; }
  bool directed() const noexcept { return directed_; }
  PosteriorForm form() const noexcept { return prior_.form; }
  std::size_t states() const noexcept { return prior_.states; }
  const PairPrior& prior() const noexcept { return prior_; }

  std::span<const NodePair> stored_pairs() const noexcept { return pairs_; }
  std::span<const double> stored_distribution(std::size_t row) const {
    return {dist_.data() + row * prior_.states, prior_.states};
  }

  /// Q(k) for any pair; self pairs are certain to be empty.
  void distribution(NodeId i, NodeId j, std::span<double> out) const;
  /// P(A_ij > 0).
  double edge_probability(NodeId i, NodeId j) const;
  /// Posterior mean of A_ij.
  double expected(NodeId i, NodeId j) const;

  /// Visits every off-diagonal pair slot (i < j, or i != j when directed) in
  /// lexicographic order with its distribution.
  template <class Fn>
  void for_each_pair(Fn&& fn) const;

 private:
  std::optional<std::size_t> row_of(NodeId i, NodeId j) const;

  std::size_t n_ = 0;
  bool directed_ = false;
  PairPrior prior_;
  std::vector<NodePair> pairs_;
  std::vector<double> dist_;
};

double distribution_edge_probability(std::span<const double> q);
double distribution_mean(std::span<const double> q);
double distribution_variance(std::span<const double> q);

template <class Fn>
void EdgePosterior::for_each_pair(Fn&& fn) const {
  std::vector<double> scratch(prior_.states);
  std::size_t next = 0;
  for (NodeId i = 0; i < n_; ++i) {
    for (NodeId j = directed_ ? 0 : i + 1; j < n_; ++j) {
      if (i == j) continue;
      if (next < pairs_.size() && pairs_[next].i == i && pairs_[next].j == j) {
        fn(i, j, stored_distribution(next));
        ++next;
      } else {
        prior_.distribution(i, j, scratch);
        fn(i, j, std::span<const double>(scratch));
      }
    }
  }
}

struct FitResult {
  ModelParams params;
  EdgePosterior posterior;
  std::vector<double> objective_trace;  // winning restart, one entry per E-step
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t restart_index = 0;
  std::vector<double> restart_objectives;
  std::vector<std::string> diagnostics;

  double objective() const { return objective_trace.empty() ? 0.0 : objective_trace.back(); }
};

}  // namespace netrecon
