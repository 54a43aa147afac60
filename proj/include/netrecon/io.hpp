// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netrecon/em.hpp"
#include "netrecon/posterior.hpp"
#include "netrecon/synth.hpp"
#include "netrecon/types.hpp"

namespace netrecon {

enum class TallyFormat { pairs, tally, multimodal };

TallyFormat parse_tally_format(std::string_view s);
std::string_view to_string(TallyFormat f);

/// pairs:  i<TAB>j<TAB>0|1    (one observation per line)
/// tally:  i<TAB>j<TAB>N<TAB>E
/// Lines starting with '#' and blank lines are skipped.
MeasurementTally parse_measurements(std::istream& in, TallyFormat format, bool directed,
                                    std::string_view source = "<input>");
MeasurementTally parse_measurements(const std::filesystem::path& path, TallyFormat format,
                                    bool directed);

/// i<TAB>j<TAB>mode<TAB>0|1, directed; the line reports an edge from j to i.
/// Repeated lines add up. Modes are numbered in first-seen order.
MultimodalTally parse_multimodal(std::istream& in, std::string_view source = "<input>");
MultimodalTally parse_multimodal(const std::filesystem::path& path);

Dataset read_dataset(const std::filesystem::path& path, TallyFormat format, bool directed);

/// i<TAB>j<TAB>high|medium|low against an existing node index.
std::vector<LabelledPair> parse_labels(const std::filesystem::path& path, const NodeIndex& nodes);

void write_tally(std::ostream& out, const MeasurementTally& tally);
void write_multimodal(std::ostream& out, const MultimodalTally& tally);
void write_network(std::ostream& out, const Network& network, const NodeIndex& nodes);

struct Provenance {
  std::string input;
  std::string format;
  bool directed = false;
  EmConfig config;

  bool operator==(const Provenance&) const = default;
};

struct Report {
  std::string model;
  bool directed = false;
  std::vector<std::string> nodes;
  std::vector<std::string> modes;
  ModelParams params;

  struct ModeRate {
    std::string mode;
    Rate fdr;
    bool operator==(const ModeRate&) const = default;
  };
  std::vector<ModeRate> fdr;
  std::vector<std::optional<double>> precision;  // per node, per-node model only
  FunctionalEstimate mean_degree;

  std::size_t iterations = 0;
  bool converged = false;
  std::size_t restart_index = 0;
  std::vector<double> restart_objectives;
  double objective = 0.0;
  std::vector<std::string> diagnostics;

  Provenance provenance;

  bool operator==(const Report&) const = default;
};

Report make_report(const ModelId& model, const Dataset& data, const FitResult& fit,
                   const Provenance& provenance);

std::string report_to_json(const Report& report);
Report report_from_json(std::string_view text);
Report read_report(const std::filesystem::path& path);

/// params.json, edges.tsv and trace.tsv.
void write_outputs(const Report& report, const FitResult& fit, const NodeIndex& nodes,
                   const std::filesystem::path& out_dir, double q_min = 0.01);

/// Header, every stored pair with P(A_ij > 0) >= q_min, then a
/// "# unmeasured<TAB>count<TAB>mean Q" line when some implicit pair reaches q_min.
void write_edges(std::ostream& out, const EdgePosterior& posterior, const NodeIndex& nodes,
                 double q_min);
void write_trace(std::ostream& out, std::span<const double> trace);

/// Graphviz: pen width 5 Q, node width proportional to phi. Nodes without a
/// drawn edge are left out unless no edge is drawn at all.
void export_dot(std::ostream& out, const EdgePosterior& posterior, const ModelParams& params,
                const NodeIndex& nodes, double q_min = 0.01);

/// Model and parameters from either a full report or a bare
/// {"model", "params", "sparse", "kmax"} object.
struct ParamFile {
  ModelId model;
  ModelParams params;
  Support support;
};
ParamFile parse_param_file(std::string_view json_text);

SynthSpec parse_synth_spec(std::string_view json_text);
SynthSpec read_synth_spec(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace netrecon
