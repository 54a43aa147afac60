// SPDX-License-Identifier: Apache-2.0
#include "netrecon/em.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "kernels.hpp"

namespace netrecon {

namespace {

using detail::clamp_rate;

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::invalid_argument, msg); }

const MeasurementTally& single_tally(const Dataset& data) {
  if (const auto* t = std::get_if<MeasurementTally>(&data)) return *t;
  invalid("model needs a single-mode measurement tally");
}

const MultimodalTally& multimodal_tally(const Dataset& data) {
  if (const auto* t = std::get_if<MultimodalTally>(&data)) return *t;
  invalid("multimodal model needs a multimodal tally");
}

ModelParams blank(ModelKind kind) {
  const auto id = ModelId::of(kind);
  ModelParams p;
  p.network_model = id.network;
  p.data_model = id.data;
  return p;
}

void require_kind(const ModelParams& p, ModelKind kind) {
  const auto id = ModelId::of(kind);
  if (p.network_model != id.network || p.data_model != id.data)
    invalid(fmt::format("parameters are {} x {}, expected {}", to_string(p.network_model),
                        to_string(p.data_model), id.name()));
}

std::size_t states_of(ModelKind kind, const ModelParams& p, const Support& support) {
  switch (kind) {
    case ModelKind::bernoulli:
    case ModelKind::multimodal:
      return 2;
    case ModelKind::edge_types:
      return p.omega_types.size();
    default:
      return support.states();
  }
}

PairPrior prior_for(ModelKind kind, const ModelParams& p, std::size_t states) {
  PairPrior prior;
  prior.states = states;
  prior.omega = p.omega;
  switch (kind) {
    case ModelKind::bernoulli:
    case ModelKind::multimodal:
      prior.form = PosteriorForm::binary;
      break;
    case ModelKind::edge_types:
      prior.form = PosteriorForm::edge_state;
      prior.state_weights = p.omega_types;
      break;
    case ModelKind::poisson:
      prior.form = PosteriorForm::multiplicity;
      break;
    case ModelKind::config:
    case ModelKind::per_node:
      prior.form = PosteriorForm::multiplicity;
      prior.phi = p.phi;
      break;
  }
  return prior;
}

std::vector<double> rates_of(ModelKind kind, const ModelParams& p, std::size_t states) {
  std::vector<double> r;
  switch (kind) {
    case ModelKind::bernoulli:
      return {p.beta, p.alpha};
    case ModelKind::multimodal:
      r = p.beta_m;
      r.insert(r.end(), p.alpha_m.begin(), p.alpha_m.end());
      return r;
    case ModelKind::per_node:
      for (const auto& row : p.alpha_ik)
        r.insert(r.end(), row.begin(), row.begin() + static_cast<std::ptrdiff_t>(states));
      return r;
    default:
      return {p.alpha_k.begin(), p.alpha_k.begin() + static_cast<std::ptrdiff_t>(states)};
  }
}

void store_rates(ModelKind kind, ModelParams& p, std::span<const double> r, std::size_t states) {
  switch (kind) {
    case ModelKind::bernoulli:
      p.beta = r[0];
      p.alpha = r[1];
      return;
    case ModelKind::multimodal: {
      const auto m = p.alpha_m.size();
      std::copy(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(m), p.beta_m.begin());
      std::copy(r.begin() + static_cast<std::ptrdiff_t>(m), r.end(), p.alpha_m.begin());
      return;
    }
    case ModelKind::per_node:
      for (std::size_t i = 0; i < p.alpha_ik.size(); ++i)
        std::copy(r.begin() + static_cast<std::ptrdiff_t>(i * states),
                  r.begin() + static_cast<std::ptrdiff_t>((i + 1) * states), p.alpha_ik[i].begin());
      return;
    default:
      std::copy(r.begin(), r.end(), p.alpha_k.begin());
      return;
  }
}

std::string rate_name(ModelKind kind, const Dataset& data, std::size_t x, std::size_t states) {
  switch (kind) {
    case ModelKind::bernoulli:
      return x == 0 ? "beta" : "alpha";
    case ModelKind::multimodal: {
      const auto& t = multimodal_tally(data);
      const auto m = t.mode_count();
      return fmt::format("{}[{}]", x < m ? "beta" : "alpha", t.modes()[x % m]);
    }
    case ModelKind::per_node:
      return fmt::format("alpha[{}][{}]", dataset_nodes(data).label(static_cast<NodeId>(x / states)),
                         x % states);
    default:
      return fmt::format("alpha_k[{}]", x);
  }
}

// One family-specific workspace: E-step fills whatever the M-step needs.
class Engine {
 public:
  Engine(ModelKind kind, const Dataset& data, const Support& support, bool merge)
      : kind_(kind), data_(data), support_(support) {
    if (kind == ModelKind::config || kind == ModelKind::per_node) {
      degree_ = detail::degree_rows(single_tally(data));
    } else if (kind == ModelKind::multimodal) {
      rows_ = detail::signature_rows(multimodal_tally(data), merge);
    } else {
      rows_ = detail::signature_rows(single_tally(data), merge);
    }
    n_ = dataset_nodes(data).size();
  }

  double estep(const ModelParams& p) {
    states_ = states_of(kind_, p, support_);
    if (degree_) {
      rate_ = rates_of(kind_, p, states_);
      detail::DegreeModel dm{p.omega, p.phi, states_, rate_, kind_ == ModelKind::per_node};
      sweep_ = detail::degree_sweep(*degree_, dm, keep_dist_);
      return sweep_.objective;
    }
    mix_ = detail::mixture_for(kind_, p, states_, rows_.modes);
    double obj = detail::mixture_estep(rows_, mix_, dist_);
    if (kind_ == ModelKind::poisson) obj -= 0.5 * p.omega * static_cast<double>(n_);
    return obj;
  }

  MStep mstep(const ModelParams& prev) {
    MStep out{prev, {}};
    auto& p = out.params;
    std::vector<bool> held;
    std::vector<double> rate;
    if (degree_) {
      const double total = std::accumulate(sweep_.degree.begin(), sweep_.degree.end(), 0.0);
      const double n = static_cast<double>(n_);
      p.omega = total / (n * n);
      if (total > 0.0) {
        for (std::size_t i = 0; i < n_; ++i) p.phi[i] = n * sweep_.degree[i] / total;
      } else {
        std::fill(p.phi.begin(), p.phi.end(), 1.0);
        out.held.emplace_back("phi reset to ones (no posterior edge mass)");
      }
      rate = rate_;
      held.assign(rate.size(), false);
      for (std::size_t x = 0; x < rate.size(); ++x) {
        if (sweep_.den[x] > 0.0)
          rate[x] = clamp_rate(sweep_.num[x] / sweep_.den[x]);
        else
          held[x] = true;
      }
    } else {
      const auto mass = detail::state_mass(rows_, dist_, states_);
      const double slots = rows_.unmeasured + measured_weight();
      switch (kind_) {
        case ModelKind::bernoulli:
        case ModelKind::multimodal:
          p.omega = (mass[1] + rows_.unmeasured * prev.omega) / slots;
          break;
        case ModelKind::edge_types:
          for (std::size_t k = 0; k < states_; ++k)
            p.omega_types[k] = (mass[k] + rows_.unmeasured * prev.omega_types[k]) / slots;
          break;
        case ModelKind::poisson: {
          double ahat = 0.0;
          for (std::size_t k = 1; k < states_; ++k) ahat += static_cast<double>(k) * mass[k];
          const auto q0 = detail::mixture_prior(mix_);
          double mean0 = 0.0;
          for (std::size_t k = 1; k < states_; ++k) mean0 += static_cast<double>(k) * q0[k];
          ahat += rows_.unmeasured * mean0;
          const double n = static_cast<double>(n_);
          p.omega = 2.0 * ahat / (n * n);
          break;
        }
        default:
          break;
      }
      rate = mix_.rate;
      detail::mixture_rates(rows_, dist_, states_, rate, held);
    }
    for (std::size_t x = 0; x < held.size(); ++x)
      if (held[x]) out.held.push_back(rate_name(kind_, data_, x, states_) + " held (no posterior mass)");
    store_rates(kind_, p, rate, states_);
    return out;
  }

 private:
  double measured_weight() const {
    return std::accumulate(rows_.weight.begin(), rows_.weight.end(), 0.0);
  }

  ModelKind kind_;
  const Dataset& data_;
  Support support_;
  std::size_t n_ = 0;
  std::size_t states_ = 2;
  bool keep_dist_ = false;

  detail::SignatureRows rows_;
  detail::Mixture mix_;
  std::vector<double> dist_;

  std::optional<detail::DegreeRows> degree_;
  std::vector<double> rate_;
  detail::DegreeSweep sweep_;
};

// Resolves label symmetries so that reported parameters are canonical.
void relabel(ModelKind kind, ModelParams& p) {
  if (kind == ModelKind::bernoulli && p.alpha < p.beta) {
    std::swap(p.alpha, p.beta);
    p.omega = 1.0 - p.omega;
  } else if (kind == ModelKind::multimodal) {
    const double a = std::accumulate(p.alpha_m.begin(), p.alpha_m.end(), 0.0);
    const double b = std::accumulate(p.beta_m.begin(), p.beta_m.end(), 0.0);
    if (a < b) {
      std::swap(p.alpha_m, p.beta_m);
      p.omega = 1.0 - p.omega;
    }
  } else if (kind == ModelKind::edge_types) {
    std::vector<std::size_t> order(p.alpha_k.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return p.alpha_k[x] < p.alpha_k[y]; });
    ModelParams q = p;
    for (std::size_t k = 0; k < order.size(); ++k) {
      q.alpha_k[k] = p.alpha_k[order[k]];
      q.omega_types[k] = p.omega_types[order[k]];
    }
    p = std::move(q);
  }
}

struct Run {
  ModelParams params;
  std::vector<double> trace;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::string> held;
};

Run run_once(ModelKind kind, const Dataset& data, const EmConfig& config, ModelParams p) {
  Engine engine(kind, data, config.support(), true);
  Run run;
  for (std::size_t it = 0; it < config.max_iter; ++it) {
    run.trace.push_back(engine.estep(p));
    auto step = engine.mstep(p);
    const double delta = param_distance(p, step.params);
    p = std::move(step.params);
    run.held = std::move(step.held);
    ++run.iterations;
    if (delta < config.tol) {
      run.converged = true;
      break;
    }
  }
  relabel(kind, p);
  run.trace.push_back(engine.estep(p));
  run.params = std::move(p);
  return run;
}

void max_abs(double& d, const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    d = std::numeric_limits<double>::infinity();
    return;
  }
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

void EmConfig::validate() const {
  if (!(tol > 0.0)) invalid("tol must be positive");
  if (max_iter < 1) invalid("max_iter must be at least 1");
  if (restarts < 1) invalid("restarts must be at least 1");
  if (!sparse && kmax < 1) invalid("kmax must be at least 1");
  if (edge_states < 2) invalid("edge-type model needs at least two states");
}

double param_distance(const ModelParams& a, const ModelParams& b) {
  double d = std::max({std::abs(a.omega - b.omega), std::abs(a.alpha - b.alpha),
                       std::abs(a.beta - b.beta)});
  max_abs(d, a.alpha_k, b.alpha_k);
  max_abs(d, a.alpha_m, b.alpha_m);
  max_abs(d, a.beta_m, b.beta_m);
  max_abs(d, a.phi, b.phi);
  max_abs(d, a.omega_types, b.omega_types);
  if (a.alpha_ik.size() != b.alpha_ik.size()) return std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.alpha_ik.size(); ++i) max_abs(d, a.alpha_ik[i], b.alpha_ik[i]);
  return d;
}

ModelParams initial_params(const ModelId& model, const Dataset& data, const EmConfig& config,
                           std::size_t restart) {
  const auto kind = model.kind();
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                    static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  std::mt19937_64 rng(seq);
  const auto n = dataset_nodes(data).size();
  const auto S = config.support().states();
  auto p = blank(kind);

  if (kind == ModelKind::edge_types) {
    const auto K = config.edge_states;
    if (K < 2) invalid("edge-type model needs at least two states");
    p.omega_types.assign(K, 0.0);
    double rest = 0.0;
    for (std::size_t m = 1; m < K; ++m) {
      p.omega_types[m] = uniform(rng, 0.001, 0.05) / static_cast<double>(K - 1);
      rest += p.omega_types[m];
    }
    p.omega_types[0] = 1.0 - rest;
    p.alpha_k.assign(K, 0.0);
    p.alpha_k[K - 1] = uniform(rng, 0.6, 0.95);
    p.alpha_k[0] = uniform(rng, 0.001, 0.1);
    for (std::size_t m = 1; m + 1 < K; ++m) p.alpha_k[m] = uniform(rng, 0.1, 0.6);
    return p;
  }

  p.omega = uniform(rng, 0.001, 0.05);
  if (kind == ModelKind::multimodal) {
    const auto M = multimodal_tally(data).mode_count();
    for (std::size_t m = 0; m < M; ++m) {
      p.alpha_m.push_back(uniform(rng, 0.6, 0.95));
      p.beta_m.push_back(uniform(rng, 0.001, 0.1));
    }
    return p;
  }
  const double a = uniform(rng, 0.6, 0.95);
  const double b = uniform(rng, 0.001, 0.1);
  if (kind == ModelKind::bernoulli) {
    p.alpha = a;
    p.beta = b;
    return p;
  }
  p.alpha_k = {b, a};
  for (std::size_t k = 2; k < S; ++k) p.alpha_k.push_back(uniform(rng, 0.6, 0.95));
  if (kind == ModelKind::poisson) return p;
  p.phi.assign(n, 1.0);
  if (kind == ModelKind::config) return p;

  p.alpha_ik.assign(n, {});
  for (auto& row : p.alpha_ik)
    for (std::size_t k = 0; k < S; ++k)
      row.push_back(clamp_rate(std::min(1.0, p.alpha_k[k] * uniform(rng, 0.9, 1.1))));
  p.alpha_k.clear();
  return p;
}

EStep posterior_at(const ModelId& model, const Dataset& data, const ModelParams& p,
                   const Support& support) {
  check_params(model, data, p, support);
  const auto kind = model.kind();
  const auto S = states_of(kind, p, support);
  const auto n = dataset_nodes(data).size();
  EStep out;
  std::vector<NodePair> pairs;
  std::vector<double> dist;

  if (kind == ModelKind::config || kind == ModelKind::per_node) {
    const auto rows = detail::degree_rows(single_tally(data));
    const auto rate = rates_of(kind, p, S);
    detail::DegreeModel dm{p.omega, p.phi, S, rate, kind == ModelKind::per_node};
    auto sweep = detail::degree_sweep(rows, dm, true);
    out.objective = sweep.objective;
    out.posterior = EdgePosterior(n, false, prior_for(kind, p, S), rows.pairs, std::move(sweep.dist));
    return out;
  }

  detail::SignatureRows rows;
  bool directed = false;
  if (kind == ModelKind::multimodal) {
    const auto& t = multimodal_tally(data);
    rows = detail::signature_rows(t, true);
    for (const auto& r : t.rows()) pairs.push_back(r.pair);
    directed = true;
  } else {
    const auto& t = single_tally(data);
    if (kind != ModelKind::bernoulli && t.directed())
      invalid(fmt::format("{} model needs an undirected tally", model.name()));
    rows = detail::signature_rows(t, true);
    for (const auto& r : t.pairs()) pairs.push_back(r.pair);
    directed = t.directed();
  }
  const auto mix = detail::mixture_for(kind, p, S, rows.modes);
  std::vector<double> row_dist;
  out.objective = detail::mixture_estep(rows, mix, row_dist);
  if (kind == ModelKind::poisson) out.objective -= 0.5 * p.omega * static_cast<double>(n);
  dist.reserve(pairs.size() * S);
  for (auto r : rows.row_of_pair)
    dist.insert(dist.end(), row_dist.begin() + static_cast<std::ptrdiff_t>(r * S),
                row_dist.begin() + static_cast<std::ptrdiff_t>((r + 1) * S));
  out.posterior = EdgePosterior(n, directed, prior_for(kind, p, S), std::move(pairs), std::move(dist));
  return out;
}

EdgePosterior estep_bernoulli(const ModelParams& params, const MeasurementTally& tally) {
  return posterior_at(ModelId::of(ModelKind::bernoulli), tally, params).posterior;
}

EdgePosterior estep_poisson(const ModelParams& params, const MeasurementTally& tally,
                            const Support& support) {
  return posterior_at(ModelId::of(ModelKind::poisson), tally, params, support).posterior;
}

EdgePosterior estep_config(const ModelParams& params, const MeasurementTally& tally,
                           const Support& support) {
  return posterior_at(ModelId::of(ModelKind::config), tally, params, support).posterior;
}

EdgePosterior estep_multimodal(const ModelParams& params, const MultimodalTally& tally) {
  return posterior_at(ModelId::of(ModelKind::multimodal), tally, params).posterior;
}

EdgePosterior estep_pernode(const ModelParams& params, const MeasurementTally& tally,
                            const Support& support) {
  return posterior_at(ModelId::of(ModelKind::per_node), tally, params, support).posterior;
}

namespace {

// Sum of stored Q_ij(1) plus the implicit value for every other slot.
double binary_mass(const EdgePosterior& post, double slots) {
  double s = 0.0;
  for (std::size_t r = 0; r < post.stored_pairs().size(); ++r) s += post.stored_distribution(r)[1];
  const double rest = slots - static_cast<double>(post.stored_pairs().size());
  std::vector<double> q(2);
  post.prior().distribution(0, 1, q);
  return s + rest * q[1];
}

// Sum_j Ahat_ij over every pair slot.
std::vector<double> expected_degrees(const EdgePosterior& post) {
  std::vector<double> d(post.node_count(), 0.0);
  post.for_each_pair([&](NodeId i, NodeId j, std::span<const double> q) {
    const double a = distribution_mean(q);
    d[i] += a;
    d[j] += a;
  });
  return d;
}

void ratio_update(std::span<const double> num, std::span<const double> den, std::span<double> rate,
                  std::vector<bool>& held) {
  held.assign(rate.size(), false);
  for (std::size_t x = 0; x < rate.size(); ++x) {
    if (den[x] > 0.0)
      rate[x] = clamp_rate(num[x] / den[x]);
    else
      held[x] = true;
  }
}

void check_shape(const EdgePosterior& post, std::size_t n, bool directed) {
  if (post.node_count() != n) invalid("posterior and tally differ in node count");
  if (post.directed() != directed) invalid("posterior and tally differ in directedness");
}

void report_held(MStep& out, const std::vector<bool>& held, ModelKind kind, const Dataset& data,
                 std::size_t states) {
  for (std::size_t x = 0; x < held.size(); ++x)
    if (held[x]) out.held.push_back(rate_name(kind, data, x, states) + " held (no posterior mass)");
}

// alpha_k numerators and denominators over ordered pairs; the factor 2
// cancels in the ratio.
void multiplicity_rates(const EdgePosterior& post, const MeasurementTally& tally,
                        std::span<double> rate, std::vector<bool>& held) {
  const auto S = post.states();
  std::vector<double> num(S, 0.0), den(S, 0.0), q(S);
  for (const auto& pc : tally.pairs()) {
    post.distribution(pc.pair.i, pc.pair.j, q);
    for (std::size_t k = 0; k < S; ++k) {
      num[k] += q[k] * pc.positives;
      den[k] += q[k] * pc.trials;
    }
  }
  ratio_update(num, den, rate, held);
}

}  // namespace

MStep mstep_bernoulli(const EdgePosterior& post, const MeasurementTally& tally,
                      const ModelParams& previous) {
  require_kind(previous, ModelKind::bernoulli);
  check_shape(post, tally.node_count(), tally.directed());
  if (post.states() != 2) invalid("Bernoulli M-step needs a binary posterior");
  MStep out{previous, {}};
  const double slots = tally.pair_slots();
  out.params.omega = slots > 0.0 ? binary_mass(post, slots) / slots : previous.omega;
  std::vector<double> num(2, 0.0), den(2, 0.0), q(2);
  for (const auto& pc : tally.pairs()) {
    post.distribution(pc.pair.i, pc.pair.j, q);
    for (std::size_t s = 0; s < 2; ++s) {
      num[s] += q[s] * pc.positives;
      den[s] += q[s] * pc.trials;
    }
  }
  std::vector<double> rate{previous.beta, previous.alpha};
  std::vector<bool> held;
  ratio_update(num, den, rate, held);
  out.params.beta = rate[0];
  out.params.alpha = rate[1];
  report_held(out, held, ModelKind::bernoulli, tally, 2);
  return out;
}

MStep mstep_poisson(const EdgePosterior& post, const MeasurementTally& tally,
                    const ModelParams& previous) {
  require_kind(previous, ModelKind::poisson);
  check_shape(post, tally.node_count(), false);
  const auto S = post.states();
  if (previous.alpha_k.size() < S) invalid("alpha_k shorter than the posterior support");
  MStep out{previous, {}};
  const auto d = expected_degrees(post);
  const double n = static_cast<double>(tally.node_count());
  out.params.omega = n > 0 ? std::accumulate(d.begin(), d.end(), 0.0) / (n * n) : previous.omega;
  std::vector<bool> held;
  multiplicity_rates(post, tally, std::span(out.params.alpha_k).first(S), held);
  report_held(out, held, ModelKind::poisson, tally, S);
  return out;
}

MStep mstep_config(const EdgePosterior& post, const MeasurementTally& tally,
                   const ModelParams& previous) {
  require_kind(previous, ModelKind::config);
  check_shape(post, tally.node_count(), false);
  const auto S = post.states();
  if (previous.alpha_k.size() < S) invalid("alpha_k shorter than the posterior support");
  MStep out{previous, {}};
  const auto d = expected_degrees(post);
  const auto n = tally.node_count();
  const double total = std::accumulate(d.begin(), d.end(), 0.0);
  const double nd = static_cast<double>(n);
  out.params.omega = n > 0 ? total / (nd * nd) : previous.omega;
  out.params.phi.assign(n, 1.0);
  if (total > 0.0) {
    for (std::size_t i = 0; i < n; ++i) out.params.phi[i] = nd * d[i] / total;
  } else {
    out.held.emplace_back("phi reset to ones (no posterior edge mass)");
  }
  std::vector<bool> held;
  multiplicity_rates(post, tally, std::span(out.params.alpha_k).first(S), held);
  report_held(out, held, ModelKind::config, tally, S);
  return out;
}

MStep mstep_multimodal(const EdgePosterior& post, const MultimodalTally& tally,
                       const ModelParams& previous) {
  require_kind(previous, ModelKind::multimodal);
  check_shape(post, tally.node_count(), true);
  const auto M = tally.mode_count();
  if (previous.alpha_m.size() != M || previous.beta_m.size() != M)
    invalid("mode rates do not match the tally");
  MStep out{previous, {}};
  const double slots = tally.pair_slots();
  out.params.omega = slots > 0.0 ? binary_mass(post, slots) / slots : previous.omega;
  std::vector<double> num(2 * M, 0.0), den(2 * M, 0.0), q(2);
  for (const auto& row : tally.rows()) {
    post.distribution(row.pair.i, row.pair.j, q);
    for (std::size_t s = 0; s < 2; ++s)
      for (std::size_t m = 0; m < M; ++m) {
        num[s * M + m] += q[s] * row.positives[m];
        den[s * M + m] += q[s] * row.trials[m];
      }
  }
  auto rate = rates_of(ModelKind::multimodal, previous, 2);
  std::vector<bool> held;
  ratio_update(num, den, rate, held);
  store_rates(ModelKind::multimodal, out.params, rate, 2);
  report_held(out, held, ModelKind::multimodal, tally, 2);
  return out;
}

MStep mstep_pernode(const EdgePosterior& post, const MeasurementTally& tally,
                    const ModelParams& previous) {
  require_kind(previous, ModelKind::per_node);
  if (!tally.directed()) invalid("per-node M-step needs a directed tally");
  check_shape(post, tally.node_count(), false);
  const auto n = tally.node_count();
  const auto S = post.states();
  if (previous.alpha_ik.size() != n) invalid("alpha_ik does not match the node count");
  MStep out{previous, {}};
  const auto d = expected_degrees(post);
  const double total = std::accumulate(d.begin(), d.end(), 0.0);
  const double nd = static_cast<double>(n);
  out.params.omega = n > 0 ? total / (nd * nd) : previous.omega;
  out.params.phi.assign(n, 1.0);
  if (total > 0.0) {
    for (std::size_t i = 0; i < n; ++i) out.params.phi[i] = nd * d[i] / total;
  } else {
    out.held.emplace_back("phi reset to ones (no posterior edge mass)");
  }
  std::vector<double> num(n * S, 0.0), den(n * S, 0.0), q(S);
  for (const auto& pc : tally.pairs()) {
    post.distribution(pc.pair.i, pc.pair.j, q);
    for (std::size_t k = 0; k < S; ++k) {
      num[pc.pair.i * S + k] += q[k] * pc.positives;
      den[pc.pair.i * S + k] += q[k] * pc.trials;
    }
  }
  auto rate = rates_of(ModelKind::per_node, previous, S);
  std::vector<bool> held;
  ratio_update(num, den, rate, held);
  store_rates(ModelKind::per_node, out.params, rate, S);
  report_held(out, held, ModelKind::per_node, tally, S);
  return out;
}

FitResult run_em(const ModelId& model, const Dataset& data, const EmConfig& config,
                 const ModelParams* start) {
  config.validate();
  const auto kind = model.kind();
  const auto support = config.support();
  if (start) check_params(model, data, *start, support);

  const std::size_t runs = start ? 1 : config.restarts;
  std::optional<Run> best;
  FitResult result;
  for (std::size_t r = 0; r < runs; ++r) {
    auto p0 = start ? *start : initial_params(model, data, config, r);
    auto run = run_once(kind, data, config, std::move(p0));
    const double obj = run.trace.back();
    result.restart_objectives.push_back(obj);
    if (!run.converged)
      result.diagnostics.push_back(
          fmt::format("restart {}: no convergence after {} iterations", r, run.iterations));
    if (!best || obj > best->trace.back()) {
      best = std::move(run);
      result.restart_index = r;
    }
  }
  for (const auto& h : best->held) result.diagnostics.push_back(h);
  result.iterations = best->iterations;
  result.converged = best->converged;
  result.objective_trace = std::move(best->trace);
  result.posterior = posterior_at(model, data, best->params, support).posterior;
  result.params = std::move(best->params);
  return result;
}

FitResult em_edge_types(const MeasurementTally& tally, const EmConfig& config,
                        const ModelParams* start) {
  EmConfig c = config;
  if (start) {
    if (start->omega_types.size() < 2) invalid("edge-type model needs at least two states");
    c.edge_states = start->omega_types.size();
  }
  return run_em(ModelId::of(ModelKind::edge_types), tally, c, start);
}

}  // namespace netrecon
