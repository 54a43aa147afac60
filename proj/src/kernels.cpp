// SPDX-License-Identifier: Apache-2.0
#include "kernels.hpp"

#include <algorithm>
#include <map>

namespace netrecon::detail {

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double log_normalize(std::span<double> v) {
  const double z = log_sum_exp(v);
  if (z == kNegInf) {
    // No state is compatible with the data; keep the row well defined.
    std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
    return z;
  }
  for (double& x : v) x = std::exp(x - z);
  return z;
}

namespace {

template <class Key, class Emit>
SignatureRows collect(std::size_t stored, std::size_t modes, double slots, bool merge, Key&& key_of,
                      Emit&& emit) {
  SignatureRows out;
  out.modes = modes;
  out.row_of_pair.resize(stored);
  out.unmeasured = slots - static_cast<double>(stored);
  std::map<std::vector<std::uint32_t>, std::uint32_t> seen;
  for (std::size_t p = 0; p < stored; ++p) {
    auto key = key_of(p);
    std::uint32_t row;
    auto it = merge ? seen.find(key) : seen.end();
    if (it != seen.end()) {
      row = it->second;
      out.weight[row] += 1.0;
    } else {
      row = static_cast<std::uint32_t>(out.weight.size());
      if (merge) seen.emplace(key, row);
      out.weight.push_back(1.0);
      emit(p, out);
    }
    out.row_of_pair[p] = row;
  }
  return out;
}

}  // namespace

SignatureRows signature_rows(const MeasurementTally& tally, bool merge) {
  auto pairs = tally.pairs();
  return collect(
      pairs.size(), 1, tally.pair_slots(), merge,
      [&](std::size_t p) { return std::vector<std::uint32_t>{pairs[p].trials, pairs[p].positives}; },
      [&](std::size_t p, SignatureRows& out) {
        out.trials.push_back(pairs[p].trials);
        out.positives.push_back(pairs[p].positives);
      });
}

SignatureRows signature_rows(const MultimodalTally& tally, bool merge) {
  auto rows = tally.rows();
  const auto m = tally.mode_count();
  return collect(
      rows.size(), m, tally.pair_slots(), merge,
      [&](std::size_t p) {
        std::vector<std::uint32_t> key(rows[p].trials);
        key.insert(key.end(), rows[p].positives.begin(), rows[p].positives.end());
        return key;
      },
      [&](std::size_t p, SignatureRows& out) {
        out.trials.insert(out.trials.end(), rows[p].trials.begin(), rows[p].trials.end());
        out.positives.insert(out.positives.end(), rows[p].positives.begin(),
                             rows[p].positives.end());
      });
}

Mixture mixture_for(ModelKind kind, const ModelParams& p, std::size_t states, std::size_t modes) {
  Mixture mix;
  mix.states = states;
  mix.modes = modes;
  switch (kind) {
    case ModelKind::bernoulli:
      mix.log_weight = {std::log1p(-p.omega), std::log(p.omega)};
      mix.rate = {p.beta, p.alpha};
      break;
    case ModelKind::multimodal:
      mix.log_weight = {std::log1p(-p.omega), std::log(p.omega)};
      mix.rate.assign(p.beta_m.begin(), p.beta_m.end());
      mix.rate.insert(mix.rate.end(), p.alpha_m.begin(), p.alpha_m.end());
      break;
    case ModelKind::poisson:
      for (std::size_t k = 0; k < states; ++k) mix.log_weight.push_back(poisson_log_weight(p.omega, k));
      mix.rate.assign(p.alpha_k.begin(), p.alpha_k.begin() + static_cast<std::ptrdiff_t>(states));
      break;
    case ModelKind::edge_types:
      for (std::size_t k = 0; k < states; ++k) mix.log_weight.push_back(std::log(p.omega_types[k]));
      mix.rate.assign(p.alpha_k.begin(), p.alpha_k.begin() + static_cast<std::ptrdiff_t>(states));
      break;
    default:
      throw Error(ErrorKind::unsupported, "model has no signature mixture");
  }
  return mix;
}

double mixture_estep(const SignatureRows& rows, const Mixture& mix, std::vector<double>& dist) {
  const auto S = mix.states;
  const auto M = mix.modes;
  dist.resize(rows.rows() * S);
  std::vector<double> lp(S);
  double objective = 0.0;
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const auto* n = rows.trials.data() + r * M;
    const auto* e = rows.positives.data() + r * M;
    for (std::size_t s = 0; s < S; ++s) {
      lp[s] = mix.log_weight[s];
      for (std::size_t m = 0; m < M; ++m) lp[s] += binom_log(e[m], n[m], mix.rate[s * M + m]);
    }
    objective += rows.weight[r] * log_normalize(lp);
    std::copy(lp.begin(), lp.end(), dist.begin() + static_cast<std::ptrdiff_t>(r * S));
  }
  if (rows.unmeasured > 0.0) objective += rows.unmeasured * log_sum_exp(mix.log_weight);
  return objective;
}

std::vector<double> mixture_prior(const Mixture& mix) {
  std::vector<double> q(mix.log_weight);
  log_normalize(q);
  return q;
}

std::vector<double> state_mass(const SignatureRows& rows, std::span<const double> dist,
                               std::size_t states) {
  std::vector<double> mass(states, 0.0);
  for (std::size_t r = 0; r < rows.rows(); ++r)
    for (std::size_t s = 0; s < states; ++s) mass[s] += rows.weight[r] * dist[r * states + s];
  return mass;
}

void mixture_rates(const SignatureRows& rows, std::span<const double> dist, std::size_t states,
                   std::span<double> rate, std::vector<bool>& held) {
  const auto M = rows.modes;
  std::vector<double> num(states * M, 0.0), den(states * M, 0.0);
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    for (std::size_t s = 0; s < states; ++s) {
      const double wq = rows.weight[r] * dist[r * states + s];
      for (std::size_t m = 0; m < M; ++m) {
        num[s * M + m] += wq * rows.positives[r * M + m];
        den[s * M + m] += wq * rows.trials[r * M + m];
      }
    }
  }
  held.assign(states * M, false);
  for (std::size_t x = 0; x < states * M; ++x) {
    if (den[x] > 0.0)
      rate[x] = clamp_rate(num[x] / den[x]);
    else
      held[x] = true;
  }
}

DegreeRows degree_rows(const MeasurementTally& tally) {
  DegreeRows out;
  out.n = tally.node_count();
  if (!tally.directed()) {
    for (const auto& p : tally.pairs()) {
      out.pairs.push_back(p.pair);
      out.n_ij.push_back(p.trials);
      out.e_ij.push_back(p.positives);
      out.n_ji.push_back(0);
      out.e_ji.push_back(0);
    }
    return out;
  }
  struct Both {
    std::uint32_t n_ij = 0, e_ij = 0, n_ji = 0, e_ji = 0;
  };
  std::map<NodePair, Both> acc;
  for (const auto& p : tally.pairs()) {
    if (p.pair.i < p.pair.j) {
      auto& b = acc[p.pair];
      b.n_ij = p.trials;
      b.e_ij = p.positives;
    } else {
      auto& b = acc[NodePair{p.pair.j, p.pair.i}];
      b.n_ji = p.trials;
      b.e_ji = p.positives;
    }
  }
  for (const auto& [pair, b] : acc) {
    out.pairs.push_back(pair);
    out.n_ij.push_back(b.n_ij);
    out.e_ij.push_back(b.e_ij);
    out.n_ji.push_back(b.n_ji);
    out.e_ji.push_back(b.e_ji);
  }
  return out;
}

DegreeSweep degree_sweep(const DegreeRows& rows, const DegreeModel& model, bool keep_dist) {
  const auto n = rows.n;
  const auto S = model.states;
  auto phi = [&](std::size_t i) { return model.phi.empty() ? 1.0 : model.phi[i]; };

  DegreeSweep out;
  out.degree.assign(n, 0.0);
  out.num.assign(model.rate.size(), 0.0);
  out.den.assign(model.rate.size(), 0.0);
  if (keep_dist) out.dist.reserve(rows.pairs.size() * S);

  std::vector<double> lp(S);
  std::size_t next = 0;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      const double lambda = model.omega * phi(i) * phi(j);
      for (std::size_t k = 0; k < S; ++k) lp[k] = poisson_log_weight(lambda, k);
      const bool stored =
          next < rows.pairs.size() && rows.pairs[next].i == i && rows.pairs[next].j == j;
      if (stored) {
        for (std::size_t k = 0; k < S; ++k) {
          const double ri = model.per_node ? model.rate[i * S + k] : model.rate[k];
          const double rj = model.per_node ? model.rate[j * S + k] : model.rate[k];
          lp[k] += binom_log(rows.e_ij[next], rows.n_ij[next], ri);
          lp[k] += binom_log(rows.e_ji[next], rows.n_ji[next], rj);
        }
      }
      out.objective += log_normalize(lp);
      double ahat = 0.0;
      for (std::size_t k = 1; k < S; ++k) ahat += static_cast<double>(k) * lp[k];
      out.degree[i] += ahat;
      out.degree[j] += ahat;
      if (stored) {
        for (std::size_t k = 0; k < S; ++k) {
          const double q = lp[k];
          const std::size_t xi = model.per_node ? i * S + k : k;
          const std::size_t xj = model.per_node ? j * S + k : k;
          out.num[xi] += q * rows.e_ij[next];
          out.den[xi] += q * rows.n_ij[next];
          out.num[xj] += q * rows.e_ji[next];
          out.den[xj] += q * rows.n_ji[next];
        }
        if (keep_dist) out.dist.insert(out.dist.end(), lp.begin(), lp.end());
        ++next;
      }
    }
  }
  double phi_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) phi_sq += phi(i) * phi(i);
  out.objective -= 0.5 * model.omega * phi_sq;
  return out;
}

}  // namespace netrecon::detail
