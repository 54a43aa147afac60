// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "netrecon/posterior.hpp"
#include "support.hpp"

using namespace netrecon;

namespace {

EdgePosterior random_full(std::mt19937_64& rng, std::size_t n, bool directed, std::size_t states,
                          PosteriorForm form) {
  std::vector<NodePair> pairs;
  std::vector<double> dist;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = directed ? 0 : i + 1; j < n; ++j) {
      if (i == j) continue;
      pairs.push_back({i, j});
      std::vector<double> q(states);
      for (auto& v : q) v = fixture::uniform(rng, 0.0, 1.0);
      const double z = std::accumulate(q.begin(), q.end(), 0.0);
      for (auto v : q) dist.push_back(v / z);
    }
  PairPrior prior{form, states, 0.0, {}, {}};
  if (form == PosteriorForm::edge_state) prior.state_weights.assign(states, 1.0 / states);
  return EdgePosterior(n, directed, prior, pairs, dist);
}

// Exact mean and variance of the average degree by enumerating every joint state.
std::pair<double, double> enumerate_degree(const EdgePosterior& q) {
  const auto pairs = q.stored_pairs();
  const std::size_t s = q.prior().states;
  std::size_t total = 1;
  for (std::size_t x = 0; x < pairs.size(); ++x) total *= s;
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    double p = 1.0;
    std::vector<Network::Edge> edges;
    for (std::size_t x = 0; x < pairs.size(); ++x) {
      const std::size_t k = c % s;
      c /= s;
      p *= q.stored_distribution(x)[k];
      if (k > 0) edges.push_back({pairs[x].i, pairs[x].j, static_cast<std::uint32_t>(k)});
    }
    const double d = average_degree(Network(q.node_count(), q.directed(), edges),
                                    q.prior().form == PosteriorForm::edge_state);
    m1 += p * d;
    m2 += p * d * d;
  }
  return {m1, m2 - m1 * m1};
}

}  // namespace

TEST_CASE("mean degree closed form") {
  SUBCASE("certain edges") {
    PairPrior prior{PosteriorForm::binary, 2, 0.0, {}, {}};
    EdgePosterior q(4, false, prior, {{0, 1}, {1, 2}}, {0, 1, 0, 1});
    auto e = mean_degree(q);
    CHECK(e.mean == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(e.std == 0.0);
    CHECK(e.n_samples == 0);
  }
  SUBCASE("coin-flip triangle") {
    PairPrior prior{PosteriorForm::binary, 2, 0.5, {}, {}};
    EdgePosterior q(3, false, prior, {}, {});
    auto e = mean_degree(q);
    CHECK(e.mean == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(e.std == doctest::Approx(2.0 * std::sqrt(0.75) / 3.0).epsilon(1e-15));
  }
  SUBCASE("agrees with enumeration") {
    std::mt19937_64 rng(3);
    struct Case {
      std::size_t n;
      bool directed;
      std::size_t states;
      PosteriorForm form;
    };
    for (auto c : {Case{4, false, 2, PosteriorForm::binary}, Case{3, true, 2, PosteriorForm::binary},
                   Case{3, false, 4, PosteriorForm::multiplicity},
                   Case{3, false, 3, PosteriorForm::edge_state}}) {
      for (int rep = 0; rep < 5; ++rep) {
        auto q = random_full(rng, c.n, c.directed, c.states, c.form);
        auto [mu, var] = enumerate_degree(q);
        auto e = mean_degree(q);
        CHECK(std::abs(e.mean - mu) <= 1e-13);
        CHECK(std::abs(e.std * e.std - var) <= 1e-13);
      }
    }
  }
}

TEST_CASE("average degree of a network") {
  Network u(4, false, {{0, 1, 1}, {1, 2, 2}, {3, 3, 2}});
  CHECK(average_degree(u) == doctest::Approx(2.0 * 3.0 / 4.0 + 0.5));
  CHECK(average_degree(u, true) == doctest::Approx(2.0 * 2.0 / 4.0 + 0.25));
  Network d(3, true, {{0, 1, 1}, {1, 0, 1}, {2, 0, 1}});
  CHECK(average_degree(d) == doctest::Approx(1.0));
}

TEST_CASE("sampling") {
  PairPrior prior{PosteriorForm::binary, 2, 0.0, {}, {}};
  EdgePosterior q(3, false, prior, {{0, 1}, {1, 2}}, {0.7, 0.3, 0.0, 1.0});
  SUBCASE("edge frequencies converge to Q") {
    std::mt19937_64 rng(17);
    const int draws = 20000;
    int hits = 0, always = 0, never = 0;
    for (int s = 0; s < draws; ++s) {
      auto a = sample_network(q, rng);
      hits += a.at(0, 1);
      always += a.at(1, 2);
      never += a.at(0, 2);
    }
    const double se = std::sqrt(0.3 * 0.7 / draws);
    CHECK(std::abs(hits / double(draws) - 0.3) < 4 * se);
    CHECK(always == draws);
    CHECK(never == 0);
  }
  SUBCASE("a seed fixes the draw") {
    auto a = sample_network(q, 5);
    auto b = sample_network(q, 5);
    CHECK(std::ranges::equal(a.edges(), b.edges(), [](auto x, auto y) { return x.i == y.i && x.j == y.j && x.multiplicity == y.multiplicity; }));
  }
  SUBCASE("multiplicities follow the distribution") {
    PairPrior mp{PosteriorForm::multiplicity, 3, 0.0, {}, {}};
    EdgePosterior m(2, false, mp, {{0, 1}}, {0.2, 0.5, 0.3});
    std::mt19937_64 rng(2);
    std::array<int, 3> count{};
    const int draws = 30000;
    for (int s = 0; s < draws; ++s) ++count[sample_network(m, rng).at(0, 1)];
    for (int k = 0; k < 3; ++k) {
      const double p = std::array{0.2, 0.5, 0.3}[k];
      CHECK(std::abs(count[k] / double(draws) - p) < 4 * std::sqrt(p * (1 - p) / draws));
    }
  }
}

TEST_CASE("Monte Carlo functionals") {
  std::mt19937_64 rng(41);
  auto q = random_full(rng, 6, false, 2, PosteriorForm::binary);
  auto closed = mean_degree(q);
  auto mc = estimate_functional(q, [](const Network& a) { return average_degree(a); }, 100000, 9);
  CHECK(mc.n_samples == 100000);
  CHECK(std::abs(mc.mean - closed.mean) < 4 * closed.std / std::sqrt(1e5));
  CHECK(mc.std == doctest::Approx(closed.std).epsilon(0.02));

  int calls = 0;
  auto flaky = estimate_functional(
      q,
      [&](const Network& a) {
        if (++calls % 4 == 0) throw std::runtime_error("disconnected");
        return average_degree(a);
      },
      100, 1);
  CHECK(flaky.skipped == 25);
  CHECK(flaky.n_samples == 75);
  auto none = estimate_functional(
      q, [](const Network&) -> double { throw std::domain_error("undefined"); }, 10, 1);
  CHECK(none.skipped == 10);
  CHECK(none.n_samples == 0);
  CHECK_THROWS_AS(estimate_functional(q, [](const Network&) { return 0.0; }, 1, 1), Error);
}

TEST_CASE("MAP network") {
  std::mt19937_64 rng(6);
  auto q = random_full(rng, 8, false, 2, PosteriorForm::binary);
  std::size_t previous = SIZE_MAX;
  for (double t : {0.05, 0.2, 0.4, 0.6, 0.8, 0.95}) {
    auto a = map_network(q, t);
    CHECK(a.is_simple());
    CHECK(a.edges().size() <= previous);
    previous = a.edges().size();
    for (const auto& e : a.edges()) CHECK(q.edge_probability(e.i, e.j) > t);
  }
  PairPrior prior{PosteriorForm::binary, 2, 0.0, {}, {}};
  EdgePosterior half(2, false, prior, {{0, 1}}, {0.5, 0.5});
  CHECK(map_network(half).edges().empty());
  CHECK_THROWS_AS(map_network(half, 1.0), Error);
  CHECK_THROWS_AS(map_network(half, 0.0), Error);
}

TEST_CASE("certainty bands") {
  CHECK(certainty_band(0.95) == Certainty::high);
  CHECK(certainty_band(0.9) == Certainty::medium);
  CHECK(certainty_band(0.5) == Certainty::medium);
  CHECK(certainty_band(0.1) == Certainty::medium);
  CHECK(certainty_band(0.02) == Certainty::low);
  CHECK(parse_certainty("high") == Certainty::high);
  CHECK(to_string(Certainty::medium) == "medium");
  CHECK_THROWS_AS(parse_certainty("sure"), Error);

  PairPrior prior{PosteriorForm::binary, 2, 0.0, {}, {}};
  EdgePosterior q(3, false, prior, {{0, 1}, {0, 2}, {1, 2}}, {0.01, 0.99, 0.5, 0.5, 0.97, 0.03});
  std::vector<LabelledPair> labels{{{0, 1}, Certainty::high},
                                   {{0, 2}, Certainty::high},
                                   {{1, 2}, Certainty::low},
                                   {{1, 0}, Certainty::high}};
  CHECK(band_agreement(q, labels) == doctest::Approx(0.75));
}

TEST_CASE("false discovery rate") {
  auto p = fixture::params_for(ModelKind::multimodal);
  p.omega = 0.01;
  p.alpha_m = {0.5, 0.0};
  p.beta_m = {0.01, 0.0};
  auto r = false_discovery_rate(p, 0);
  CHECK(r.value == doctest::Approx(0.99 * 0.01 / (0.005 + 0.0099)).epsilon(1e-14));
  CHECK_FALSE(r.degenerate);
  CHECK(false_discovery_rate(p, 1).degenerate);
  CHECK_THROWS_AS(false_discovery_rate(p, 2), Error);

  auto b = fixture::params_for(ModelKind::bernoulli);
  b.omega = 0.2;
  b.alpha = 0.8;
  b.beta = 0.1;
  CHECK(false_discovery_rate(b, 0).value == doctest::Approx(0.08 / (0.16 + 0.08)).epsilon(1e-14));
}

TEST_CASE("reporter precision") {
  auto p = fixture::params_for(ModelKind::per_node);
  p.omega = 0.1;
  p.phi = {1.0, 2.0, 0.5, 0.5};
  p.alpha_ik = {{0.05, 0.8}, {0.1, 0.6}, {0.05, 0.8}, {0.05, 0.8}};
  MeasurementTally t(NodeIndex::numbered(4), true,
                     {{{0, 1}, 2, 1}, {{0, 2}, 2, 2}, {{0, 3}, 2, 0}, {{1, 0}, 1, 0}});
  auto prec = [](double l, double a, double b) { return l * a / (l * a + b); };
  const double expect = (prec(0.2, 0.8, 0.05) + prec(0.05, 0.8, 0.05)) / 2.0;
  REQUIRE(reporter_precision(p, t, 0).has_value());
  CHECK(*reporter_precision(p, t, 0) == doctest::Approx(expect).epsilon(1e-14));
  CHECK_FALSE(reporter_precision(p, t, 1).has_value());
  CHECK_FALSE(reporter_precision(p, t, 3).has_value());
}

TEST_CASE("thresholded mean degree") {
  MeasurementTally u(NodeIndex::numbered(3), false, {{{0, 1}, 3, 2}, {{1, 2}, 3, 1}, {{0, 2}, 3, 0}});
  CHECK(threshold_mean_degree(u, 1) == doctest::Approx(4.0 / 3.0));
  CHECK(threshold_mean_degree(u, 2) == doctest::Approx(2.0 / 3.0));
  CHECK(threshold_mean_degree(u, 3) == 0.0);
  MeasurementTally d(NodeIndex::numbered(2), true, {{{0, 1}, 1, 1}, {{1, 0}, 1, 1}});
  CHECK(threshold_mean_degree(d, 1) == doctest::Approx(1.0));
}
