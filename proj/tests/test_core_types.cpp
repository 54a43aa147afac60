// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "netrecon/types.hpp"

using namespace netrecon;

TEST_CASE("build_tallies counts observations per pair") {
  std::vector<Observation> obs{{"a", "b", 1}, {"a", "b", 0}, {"b", "a", 1}};
  auto t = build_tallies(obs, false);
  REQUIRE(t.pairs().size() == 1);
  CHECK(t.pairs()[0].trials == 3);
  CHECK(t.pairs()[0].positives == 2);
  CHECK(t.node_count() == 2);
}

TEST_CASE("build_tallies on no observations") {
  auto t = build_tallies({}, false);
  CHECK(t.node_count() == 0);
  CHECK(t.pairs().empty());
}

TEST_CASE("eight positive measurements of one pair") {
  std::vector<Observation> obs(8, Observation{"u", "v", 1});
  auto t = build_tallies(obs, false);
  CHECK(t.find(0, 1)->trials == 8);
  CHECK(t.find(1, 0)->positives == 8);
}

TEST_CASE("build_tallies rejects self observations and bad outcomes") {
  std::vector<Observation> self{{"a", "a", 1}};
  CHECK_THROWS_AS(build_tallies(self, false), Error);
  std::vector<Observation> bad{{"a", "b", 2}};
  CHECK_THROWS_AS(build_tallies(bad, false), Error);
}

TEST_CASE("undirected tallies never hold both orientations") {
  std::vector<Observation> obs{{"a", "b", 1}, {"b", "a", 0}, {"c", "a", 1}};
  auto t = build_tallies(obs, false);
  for (const auto& p : t.pairs()) CHECK(p.pair.i < p.pair.j);
  CHECK(t.pairs().size() == 2);

  auto d = build_tallies(obs, true);
  CHECK(d.pairs().size() == 3);
  CHECK(d.find(0, 1)->positives == 1);
  CHECK(d.find(1, 0)->positives == 0);
}

TEST_CASE("node ids follow first appearance") {
  NodeIndex idx;
  CHECK(idx.intern("z") == 0);
  CHECK(idx.intern("a") == 1);
  CHECK(idx.intern("z") == 0);
  CHECK(idx.label(1) == "a");
  CHECK(*idx.find("a") == 1);
  CHECK_FALSE(idx.find("q").has_value());
}

TEST_CASE("tally validation") {
  auto nodes = NodeIndex::numbered(3);
  CHECK_THROWS_AS(MeasurementTally(nodes, false, {{{0, 1}, 2, 3}}), Error);
  CHECK_THROWS_AS(MeasurementTally(nodes, false, {{{1, 1}, 2, 1}}), Error);
  CHECK_THROWS_AS(MeasurementTally(nodes, false, {{{0, 1}, 2, 1}, {{1, 0}, 1, 1}}), Error);
  CHECK_THROWS_AS(MeasurementTally(nodes, false, {{{0, 5}, 2, 1}}), Error);
  MeasurementTally t(nodes, false, {{{2, 0}, 4, 1}});
  CHECK(t.pairs()[0].pair == NodePair{0, 2});
  CHECK(t.pair_slots() == 3.0);
  MeasurementTally d(nodes, true, {});
  CHECK(d.pair_slots() == 6.0);
}

TEST_CASE("direction_summed folds ordered pairs") {
  auto nodes = NodeIndex::numbered(3);
  MeasurementTally d(nodes, true, {{{0, 1}, 2, 1}, {{1, 0}, 3, 3}, {{2, 1}, 1, 0}});
  auto u = d.direction_summed();
  CHECK_FALSE(u.directed());
  CHECK(u.find(0, 1)->trials == 5);
  CHECK(u.find(0, 1)->positives == 4);
  CHECK(u.find(1, 2)->trials == 1);
}

TEST_CASE("multimodal tally") {
  auto nodes = NodeIndex::numbered(3);
  MultimodalTally t(nodes, {"gut", "damage"}, {{{1, 0}, {1, 1}, {1, 0}}, {{0, 2}, {0, 1}, {0, 1}}});
  CHECK(t.mode_count() == 2);
  CHECK(t.find(1, 0)->positives[0] == 1);
  CHECK(t.find(0, 1) == nullptr);
  auto m1 = t.mode_tally(1);
  CHECK(m1.directed());
  CHECK(m1.pairs().size() == 2);
  CHECK_THROWS_AS(MultimodalTally(nodes, {"x"}, {{{1, 0}, {1, 1}, {1, 0}}}), Error);
  CHECK_THROWS_AS(MultimodalTally(nodes, {"x"}, {{{1, 0}, {1}, {2}}}), Error);
}

TEST_CASE("parameter validation") {
  ModelParams p;
  p.omega = 0.1;
  p.alpha = 0.9;
  p.beta = 0.1;
  CHECK_NOTHROW(p.validate());
  p.alpha = 1.2;
  CHECK_THROWS_AS(p.validate(), Error);
  p.alpha = 0.9;
  p.phi = {0.5, 1.0, 1.6};
  CHECK_THROWS_AS(p.validate(), Error);
  p.phi = {0.5, 1.0, 1.5};
  CHECK_NOTHROW(p.validate());
  p.omega_types = {0.5, 0.4};
  CHECK_THROWS_AS(p.validate(), Error);
  p.omega_types = {0.5, 0.4, 0.1};
  CHECK_NOTHROW(p.validate());
  p.omega = 1.5;
  CHECK_THROWS_AS(p.validate(), Error);
  p.network_model = NetworkModel::poisson_rg;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("network canonicalisation and self-edge convention") {
  Network a(3, false, {{2, 0, 1}, {1, 1, 2}, {0, 1, 0}});
  CHECK(a.at(0, 2) == 1);
  CHECK(a.at(2, 0) == 1);
  CHECK(a.at(1, 1) == 2);
  CHECK(a.edges().size() == 2);
  CHECK_FALSE(a.is_simple());
  CHECK(a.adjacency_sum() == 4.0);
  CHECK_THROWS_AS(Network(3, false, {{1, 1, 1}}), Error);
  CHECK_THROWS_AS(Network(3, true, {{1, 1, 2}}), Error);
  Network d(3, true, {{2, 0, 1}});
  CHECK(d.at(2, 0) == 1);
  CHECK(d.at(0, 2) == 0);
}

TEST_CASE("posterior storage and implicit pairs") {
  PairPrior prior{PosteriorForm::binary, 2, 0.25, {}, {}};
  EdgePosterior q(3, false, prior, {{0, 2}}, {0.1, 0.9});
  CHECK(q.edge_probability(2, 0) == doctest::Approx(0.9));
  CHECK(q.edge_probability(0, 1) == 0.25);
  CHECK(q.edge_probability(1, 1) == 0.0);
  std::vector<NodePair> seen;
  q.for_each_pair([&](NodeId i, NodeId j, std::span<const double>) { seen.push_back({i, j}); });
  CHECK(seen == std::vector<NodePair>{{0, 1}, {0, 2}, {1, 2}});

  CHECK_THROWS_AS(EdgePosterior(3, false, prior, {{0, 2}}, {0.2, 0.9}), Error);
  CHECK_THROWS_AS(EdgePosterior(3, false, prior, {{2, 0}}, {0.1, 0.9}), Error);
}

TEST_CASE("multiplicity prior is a truncated Poisson") {
  PairPrior prior{PosteriorForm::multiplicity, 3, 0.5, {2.0, 0.5, 0.5}, {}};
  std::vector<double> q(3);
  prior.distribution(0, 1, q);
  // lambda = 0.5 * 2 * 0.5 = 0.5; weights 1, 0.5, 0.125
  CHECK(q[0] == doctest::Approx(1.0 / 1.625).epsilon(1e-14));
  CHECK(q[2] == doctest::Approx(0.125 / 1.625).epsilon(1e-14));
  CHECK(distribution_mean(q) == doctest::Approx((0.5 + 0.25) / 1.625).epsilon(1e-14));
}
