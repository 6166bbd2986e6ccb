#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "sbmlab/model_core.hpp"
#include "sbmlab/rng.hpp"

using namespace sbmlab;

TEST_SUITE("model_core") {

TEST_CASE("params reject invalid tuples") {
  CHECK_THROWS_AS(SbmParams::make(100, 1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(SbmParams::make(100, 2.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(SbmParams::make(1, 2.0, 1.0), std::invalid_argument);
  // 20 log(10)/10 > 1
  CHECK_THROWS_AS(SbmParams::make(10, 20.0, 1.0), std::invalid_argument);
  const auto p = SbmParams::make(1000, 5.0, 1.0);
  CHECK(p.p() == doctest::Approx(5.0 * std::log(1000.0) / 1000.0).epsilon(1e-15));
  CHECK(p.q() == doctest::Approx(std::log(1000.0) / 1000.0).epsilon(1e-15));
}

TEST_CASE("p equal to one is accepted") {
  // a = n / log n makes p exactly 1 up to rounding.
  const double a = 8.0 / std::log(8.0);
  const auto p = SbmParams::make(8, a, 1.0);
  CHECK(p.p() == 1.0);
}

TEST_CASE("balanced labels have exactly n/2 plus entries") {
  const auto params = SbmParams::make(200, 5.0, 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = sample_labels(params, LabelMode::balanced, seed);
    CHECK(x.size() == 200);
    CHECK(x.is_balanced());
  }
  CHECK_THROWS_AS(sample_labels(SbmParams::make(201, 5.0, 1.0), LabelMode::balanced, 1),
                  std::invalid_argument);
  CHECK_NOTHROW(sample_labels(SbmParams::make(201, 5.0, 1.0), LabelMode::iid, 1));
}

TEST_CASE("label vector rejects zero entries") {
  CHECK_THROWS_AS(LabelVector({1, 0, -1}), std::invalid_argument);
  const LabelVector x({1, -1, -1, 1});
  CHECK(x.flipped() == LabelVector({-1, 1, 1, -1}));
}

TEST_CASE("graph from edges canonicalizes") {
  const auto g = Graph::from_edges(5, {{3, 1}, {1, 3}, {0, 4}, {2, 1}});
  CHECK(g.num_edges() == 3);
  CHECK(g.has_edge(1, 3));
  CHECK(g.has_edge(3, 1));
  CHECK_FALSE(g.has_edge(0, 1));
  const std::vector<Edge> expected{{0, 4}, {1, 2}, {1, 3}};
  CHECK(g.edges() == expected);
  const auto nb = g.neighbors(1);
  CHECK(std::vector<NodeId>(nb.begin(), nb.end()) == std::vector<NodeId>{2, 3});
  CHECK_THROWS_AS(Graph::from_edges(3, {{1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 3}}), std::invalid_argument);
}

TEST_CASE("sampled graph is reproducible and edge counts match p and q") {
  const std::uint32_t n = 1000;
  const auto params = SbmParams::make(n, 8.0, 2.0);
  const auto x = sample_labels(params, LabelMode::balanced, 7);
  const auto g1 = sample_graph(x, params, 11);
  const auto g2 = sample_graph(x, params, 11);
  CHECK(g1.graph == g2.graph);
  CHECK_FALSE(sample_graph(x, params, 12).graph == g1.graph);

  // Pool 20 graphs; intra pairs 2 * C(500, 2), cross pairs 500^2.
  double intra = 0;
  double cross = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto g = sample_graph(x, params, 100 + s).graph;
    const double e_intra = static_cast<double>(intra_edge_count(g, x.values()));
    intra += e_intra;
    cross += static_cast<double>(g.num_edges()) - e_intra;
  }
  const double intra_pairs = 20.0 * 2 * 500.0 * 499.0 / 2;
  const double cross_pairs = 20.0 * 500.0 * 500.0;
  auto z = [](double count, double pairs, double prob) {
    return (count - pairs * prob) / std::sqrt(pairs * prob * (1 - prob));
  };
  CHECK(std::abs(z(intra, intra_pairs, params.p())) < 5.0);
  CHECK(std::abs(z(cross, cross_pairs, params.q())) < 5.0);
}

TEST_CASE("dense sampling matches pairwise coin flips in distribution") {
  // At p = 1 every intra pair is present and no cross pair is missing at q = 1.
  const double a = 8.0 / std::log(8.0);
  const auto params = SbmParams::make(8, a, a);
  const auto x = sample_labels(params, LabelMode::balanced, 3);
  const auto g = sample_graph(x, params, 4).graph;
  CHECK(g.num_edges() == 28);
}

TEST_CASE("split partitions the edge set") {
  const auto params = SbmParams::make(2000, 10.0, 2.0);
  const auto x = sample_labels(params, LabelMode::balanced, 1);
  const auto g = sample_graph(x, params, 2).graph;
  const double d = 3.0;
  const auto split = split_graph(g, d, 5);
  CHECK(split.g1.num_edges() + split.g2.num_edges() == g.num_edges());
  for (const auto& e : split.g1.edges()) {
    CHECK(g.has_edge(e.u, e.v));
    CHECK_FALSE(split.g2.has_edge(e.u, e.v));
  }
  for (const auto& e : split.g2.edges()) CHECK(g.has_edge(e.u, e.v));
  // Fraction kept in G1 is d / log n up to binomial noise.
  const double frac = static_cast<double>(split.g1.num_edges()) / static_cast<double>(g.num_edges());
  const double target = d / std::log(2000.0);
  const double sd = std::sqrt(target * (1 - target) / static_cast<double>(g.num_edges()));
  CHECK(std::abs(frac - target) < 5 * sd);
  CHECK_THROWS_AS(split_graph(g, 100.0, 5), std::invalid_argument);
}

TEST_CASE("edge counting helpers") {
  const auto g = Graph::from_edges(6, {{0, 1}, {0, 2}, {0, 5}, {3, 4}, {1, 2}});
  const std::vector<std::int8_t> x{1, 1, -1, -1, -1, 1};
  CHECK(edges_to_side(g, 0, x, 1) == 2);
  CHECK(edges_to_side(g, 0, x, -1) == 1);
  const auto plus = members(x, 1);
  CHECK(plus == std::vector<NodeId>{0, 1, 5});
  CHECK(edges_between(g, 2, plus) == 2);
  CHECK(intra_edge_count(g, x) == 3);
  CHECK(hamming(x, std::vector<std::int8_t>{1, -1, -1, -1, 1, 1}) == 2);
  CHECK_THROWS_AS(edges_between(g, 9, plus), std::invalid_argument);
}

TEST_CASE("seed derivation separates streams") {
  std::set<std::uint64_t> seen;
  for (auto label : {streams::kLabels, streams::kGraph, streams::kSideInfo, streams::kSplit,
                     streams::kDetect}) {
    seen.insert(derive_seed(42, label));
  }
  for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derive_seed(42, i));
  CHECK(seen.size() == 105);
  CHECK(derive_seed(42, streams::kGraph) == derive_seed(42, streams::kGraph));
}

TEST_CASE("geometric skip has mean (1 - p) / p") {
  Rng rng(9);
  const double p = 0.05;
  double sum = 0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) sum += static_cast<double>(rng.geometric_skip(p));
  const double mean = (1 - p) / p;
  const double sd = std::sqrt((1 - p) / (p * p) / draws);
  CHECK(std::abs(sum / draws - mean) < 5 * sd);
}

}
