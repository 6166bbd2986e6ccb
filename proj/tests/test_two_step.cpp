#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "sbmlab/rng.hpp"
#include "sbmlab/two_step.hpp"

using namespace sbmlab;

namespace {

Graph two_cliques(const LabelVector& x) {
  std::vector<Edge> edges;
  for (NodeId i = 0; i < x.size(); ++i) {
    for (NodeId j = i + 1; j < x.size(); ++j) {
      if (x[i] == x[j]) edges.push_back({i, j});
    }
  }
  return Graph::from_edges(static_cast<std::uint32_t>(x.size()), edges);
}

// Flip iff moving the node raises T * (intra edges) + its LLR term:
// T * (other - own) - s * hbar >= 0. Certain LLRs enter as +/- infinity.
bool flip_by_gain(int s, double own, double other, double hbar, double t) {
  return t * (other - own) - s * hbar >= 0.0;
}

}  // namespace

TEST_SUITE("two_step") {

TEST_CASE("default splitting parameter") {
  CHECK(default_d_split(100) == 2.0);
  CHECK(default_d_split(2000) == 3.0);  // log log 2000 = 2.03
  CHECK(default_d_split(1000000) == 3.0);
  CHECK(default_d_split(100000000) == 3.0);  // 2.91
}

TEST_CASE("flip rule matches the likelihood gain of a single move") {
  const double hbars[] = {-2.5, -1.0, -0.3, 0.0, 0.3, 1.0, 2.5};
  for (double t : {1.0, 0.7, 2.2}) {
    for (int s : {1, -1}) {
      for (std::size_t own = 0; own < 5; ++own) {
        for (std::size_t other = 0; other < 5; ++other) {
          for (double h : hbars) {
            CAPTURE(t);
            CAPTURE(s);
            CAPTURE(own);
            CAPTURE(other);
            CAPTURE(h);
            CHECK(flip_condition(static_cast<std::int8_t>(s), own, other, Llr::finite(h), t,
                                 ImprovementKind::llr) == flip_by_gain(s, own, other, h, t));
          }
          CHECK(flip_condition(static_cast<std::int8_t>(s), own, other, Llr::plus_certain(), t,
                               ImprovementKind::llr) == flip_by_gain(s, own, other, INFINITY, t));
          CHECK(flip_condition(static_cast<std::int8_t>(s), own, other, Llr::minus_certain(), t,
                               ImprovementKind::llr) == flip_by_gain(s, own, other, -INFINITY, t));
        }
      }
    }
  }
}

TEST_CASE("flip rule boundary is inclusive") {
  // Node in A with E[i,B] = E[i,A] + hbar / T exactly.
  CHECK(flip_condition(1, 2, 3, Llr::finite(1.0), 1.0, ImprovementKind::llr));
  CHECK(flip_condition(-1, 3, 2, Llr::finite(1.0), 1.0, ImprovementKind::llr));
  CHECK_FALSE(flip_condition(1, 2, 3, Llr::finite(1.5), 1.0, ImprovementKind::llr));
}

TEST_CASE("erasure rule follows revealed labels, else strict majority") {
  CHECK(flip_condition(1, 5, 0, Llr::minus_certain(), 1.0, ImprovementKind::erasure));
  CHECK_FALSE(flip_condition(1, 0, 5, Llr::plus_certain(), 1.0, ImprovementKind::erasure));
  CHECK_FALSE(flip_condition(1, 2, 2, Llr::finite(0.0), 1.0, ImprovementKind::erasure));
  CHECK(flip_condition(-1, 2, 3, Llr::finite(0.0), 1.0, ImprovementKind::erasure));
  CHECK_THROWS_AS(flip_condition(1, 2, 3, Llr::finite(0.5), 1.0, ImprovementKind::erasure),
                  std::invalid_argument);
}

TEST_CASE("zero edge weight leaves the decision to the side information") {
  CHECK(flip_condition(1, 9, 0, Llr::finite(-0.1), 0.0, ImprovementKind::llr));
  CHECK_FALSE(flip_condition(1, 0, 9, Llr::finite(0.1), 0.0, ImprovementKind::llr));
  CHECK_FALSE(flip_condition(-1, 0, 9, Llr::finite(-0.1), 0.0, ImprovementKind::llr));
}

TEST_CASE("weak recovery separates disjoint cliques") {
  std::vector<std::int8_t> v(40);
  for (std::size_t i = 0; i < 40; ++i) v[i] = (i * 7) % 40 < 20 ? 1 : -1;
  const LabelVector x(v);
  const auto r = weak_recovery(two_cliques(x), WeakRecoveryConfig{});
  const auto miss = mismatch_count(r.partition.assignment, x, true);
  CHECK(miss == 0);
  CHECK(r.partition.provenance == Provenance::weak_recovery);
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("weak recovery on an empty graph is flagged degenerate") {
  const auto r = weak_recovery(Graph(10), WeakRecoveryConfig{});
  CHECK(r.degenerate);
  std::size_t plus = 0;
  for (auto v : r.partition.assignment) plus += v == 1;
  CHECK(plus == 5);
}

TEST_CASE("weak recovery beats chance on an SBM draw") {
  const auto params = SbmParams::make(2000, 18.0, 2.0);
  const auto x = sample_labels(params, LabelMode::balanced, 4);
  const auto g = sample_graph(x, params, 5).graph;
  const auto split = split_graph(g, 3.0, 6);
  const auto r = weak_recovery(split.g1, WeakRecoveryConfig{});
  const double err = static_cast<double>(mismatch_count(r.partition.assignment, x, true)) / 2000.0;
  CHECK(err < 0.1);
}

TEST_CASE("a size change rolls every flip back") {
  // Path 0-1-2-3: node 0 sits alone on side A next to B and has a strong
  // LLR toward B, so it alone flips and |A| changes.
  const auto g = Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
  const Partition start{{1, -1, 1, -1}, Provenance::weak_recovery};
  LlrVector h;
  h.hbar = {Llr::finite(-5.0), Llr::finite(-5.0), Llr::finite(5.0), Llr::finite(-5.0)};
  const auto r = local_improve(g, start, h, 1.0, ImprovementKind::llr);
  CHECK(r.rolled_back);
  CHECK(r.partition.provenance == Provenance::rolled_back);
  CHECK(r.partition.assignment == start.assignment);
  CHECK(r.proposed == std::vector<std::int8_t>{-1, -1, 1, -1});
  CHECK(r.flips_a_to_b == 1);
}

TEST_CASE("balanced flips are kept") {
  const auto g = Graph::from_edges(4, {{0, 1}, {2, 3}});
  const Partition start{{1, -1, -1, 1}, Provenance::weak_recovery};
  LlrVector h;
  h.hbar.assign(4, Llr::finite(0.1));
  h.hbar[1] = Llr::finite(-0.1);
  h.hbar[2] = Llr::finite(-0.1);
  // Every node sees one edge to the other side; |hbar|/T = 0.1 < 1, so all
  // four flip and the sizes are unchanged.
  const auto r = local_improve(g, start, h, 1.0, ImprovementKind::llr);
  CHECK_FALSE(r.rolled_back);
  CHECK(r.partition.assignment == std::vector<std::int8_t>{-1, 1, 1, -1});
  CHECK(r.partition.provenance == Provenance::locally_improved);
}

TEST_CASE("sequential updates see earlier flips") {
  // Star around node 0 with all leaves on the other side. Synchronously the
  // center and every leaf swap; sequentially the leaves already see the
  // center on their side and stay.
  const auto g = Graph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
  const Partition start{{1, -1, -1, -1}, Provenance::weak_recovery};
  LlrVector h;
  h.hbar.assign(4, Llr::finite(0.0));
  const auto sync = local_improve(g, start, h, 1.0, ImprovementKind::erasure, 1, false);
  CHECK(sync.proposed == std::vector<std::int8_t>{-1, 1, 1, 1});
  CHECK(sync.flips_b_to_a == 3);
  const auto seq = local_improve(g, start, h, 1.0, ImprovementKind::erasure, 1, true);
  CHECK(seq.proposed == std::vector<std::int8_t>{-1, -1, -1, -1});
  CHECK(seq.flips_a_to_b == 1);
  CHECK(seq.flips_b_to_a == 0);
}

TEST_CASE("mismatch metric") {
  const LabelVector truth({1, 1, -1, -1});
  const std::vector<std::int8_t> pred{-1, -1, 1, -1};
  CHECK(mismatch_count(pred, truth, false) == 3);
  CHECK(mismatch_count(pred, truth, true) == 1);
}

TEST_CASE("two-step recovers an easy instance exactly") {
  const auto params = SbmParams::make(2000, 18.0, 2.0);
  const auto x = sample_labels(params, LabelMode::balanced, derive_seed(3, streams::kLabels));
  const auto g = sample_graph(x, params, derive_seed(3, streams::kGraph));
  const SideInfoModel model = NoisyLabels{0.3};
  const auto side = sample_side_info(x, model, derive_seed(3, streams::kSideInfo));
  const auto r = two_step_detect(g, side, model, TwoStepConfig{}, derive_seed(3, streams::kDetect));
  CHECK(r.success);
  CHECK(r.mismatches == 0);
  CHECK_FALSE(r.up_to_flip);
  CHECK(r.stage1_agreement > 0.9);
  CHECK(r.d_split == 3.0);
  const auto again = two_step_detect(g, side, model, TwoStepConfig{}, derive_seed(3, streams::kDetect));
  CHECK(again.labels == r.labels);
}

TEST_CASE("orientation uses the side information") {
  // With informative side information the metric is direct, so the stage-one
  // sign must be fixed by the observations.
  const auto params = SbmParams::make(1000, 12.0, 2.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto x = sample_labels(params, LabelMode::balanced, derive_seed(seed, streams::kLabels));
    const auto g = sample_graph(x, params, derive_seed(seed, streams::kGraph));
    const SideInfoModel model = Erasure{0.5};
    const auto side = sample_side_info(x, model, derive_seed(seed, streams::kSideInfo));
    const auto r = two_step_detect(g, side, model, TwoStepConfig{}, derive_seed(seed, streams::kDetect));
    CHECK(r.stage1_agreement > 0.5);
  }
}

}
