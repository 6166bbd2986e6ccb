#include "sbmlab/likelihood.hpp"

#include <bit>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

namespace sbmlab {
namespace {

// Side-information log-likelihood contributed by one node under each label.
struct NodeTerm {
  LikelihoodScore plus;
  LikelihoodScore minus;
};

LikelihoodScore log_or_impossible(double prob) {
  return prob > 0.0 ? LikelihoodScore{std::log(prob), false} : LikelihoodScore::minus_infinity();
}

// Noisy labels use the agreement-count form c * (J+(A) + J-(B)); the features
// model keeps the raw log-probabilities. Both differ from log P(y|x) only by a
// candidate-independent constant.
std::vector<NodeTerm> node_terms(const SideInfoObservation& side, const SideInfoModel& model,
                                 std::size_t n) {
  validate(model);
  if (side.size() != n) throw std::invalid_argument("likelihood: side information length != n");
  std::vector<NodeTerm> terms(n);
  if (const auto* m = std::get_if<NoisyLabels>(&model)) {
    const double c = std::log((1.0 - m->alpha) / m->alpha);
    for (std::size_t i = 0; i < n; ++i) {
      if (side.y[i] == 1) terms[i].plus.value = c;
      if (side.y[i] == -1) terms[i].minus.value = c;
    }
  } else if (std::holds_alternative<Erasure>(model)) {
    for (std::size_t i = 0; i < n; ++i) {
      if (side.y[i] == -1) terms[i].plus = LikelihoodScore::minus_infinity();
      if (side.y[i] == 1) terms[i].minus = LikelihoodScore::minus_infinity();
    }
  } else {
    const auto& laws = std::get<Features>(model).laws;
    if (side.num_features != laws.size()) {
      throw std::invalid_argument("likelihood: feature count mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < laws.size(); ++k) {
        const auto o = side.outcome(i, k);
        const auto p = log_or_impossible(laws[k].plus.at(o));
        const auto q = log_or_impossible(laws[k].minus.at(o));
        terms[i].plus = {terms[i].plus.value + p.value, terms[i].plus.impossible || p.impossible};
        terms[i].minus = {terms[i].minus.value + q.value,
                          terms[i].minus.impossible || q.impossible};
      }
    }
  }
  return terms;
}

// Shared by log_likelihood and ml_exact so equal candidates score bit-equal.
template <typename LabelAt>
LikelihoodScore combine(double weight, std::size_t intra_edges, const std::vector<NodeTerm>& terms,
                        LabelAt&& label_at) {
  LikelihoodScore score{weight * static_cast<double>(intra_edges), false};
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = label_at(i) == 1 ? terms[i].plus : terms[i].minus;
    score.value += t.value;
    score.impossible = score.impossible || t.impossible;
  }
  if (score.impossible) return LikelihoodScore::minus_infinity();
  return score;
}

bool lex_less(std::uint32_t mask_x, std::uint32_t mask_y, std::uint32_t n) {
  // Bit i set means node i is +1; +1 sorts before -1.
  for (std::uint32_t i = 0; i < n; ++i) {
    const bool xi = (mask_x >> i) & 1U;
    const bool yi = (mask_y >> i) & 1U;
    if (xi != yi) return xi;
  }
  return false;
}

bool is_tie(const LikelihoodScore& x, const LikelihoodScore& y) {
  if (x.impossible || y.impossible) return x.impossible && y.impossible;
  const double scale = std::max({1.0, std::abs(x.value), std::abs(y.value)});
  return std::abs(x.value - y.value) <= 1e-9 * scale;
}

}  // namespace

double edge_weight(const SbmParams& params, LikelihoodMode mode) {
  if (mode == LikelihoodMode::asymptotic) return std::log(params.a() / params.b());
  const double p = params.p();
  const double q = params.q();
  if (p >= 1.0 || q >= 1.0) {
    throw std::domain_error("exact likelihood undefined when p or q equals 1");
  }
  return std::log(p * (1.0 - q) / (q * (1.0 - p)));
}

LikelihoodScore log_likelihood(const Graph& g, const LabelVector& candidate,
                               const SideInfoObservation& side, const SideInfoModel& model,
                               const SbmParams& params, LikelihoodMode mode) {
  if (g.n() != params.n() || candidate.size() != params.n()) {
    throw std::invalid_argument("log_likelihood: graph, labels and params disagree on n");
  }
  if (!candidate.is_balanced()) throw std::invalid_argument("log_likelihood: candidate not balanced");
  const auto terms = node_terms(side, model, params.n());
  const double weight = edge_weight(params, mode);
  return combine(weight, intra_edge_count(g, candidate.values()), terms,
                 [&](std::size_t i) { return candidate[i]; });
}

MlResult ml_exact(const Graph& g, const SideInfoObservation& side, const SideInfoModel& model,
                  const SbmParams& params, LikelihoodMode mode, std::uint32_t cap) {
  const std::uint32_t n = params.n();
  if (cap > kMaxMlCap) {
    throw std::invalid_argument("ml_exact: cap above " + std::to_string(kMaxMlCap));
  }
  if (n > cap) {
    throw EnumerationCapExceeded("ml_exact: n=" + std::to_string(n) + " exceeds enumeration cap " +
                                 std::to_string(cap));
  }
  if (g.n() != n) throw std::invalid_argument("ml_exact: graph and params disagree on n");
  if (n % 2 != 0) throw std::invalid_argument("ml_exact: balanced enumeration needs even n");

  const auto terms = node_terms(side, model, n);
  const double weight = edge_weight(params, mode);
  std::vector<std::uint32_t> adjacency(n, 0);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j : g.neighbors(i)) adjacency[i] |= 1U << j;
  }
  const std::uint32_t full = n == 32 ? ~0U : (1U << n) - 1U;

  std::uint32_t best_mask = 0;
  LikelihoodScore best = LikelihoodScore::minus_infinity();
  std::size_t ties = 0;
  // Gosper's hack walks every n-bit mask with exactly n/2 bits set.
  std::uint32_t mask = (1U << (n / 2)) - 1U;
  while (mask <= full) {
    const std::uint32_t other = full & ~mask;
    std::size_t twice_intra = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::uint32_t side_mask = ((mask >> i) & 1U) ? mask : other;
      twice_intra += static_cast<std::size_t>(std::popcount(adjacency[i] & side_mask));
    }
    const auto score = combine(weight, twice_intra / 2, terms, [&](std::size_t i) {
      return ((mask >> i) & 1U) ? 1 : -1;
    });
    if (ties == 0 || (!is_tie(score, best) && score > best)) {
      best = score;
      best_mask = mask;
      ties = 1;
    } else if (is_tie(score, best)) {
      ++ties;
      if (lex_less(mask, best_mask, n)) best_mask = mask;
    }
    const std::uint32_t low = mask & -mask;
    const std::uint32_t ripple = mask + low;
    if (ripple == 0 || low == 0) break;
    mask = (((ripple ^ mask) >> 2) / low) | ripple;
  }

  std::vector<std::int8_t> labels(n);
  for (std::uint32_t i = 0; i < n; ++i) labels[i] = ((best_mask >> i) & 1U) ? 1 : -1;
  return MlResult{LabelVector(std::move(labels)), best, ties};
}

std::optional<std::pair<NodeId, NodeId>> failure_witness(const Graph& g,
                                                         const SideInfoObservation& side,
                                                         const SideInfoModel& model,
                                                         const LabelVector& truth,
                                                         const SbmParams& params) {
  if (g.n() != params.n() || truth.size() != params.n()) {
    throw std::invalid_argument("failure_witness: graph, labels and params disagree on n");
  }
  const double t = std::log(params.a() / params.b());
  const bool erasure = std::holds_alternative<Erasure>(model);
  const auto hbar = llr(model, side).hbar;
  if (hbar.size() != params.n()) throw std::invalid_argument("failure_witness: side info length");

  // Node x with label s: margin = E[x, other side] - E[x, own side].
  auto event = [&](NodeId x, int s) {
    const auto own = static_cast<long>(edges_to_side(g, x, truth.values(), static_cast<std::int8_t>(s)));
    const auto cross = static_cast<long>(edges_to_side(g, x, truth.values(), static_cast<std::int8_t>(-s)));
    const long margin = cross - own;
    if (erasure) return margin >= 1 && side.y[x] == 0;
    // s = +1: T*margin - hbar >= T;  s = -1: T*margin + hbar >= T.
    const Llr& h = hbar[x];
    if (!h.is_finite()) return h.sign() == -s;
    return t * static_cast<double>(margin) - s * h.value >= t;
  };

  std::optional<NodeId> in_a;
  std::optional<NodeId> in_b;
  for (NodeId x = 0; x < params.n() && !(in_a && in_b); ++x) {
    const int s = truth[x];
    if (s == 1 && !in_a && event(x, 1)) in_a = x;
    if (s == -1 && !in_b && event(x, -1)) in_b = x;
  }
  if (in_a && in_b) return std::make_pair(*in_a, *in_b);
  return std::nullopt;
}

}  // namespace sbmlab
