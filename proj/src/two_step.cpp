#include "sbmlab/two_step.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sbmlab/rng.hpp"

namespace sbmlab {
namespace {

using Vec = std::vector<double>;

double dot(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

bool normalize(Vec& x) {
  const double norm = std::sqrt(dot(x, x));
  if (!(norm > 0.0)) return false;
  for (double& v : x) v /= norm;
  return true;
}

double distance(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s);
}

// Fixed pseudo-random start in [0.5, 1) with a hashed sign; never orthogonal
// to a community vector in practice and independent of any trial seed.
double start_value(std::size_t i, bool signed_start) {
  const std::uint64_t h = derive_seed(0x5eedULL, static_cast<std::uint64_t>(i));
  const double mag = 0.5 + 0.5 * static_cast<double>(h >> 11) * 0x1.0p-53;
  return signed_start && (h & 1U) ? -mag : mag;
}

// Adjacency restricted to the kept (untrimmed) nodes, in local indices.
struct KeptGraph {
  std::vector<NodeId> nodes;
  std::vector<std::vector<std::uint32_t>> adj;
};

KeptGraph restrict_to(const Graph& g, const std::vector<bool>& trimmed) {
  KeptGraph kg;
  std::vector<std::uint32_t> local(g.n(), 0);
  for (NodeId i = 0; i < g.n(); ++i) {
    if (!trimmed[i]) {
      local[i] = static_cast<std::uint32_t>(kg.nodes.size());
      kg.nodes.push_back(i);
    }
  }
  kg.adj.resize(kg.nodes.size());
  for (std::size_t li = 0; li < kg.nodes.size(); ++li) {
    for (NodeId j : g.neighbors(kg.nodes[li])) {
      if (!trimmed[j]) kg.adj[li].push_back(local[j]);
    }
  }
  return kg;
}

struct PowerResult {
  Vec vec;
  bool converged = false;
  int iterations = 0;
};

// Power iteration on (matrix + shift * I), optionally projected away from
// `deflate` after every step.
template <typename Apply>
PowerResult power_iterate(std::size_t dim, Apply&& apply, double shift, const Vec* deflate,
                          bool signed_start, const WeakRecoveryConfig& config) {
  PowerResult r;
  r.vec.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) r.vec[i] = start_value(i, signed_start);
  auto project = [&](Vec& x) {
    if (deflate == nullptr) return;
    const double c = dot(*deflate, x);
    for (std::size_t i = 0; i < dim; ++i) x[i] -= c * (*deflate)[i];
  };
  project(r.vec);
  if (!normalize(r.vec)) return r;
  Vec next(dim);
  for (int it = 1; it <= config.max_iterations; ++it) {
    apply(r.vec, next);
    for (std::size_t i = 0; i < dim; ++i) next[i] += shift * r.vec[i];
    project(next);
    if (!normalize(next)) {
      r.iterations = it;
      return r;
    }
    const double delta = std::min(distance(next, r.vec), [&] {
      double s = 0.0;
      for (std::size_t i = 0; i < dim; ++i) s += (next[i] + r.vec[i]) * (next[i] + r.vec[i]);
      return std::sqrt(s);
    }());
    r.vec.swap(next);
    r.iterations = it;
    if (delta < config.tolerance) {
      r.converged = true;
      return r;
    }
  }
  return r;
}

std::size_t count_side(std::span<const std::int8_t> x, std::int8_t side) {
  return static_cast<std::size_t>(std::count(x.begin(), x.end(), side));
}

}  // namespace

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::weak_recovery:
      return "weak_recovery";
    case Provenance::locally_improved:
      return "locally_improved";
    case Provenance::rolled_back:
      return "rolled_back";
  }
  return "unknown";
}

double default_d_split(std::uint32_t n) {
  const double loglog = std::log(std::log(static_cast<double>(n)));
  return std::max(2.0, std::ceil(loglog));
}

WeakRecoveryResult weak_recovery(const Graph& g1, const WeakRecoveryConfig& config) {
  if (!(config.tolerance > 0.0)) throw std::invalid_argument("weak_recovery: tolerance must be > 0");
  if (config.max_iterations < 1) throw std::invalid_argument("weak_recovery: max_iterations < 1");
  const std::uint32_t n = g1.n();
  const std::size_t plus_target = n / 2;
  WeakRecoveryResult out;
  out.partition.assignment.assign(n, -1);

  if (g1.num_edges() == 0) {
    std::fill_n(out.partition.assignment.begin(), plus_target, std::int8_t{1});
    out.degenerate = true;
    return out;
  }

  const double avg_degree = 2.0 * static_cast<double>(g1.num_edges()) / n;
  std::vector<bool> trimmed(n, false);
  for (NodeId i = 0; i < n; ++i) {
    if (static_cast<double>(g1.degree(i)) > config.trim_multiplier * avg_degree) {
      trimmed[i] = true;
      ++out.trimmed;
    }
  }
  const KeptGraph kg = restrict_to(g1, trimmed);
  const std::size_t dim = kg.nodes.size();

  double kept_degree_total = 0.0;
  std::size_t max_degree = 0;
  for (const auto& row : kg.adj) {
    kept_degree_total += static_cast<double>(row.size());
    max_degree = std::max(max_degree, row.size());
  }
  auto apply_adj = [&](const Vec& x, Vec& y) {
    for (std::size_t i = 0; i < dim; ++i) {
      double s = 0.0;
      for (auto j : kg.adj[i]) s += x[j];
      y[i] = s;
    }
  };
  const double center = dim > 0 ? kept_degree_total / (static_cast<double>(dim) * dim) : 0.0;
  auto apply_centered = [&](const Vec& x, Vec& y) {
    apply_adj(x, y);
    const double sum = std::accumulate(x.begin(), x.end(), 0.0);
    for (double& v : y) v -= center * sum;
  };

  std::vector<double> score(dim, 0.0);
  if (dim > 0) {
    // Shift by an upper bound on the spectral radius so the iteration targets
    // the algebraically largest eigenvalue rather than the largest in modulus.
    const double shift = static_cast<double>(max_degree) + center * static_cast<double>(dim);
    const auto top = power_iterate(dim, apply_adj, shift, nullptr, false, config);
    const auto second = power_iterate(dim, apply_centered, shift, &top.vec, true, config);
    score = second.vec;
    out.converged = top.converged && second.converged;
    out.iterations = top.iterations + second.iterations;
  }

  // Median split of kept nodes: largest coordinates go to +1, ties by index.
  std::vector<std::size_t> order(dim);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return score[x] > score[y]; });
  const std::size_t num_trimmed = n - dim;
  std::size_t kept_plus = (dim + 1) / 2;
  kept_plus = std::min(kept_plus, plus_target);
  if (plus_target > num_trimmed) kept_plus = std::max(kept_plus, plus_target - num_trimmed);
  for (std::size_t r = 0; r < kept_plus; ++r) out.partition.assignment[kg.nodes[order[r]]] = 1;

  // Trimmed nodes: neighbor vote over kept nodes, strongest +1 votes first.
  std::vector<std::pair<long, NodeId>> votes;
  for (NodeId i = 0; i < n; ++i) {
    if (!trimmed[i]) continue;
    long margin = 0;
    for (NodeId j : g1.neighbors(i)) {
      if (!trimmed[j]) margin += out.partition.assignment[j];
    }
    votes.emplace_back(margin, i);
  }
  std::stable_sort(votes.begin(), votes.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t r = 0; r < plus_target - kept_plus; ++r) {
    out.partition.assignment[votes[r].second] = 1;
  }
  return out;
}

bool flip_condition(std::int8_t side, std::size_t edges_own, std::size_t edges_other,
                    const Llr& hbar, double t_param, ImprovementKind kind) {
  const int s = side;
  if (!hbar.is_finite()) return hbar.sign() == -s;
  const double margin = static_cast<double>(edges_other) - static_cast<double>(edges_own);
  if (kind == ImprovementKind::erasure) {
    if (hbar.value != 0.0) throw std::invalid_argument("flip_condition: erasure LLR must be 0 or certain");
    return margin > 0.0;
  }
  if (t_param == 0.0) return s * hbar.value < 0.0;
  // A: E[i,B] >= E[i,A] + hbar/T.  B: E[i,A] >= E[i,B] - hbar/T.
  return margin >= s * hbar.value / t_param;
}

ImprovementResult local_improve(const Graph& g2, const Partition& start, const LlrVector& hbar,
                                double t_param, ImprovementKind kind, int passes,
                                bool sequential) {
  const std::size_t n = g2.n();
  if (start.assignment.size() != n || hbar.hbar.size() != n) {
    throw std::invalid_argument("local_improve: partition, LLR and graph sizes differ");
  }
  if (passes < 1) throw std::invalid_argument("local_improve: passes must be >= 1");
  if (t_param < 0.0) throw std::invalid_argument("local_improve: T must be >= 0");

  ImprovementResult out;
  std::vector<std::int8_t> current = start.assignment;
  for (int pass = 0; pass < passes; ++pass) {
    std::vector<std::int8_t> next = current;
    const auto& reference = sequential ? next : current;
    for (NodeId i = 0; i < n; ++i) {
      const std::int8_t s = reference[i];
      const auto own = edges_to_side(g2, i, reference, s);
      const auto other = edges_to_side(g2, i, reference, static_cast<std::int8_t>(-s));
      if (flip_condition(s, own, other, hbar.hbar[i], t_param, kind)) {
        next[i] = static_cast<std::int8_t>(-s);
        ++(s == 1 ? out.flips_a_to_b : out.flips_b_to_a);
      }
    }
    current = std::move(next);
  }
  out.proposed = current;
  if (count_side(current, 1) != count_side(start.assignment, 1)) {
    out.partition = Partition{start.assignment, Provenance::rolled_back};
    out.rolled_back = true;
  } else {
    out.partition = Partition{std::move(current), Provenance::locally_improved};
  }
  return out;
}

std::size_t mismatch_count(std::span<const std::int8_t> predicted, const LabelVector& truth,
                           bool up_to_flip) {
  const std::size_t direct = hamming(predicted, truth.values());
  return up_to_flip ? std::min(direct, predicted.size() - direct) : direct;
}

DetectionResult two_step_detect(const LabeledGraph& g, const SideInfoObservation& side,
                                const SideInfoModel& model, const TwoStepConfig& config,
                                std::uint64_t seed) {
  const std::uint32_t n = g.params.n();
  if (g.graph.n() != n || g.labels.size() != n) {
    throw std::invalid_argument("two_step_detect: graph, labels and params disagree on n");
  }
  const LlrVector hbar = llr(model, side);
  if (hbar.hbar.size() != n) throw std::invalid_argument("two_step_detect: side information length");

  DetectionResult out;
  out.d_split = config.d_split.value_or(default_d_split(n));
  out.up_to_flip = is_sign_symmetric(model);
  const GraphSplit split = split_graph(g.graph, out.d_split, derive_seed(seed, streams::kSplit));

  WeakRecoveryResult weak = weak_recovery(split.g1, config.weak);
  out.weak_converged = weak.converged;
  out.weak_degenerate = weak.degenerate;

  // Spectral output has no preferred sign; orient it toward the side
  // information. Certain LLRs decide first, then the finite LLR sum.
  long certain_vote = 0;
  double finite_vote = 0.0;
  for (NodeId i = 0; i < n; ++i) {
    const auto& h = hbar.hbar[i];
    const int x = weak.partition.assignment[i];
    if (h.is_finite()) {
      finite_vote += x * h.value;
    } else {
      certain_vote += x * h.sign();
    }
  }
  if (certain_vote < 0 || (certain_vote == 0 && finite_vote < 0.0)) {
    for (auto& v : weak.partition.assignment) v = static_cast<std::int8_t>(-v);
  }
  out.stage1_agreement =
      1.0 - static_cast<double>(mismatch_count(weak.partition.assignment, g.labels, out.up_to_flip)) /
                n;

  const double t_param = std::log(g.params.a() / g.params.b());
  const auto kind = std::holds_alternative<Erasure>(model) ? ImprovementKind::erasure
                                                           : ImprovementKind::llr;
  ImprovementResult improved = local_improve(split.g2, weak.partition, hbar, t_param, kind,
                                             config.improvement_passes, config.sequential);
  out.flips_a_to_b = improved.flips_a_to_b;
  out.flips_b_to_a = improved.flips_b_to_a;
  out.rolled_back = improved.rolled_back;
  out.pre_rollback_mismatches = mismatch_count(improved.proposed, g.labels, out.up_to_flip);
  out.labels = std::move(improved.partition.assignment);
  out.mismatches = mismatch_count(out.labels, g.labels, out.up_to_flip);
  out.success = out.mismatches == 0;
  return out;
}

}  // namespace sbmlab
