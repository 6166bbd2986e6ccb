#include "sbmlab/model_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "sbmlab/rng.hpp"

namespace sbmlab {
namespace {

// a log(n)/n may land a few ulps above 1 when the caller solves for p = 1.
double edge_probability(double coeff, std::uint32_t n) {
  const double value = coeff * std::log(static_cast<double>(n)) / n;
  if (value > 1.0 && value <= 1.0 + 1e-12) return 1.0;
  return value;
}

// Visits the linear indices of a Bernoulli(p) subset of {0, ..., total-1}.
template <typename Fn>
void for_each_success(std::uint64_t total, double p, Rng& rng, Fn&& fn) {
  if (total == 0 || p <= 0.0) return;
  std::uint64_t k = rng.geometric_skip(p);
  while (k < total) {
    fn(k);
    const std::uint64_t skip = rng.geometric_skip(p);
    if (skip >= total - k) break;
    k += skip + 1;
  }
}

// Pairs (nodes[r], nodes[c]) with r < c, enumerated row by row.
void sample_triangle(std::span<const NodeId> nodes, double p, Rng& rng,
                     std::vector<Edge>& out) {
  const std::uint64_t m = nodes.size();
  if (m < 2) return;
  std::uint64_t row = 0;
  std::uint64_t row_start = 0;
  for_each_success(m * (m - 1) / 2, p, rng, [&](std::uint64_t k) {
    while (k >= row_start + (m - 1 - row)) {
      row_start += m - 1 - row;
      ++row;
    }
    const std::uint64_t col = row + 1 + (k - row_start);
    out.push_back({nodes[row], nodes[col]});
  });
}

void sample_rectangle(std::span<const NodeId> rows, std::span<const NodeId> cols,
                      double p, Rng& rng, std::vector<Edge>& out) {
  const std::uint64_t width = cols.size();
  for_each_success(rows.size() * width, p, rng, [&](std::uint64_t k) {
    out.push_back({rows[k / width], cols[k % width]});
  });
}

}  // namespace

SbmParams SbmParams::make(std::uint32_t n, double a, double b) {
  if (!(b > 0.0) || !(a >= b) || !std::isfinite(a)) {
    throw std::invalid_argument("SbmParams: require a >= b > 0");
  }
  if (n < 2) throw std::invalid_argument("SbmParams: n must be at least 2");
  const double p = edge_probability(a, n);
  const double q = edge_probability(b, n);
  if (!(p > 0.0 && p <= 1.0) || !(q > 0.0 && q <= 1.0)) {
    throw std::invalid_argument("SbmParams: a log(n)/n and b log(n)/n must lie in (0, 1] (n=" +
                                std::to_string(n) + ")");
  }
  return SbmParams(n, a, b, p, q);
}

double SbmParams::log_n() const { return std::log(static_cast<double>(n_)); }

LabelVector::LabelVector(std::vector<std::int8_t> values) : values_(std::move(values)) {
  for (auto v : values_) {
    if (v != 1 && v != -1) throw std::invalid_argument("LabelVector: entries must be +1 or -1");
  }
}

std::size_t LabelVector::count_plus() const {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), 1));
}

LabelVector LabelVector::flipped() const {
  std::vector<std::int8_t> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(),
                 [](std::int8_t v) { return static_cast<std::int8_t>(-v); });
  return LabelVector(std::move(out));
}

Graph Graph::from_edges(std::uint32_t n, std::vector<Edge> edges) {
  for (auto& e : edges) {
    if (e.u >= n || e.v >= n) throw std::invalid_argument("Graph: endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("Graph: self-loops are not allowed");
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  Graph g(n);
  for (const auto& e : edges) {
    ++g.offsets_[e.u + 1];
    ++g.offsets_[e.v + 1];
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  g.adjacency_.resize(2 * edges.size());
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  // Sorted edges fill each list in ascending order: for node x, neighbors
  // smaller than x arrive (as e.v == x) before the ones larger than x.
  for (const auto& e : edges) g.adjacency_[cursor[e.v]++] = e.u;
  for (const auto& e : edges) g.adjacency_[cursor[e.u]++] = e.v;
  return g;
}

bool Graph::has_edge(NodeId i, NodeId j) const {
  if (i >= n_ || j >= n_) return false;
  auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId i = 0; i < n_; ++i) {
    for (NodeId j : neighbors(i)) {
      if (i < j) out.push_back({i, j});
    }
  }
  return out;
}

LabelVector sample_labels(const SbmParams& params, LabelMode mode, std::uint64_t seed) {
  const std::uint32_t n = params.n();
  Rng rng(seed);
  std::vector<std::int8_t> labels(n, -1);
  if (mode == LabelMode::iid) {
    for (auto& v : labels) v = rng.bernoulli(0.5) ? 1 : -1;
    return LabelVector(std::move(labels));
  }
  if (n % 2 != 0) throw std::invalid_argument("sample_labels: balanced mode requires even n");
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  // Partial Fisher-Yates: the first n/2 slots are a uniform random subset.
  for (std::uint32_t i = 0; i < n / 2; ++i) {
    const auto j = i + static_cast<std::uint32_t>(rng.uniform_below(n - i));
    std::swap(order[i], order[j]);
    labels[order[i]] = 1;
  }
  return LabelVector(std::move(labels));
}

LabeledGraph sample_graph(const LabelVector& labels, const SbmParams& params,
                          std::uint64_t seed) {
  if (labels.size() != params.n()) {
    throw std::invalid_argument("sample_graph: label length differs from n");
  }
  const auto plus = members(labels.values(), 1);
  const auto minus = members(labels.values(), -1);
  Rng rng(seed);
  std::vector<Edge> edges;
  sample_triangle(plus, params.p(), rng, edges);
  sample_triangle(minus, params.p(), rng, edges);
  sample_rectangle(plus, minus, params.q(), rng, edges);
  return LabeledGraph{params, labels, Graph::from_edges(params.n(), std::move(edges)), seed};
}

Graph sample_erdos_renyi(std::uint32_t n, double prob, std::uint64_t seed) {
  std::vector<NodeId> nodes(n);
  std::iota(nodes.begin(), nodes.end(), NodeId{0});
  Rng rng(seed);
  std::vector<Edge> edges;
  sample_triangle(nodes, prob, rng, edges);
  return Graph::from_edges(n, std::move(edges));
}

GraphSplit split_graph(const Graph& g, double d_split, std::uint64_t seed) {
  const double ratio = g.n() >= 2 ? d_split / std::log(static_cast<double>(g.n())) : 0.0;
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("split_graph: d_split / log(n) must lie in (0, 1)");
  }
  Rng rng(seed);
  std::vector<Edge> e1;
  std::vector<Edge> e2;
  for (const auto& e : g.edges()) (rng.bernoulli(ratio) ? e1 : e2).push_back(e);
  return GraphSplit{Graph::from_edges(g.n(), std::move(e1)),
                    Graph::from_edges(g.n(), std::move(e2)), d_split};
}

std::size_t edges_between(const Graph& g, NodeId node, std::span<const NodeId> target) {
  if (node >= g.n()) throw std::invalid_argument("edges_between: node out of range");
  const auto nb = g.neighbors(node);
  std::size_t count = 0;
  // Probe the larger sorted sequence with the elements of the smaller one.
  if (nb.size() <= target.size()) {
    for (NodeId j : nb) count += std::binary_search(target.begin(), target.end(), j) ? 1 : 0;
  } else {
    for (NodeId j : target) count += std::binary_search(nb.begin(), nb.end(), j) ? 1 : 0;
  }
  return count;
}

std::size_t edges_to_side(const Graph& g, NodeId node, std::span<const std::int8_t> assignment,
                          std::int8_t side) {
  if (node >= g.n()) throw std::invalid_argument("edges_to_side: node out of range");
  std::size_t count = 0;
  for (NodeId j : g.neighbors(node)) count += assignment[j] == side ? 1 : 0;
  return count;
}

std::vector<NodeId> members(std::span<const std::int8_t> assignment, std::int8_t side) {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == side) out.push_back(i);
  }
  return out;
}

std::size_t intra_edge_count(const Graph& g, std::span<const std::int8_t> assignment) {
  std::size_t count = 0;
  for (NodeId i = 0; i < g.n(); ++i) {
    for (NodeId j : g.neighbors(i)) {
      if (i < j && assignment[i] == assignment[j]) ++count;
    }
  }
  return count;
}

std::size_t hamming(std::span<const std::int8_t> x, std::span<const std::int8_t> y) {
  if (x.size() != y.size()) throw std::invalid_argument("hamming: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d += x[i] != y[i] ? 1 : 0;
  return d;
}

}  // namespace sbmlab
