#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sbmlab {

using NodeId = std::uint32_t;

/// Model tuple (n, a, b) of the binary symmetric SBM in the logarithmic
/// regime: p = a log(n)/n within communities, q = b log(n)/n across them.
class SbmParams {
 public:
  /// Throws std::invalid_argument unless a >= b > 0, n >= 2 and both p and q
  /// fall in (0, 1].
  static SbmParams make(std::uint32_t n, double a, double b);

  std::uint32_t n() const { return n_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double p() const { return p_; }
  double q() const { return q_; }
  double log_n() const;

 private:
  SbmParams(std::uint32_t n, double a, double b, double p, double q)
      : n_(n), a_(a), b_(b), p_(p), q_(q) {}

  std::uint32_t n_;
  double a_;
  double b_;
  double p_;
  double q_;
};

enum class LabelMode { balanced, iid };

/// Community assignment, one entry in {+1, -1} per node.
class LabelVector {
 public:
  LabelVector() = default;
  /// Throws std::invalid_argument on any entry other than +1 or -1.
  explicit LabelVector(std::vector<std::int8_t> values);

  std::size_t size() const { return values_.size(); }
  std::int8_t operator[](std::size_t i) const { return values_[i]; }
  std::span<const std::int8_t> values() const { return values_; }

  std::size_t count_plus() const;
  bool is_balanced() const { return 2 * count_plus() == size(); }
  LabelVector flipped() const;

  bool operator==(const LabelVector&) const = default;

 private:
  std::vector<std::int8_t> values_;
};

struct Edge {
  NodeId u;
  NodeId v;
  auto operator<=>(const Edge&) const = default;
};

/// Undirected simple graph stored as sorted adjacency lists (CSR layout).
/// Immutable after construction.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::uint32_t n) : n_(n), offsets_(n + 1, 0) {}

  /// Builds from an edge list in any orientation. Self-loops and out-of-range
  /// endpoints throw std::invalid_argument; repeated edges collapse.
  static Graph from_edges(std::uint32_t n, std::vector<Edge> edges);

  std::uint32_t n() const { return n_; }
  std::size_t num_edges() const { return adjacency_.size() / 2; }
  std::span<const NodeId> neighbors(NodeId i) const {
    return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
  }
  std::size_t degree(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }
  bool has_edge(NodeId i, NodeId j) const;

  /// Canonical edge list: u < v, lexicographically sorted.
  std::vector<Edge> edges() const;

  bool operator==(const Graph&) const = default;

 private:
  std::uint32_t n_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adjacency_;
};

struct LabeledGraph {
  SbmParams params;
  LabelVector labels;
  Graph graph;
  std::uint64_t seed = 0;
};

/// G1 = G ∩ H1 and G2 = G ∩ H1ᶜ for an independent Erdős–Rényi H1 with edge
/// probability d_split / log(n).
struct GraphSplit {
  Graph g1;
  Graph g2;
  double d_split = 0.0;
};

/// Balanced mode draws a uniformly random half of the nodes as +1 (odd n
/// throws std::invalid_argument); iid mode flips a fair coin per node.
LabelVector sample_labels(const SbmParams& params, LabelMode mode, std::uint64_t seed);

/// Each intra-community pair is an edge with probability p, each
/// cross-community pair with probability q, independently.
LabeledGraph sample_graph(const LabelVector& labels, const SbmParams& params,
                          std::uint64_t seed);

/// Erdős–Rényi G(n, prob). Used for H1 degree checks.
Graph sample_erdos_renyi(std::uint32_t n, double prob, std::uint64_t seed);

/// H1 membership only matters on the edges of g, so one coin is drawn per
/// edge of g (in canonical order) rather than per node pair.
/// Throws std::invalid_argument unless d_split / log(n) lies in (0, 1).
GraphSplit split_graph(const Graph& g, double d_split, std::uint64_t seed);

/// |{j in target : (node, j) is an edge}|. `target` must be sorted ascending.
/// Throws std::invalid_argument if node is out of range.
std::size_t edges_between(const Graph& g, NodeId node, std::span<const NodeId> target);

/// Edges from `node` to nodes whose assignment equals `side`.
std::size_t edges_to_side(const Graph& g, NodeId node,
                          std::span<const std::int8_t> assignment, std::int8_t side);

/// Sorted node ids i with assignment[i] == side.
std::vector<NodeId> members(std::span<const std::int8_t> assignment, std::int8_t side);

/// E(A) + E(B): edges whose endpoints share an assignment.
std::size_t intra_edge_count(const Graph& g, std::span<const std::int8_t> assignment);

/// Hamming distance between two assignments of equal length.
std::size_t hamming(std::span<const std::int8_t> x, std::span<const std::int8_t> y);

}  // namespace sbmlab
