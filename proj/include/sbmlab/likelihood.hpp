#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>

#include "sbmlab/model_core.hpp"
#include "sbmlab/side_info.hpp"

namespace sbmlab {

/// Log-likelihood of (G, y) given a candidate assignment, up to an additive
/// constant that does not depend on the candidate. `impossible` marks -inf
/// (a candidate contradicting a revealed label or a zero-probability feature).
struct LikelihoodScore {
  double value = 0.0;
  bool impossible = false;

  static LikelihoodScore minus_infinity() { return {0.0, true}; }

  friend bool operator==(const LikelihoodScore& x, const LikelihoodScore& y) {
    return x.impossible == y.impossible && (x.impossible || x.value == y.value);
  }
  friend std::partial_ordering operator<=>(const LikelihoodScore& x, const LikelihoodScore& y) {
    if (x.impossible || y.impossible) return y.impossible <=> x.impossible;
    return x.value <=> y.value;
  }
};

/// asymptotic: edge weight T = log(a/b). exact: T' = log(p(1-q) / (q(1-p))),
/// the full Bernoulli edge likelihood at finite n.
enum class LikelihoodMode { exact, asymptotic };

/// Edge weight used by the given mode. Exact mode throws std::domain_error
/// when p or q equals 1.
double edge_weight(const SbmParams& params, LikelihoodMode mode);

/// T * (E(A) + E(B)) + side-information log-likelihood of the candidate.
/// Throws std::invalid_argument if the candidate is not balanced or shapes
/// disagree.
LikelihoodScore log_likelihood(const Graph& g, const LabelVector& candidate,
                               const SideInfoObservation& side, const SideInfoModel& model,
                               const SbmParams& params, LikelihoodMode mode);

struct MlResult {
  LabelVector best_labels;
  LikelihoodScore best_score;
  std::size_t tie_count = 0;
};

/// Raised by ml_exact when n exceeds the enumeration cap.
class EnumerationCapExceeded : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr std::uint32_t kDefaultMlCap = 16;
inline constexpr std::uint32_t kMaxMlCap = 26;

/// Exhaustive maximum-likelihood search over all balanced assignments.
/// Scores within a relative 1e-9 count as ties; among ties the
/// lexicographically smallest label sequence (+1 before -1) wins.
MlResult ml_exact(const Graph& g, const SideInfoObservation& side, const SideInfoModel& model,
                  const SbmParams& params, LikelihoodMode mode,
                  std::uint32_t cap = kDefaultMlCap);

/// Nodes i in A and j in B satisfying the model's failure events F_A and F_B
/// relative to the true assignment. Swapping them never lowers the
/// asymptotic-mode likelihood, so a returned pair certifies ML failure.
std::optional<std::pair<NodeId, NodeId>> failure_witness(const Graph& g,
                                                         const SideInfoObservation& side,
                                                         const SideInfoModel& model,
                                                         const LabelVector& truth,
                                                         const SbmParams& params);

}  // namespace sbmlab
