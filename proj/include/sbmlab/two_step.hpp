#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sbmlab/model_core.hpp"
#include "sbmlab/side_info.hpp"

namespace sbmlab {

enum class Provenance { weak_recovery, locally_improved, rolled_back };

const char* to_string(Provenance p);

struct Partition {
  std::vector<std::int8_t> assignment;
  Provenance provenance = Provenance::weak_recovery;
};

/// Trimmed spectral bisection parameters.
struct WeakRecoveryConfig {
  /// Stop when successive unit iterates differ by less than this (2-norm).
  double tolerance = 1e-6;
  int max_iterations = 1000;
  /// Nodes with degree above trim_multiplier * average degree are left out of
  /// the spectral step and attached afterwards by neighbor vote.
  double trim_multiplier = 3.0;
};

struct TwoStepConfig {
  /// Splitting parameter D; defaults to max(2, ceil(log log n)).
  std::optional<double> d_split;
  WeakRecoveryConfig weak;
  int improvement_passes = 1;
  /// Re-evaluate each node against the already-updated partition instead of
  /// the stage-one partition.
  bool sequential = false;
};

double default_d_split(std::uint32_t n);

struct WeakRecoveryResult {
  Partition partition;
  bool converged = false;
  /// Set when the input had no edges and the partition is arbitrary.
  bool degenerate = false;
  int iterations = 0;
  std::size_t trimmed = 0;
};

/// Spectral bisection: trim high-degree nodes, take the leading eigenvector of
/// the centered adjacency after deflating the top adjacency eigenvector, split
/// at the median, then attach trimmed nodes by neighbor majority while keeping
/// the two sides as balanced as n allows. The global sign is arbitrary.
WeakRecoveryResult weak_recovery(const Graph& g1, const WeakRecoveryConfig& config);

enum class ImprovementKind {
  /// Noisy labels and general features: flip i in A when
  /// E[i,B] >= E[i,A] + hbar_i / T, and i in B when E[i,A] >= E[i,B] - hbar_i / T.
  llr,
  /// Partially revealed labels: follow a revealed label, otherwise move to the
  /// side with strictly more edges.
  erasure,
};

struct ImprovementResult {
  Partition partition;
  /// Assignment after the flips, before the size check.
  std::vector<std::int8_t> proposed;
  std::size_t flips_a_to_b = 0;
  std::size_t flips_b_to_a = 0;
  bool rolled_back = false;
};

/// One synchronous pass per configured pass (or sequential if requested),
/// followed by the size check: if |A| changed, every flip is discarded and the
/// start partition is returned with provenance rolled_back.
/// With t_param == 0 the graph term vanishes and the sign of hbar decides.
ImprovementResult local_improve(const Graph& g2, const Partition& start, const LlrVector& hbar,
                                double t_param, ImprovementKind kind, int passes = 1,
                                bool sequential = false);

/// Flip decision for a node currently on `side`, from its raw edge counts.
bool flip_condition(std::int8_t side, std::size_t edges_own, std::size_t edges_other,
                    const Llr& hbar, double t_param, ImprovementKind kind);

struct DetectionResult {
  std::vector<std::int8_t> labels;
  std::size_t mismatches = 0;
  /// Mismatches of the locally improved assignment before the size check.
  std::size_t pre_rollback_mismatches = 0;
  bool success = false;
  /// Fraction of nodes the oriented stage-one partition gets right.
  double stage1_agreement = 0.0;
  std::size_t flips_a_to_b = 0;
  std::size_t flips_b_to_a = 0;
  bool rolled_back = false;
  bool weak_converged = false;
  bool weak_degenerate = false;
  double d_split = 0.0;
  /// True when mismatches are counted up to a global sign flip.
  bool up_to_flip = false;
};

/// Mismatch count under the error metric convention: minimum over the global
/// flip when the side-information model is sign-symmetric, direct otherwise.
std::size_t mismatch_count(std::span<const std::int8_t> predicted, const LabelVector& truth,
                           bool up_to_flip);

/// Split, weak recovery on G1, orient by side information, local improvement
/// on G2, size check.
DetectionResult two_step_detect(const LabeledGraph& g, const SideInfoObservation& side,
                                const SideInfoModel& model, const TwoStepConfig& config,
                                std::uint64_t seed);

}  // namespace sbmlab
