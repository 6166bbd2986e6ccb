#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "sbmlab/model_core.hpp"

namespace sbmlab {

/// Label observed correctly with probability 1 - alpha, flipped otherwise.
struct NoisyLabels {
  double alpha = 0.25;
};

/// Label revealed with probability 1 - epsilon, erased (0) otherwise.
struct Erasure {
  double epsilon = 0.5;
};

/// One discrete feature: outcome distributions given x = +1 and x = -1.
struct FeatureLaw {
  std::vector<double> plus;
  std::vector<double> minus;
};

/// K conditionally independent features.
struct Features {
  std::vector<FeatureLaw> laws;
};

using SideInfoModel = std::variant<NoisyLabels, Erasure, Features>;

/// Throws std::invalid_argument when a parameter or distribution is invalid.
void validate(const SideInfoModel& model);

/// Short tag used in files and tables: "noisy", "erasure" or "features".
std::string model_tag(const SideInfoModel& model);

/// A single feature with alpha_plus == alpha_minus == (1): carries no
/// information about labels.
Features uninformative_features();

/// True when every outcome of every feature has identical conditional
/// probabilities, so observations cannot break the global sign symmetry.
bool is_sign_symmetric(const SideInfoModel& model);

/// Realized side information. Noisy and erasure models fill `y`
/// (+1/-1, or +1/0/-1); the feature model fills `outcomes`, an n x K
/// row-major matrix of outcome indices.
struct SideInfoObservation {
  std::vector<std::int8_t> y;
  std::vector<std::uint32_t> outcomes;
  std::size_t num_features = 0;

  std::size_t size() const;
  std::uint32_t outcome(std::size_t node, std::size_t feature) const {
    return outcomes[node * num_features + feature];
  }
  bool operator==(const SideInfoObservation&) const = default;
};

/// Per-node independent draws given the true labels.
SideInfoObservation sample_side_info(const LabelVector& labels, const SideInfoModel& model,
                                     std::uint64_t seed);

/// Side-information log-likelihood ratio log P(y|+1)/P(y|-1) of one node.
/// Certain states stand in for +/- infinity so sums never meet NaN.
struct Llr {
  enum class State : std::int8_t { minus_certain = -1, finite = 0, plus_certain = 1 };

  State state = State::finite;
  double value = 0.0;

  static Llr finite(double v) { return {State::finite, v}; }
  static Llr plus_certain() { return {State::plus_certain, 0.0}; }
  static Llr minus_certain() { return {State::minus_certain, 0.0}; }

  bool is_finite() const { return state == State::finite; }
  /// +1 / -1 / 0 on the extended real line.
  int sign() const;
  bool operator==(const Llr&) const = default;
};

struct LlrVector {
  std::vector<Llr> hbar;
  /// log((1 - alpha) / alpha) for the noisy model, 0 otherwise.
  double c = 0.0;
};

/// Throws std::invalid_argument on shape mismatch or when a realized outcome
/// has zero probability under both labels.
LlrVector llr(const SideInfoModel& model, const SideInfoObservation& observation);

}  // namespace sbmlab
