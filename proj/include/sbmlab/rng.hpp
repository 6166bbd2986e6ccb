#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sbmlab {

/// Seed derivation tree. Every random component of a trial draws from its own
/// stream, keyed by a fixed label, so components stay reproducible on their
/// own (e.g. resampling side information never perturbs the graph).
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label);
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

// Stream labels used throughout the library.
namespace streams {
inline constexpr std::string_view kLabels = "labels";
inline constexpr std::string_view kGraph = "graph";
inline constexpr std::string_view kSideInfo = "side_info";
inline constexpr std::string_view kSplit = "split";
inline constexpr std::string_view kDetect = "detect";
}  // namespace streams

/// Portable random source. Only the engine (fully specified by the standard)
/// comes from <random>; the distributions are written out here so outputs are
/// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound);

  /// Number of failures before the next success of a Bernoulli(p) sequence.
  /// Used to skip over absent edges in sparse sampling.
  std::uint64_t geometric_skip(double p);

 private:
  std::mt19937_64 engine_;
};

}  // namespace sbmlab
