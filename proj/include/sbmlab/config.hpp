#pragma once

#include <iosfwd>
#include <string>

#include "sbmlab/harness.hpp"

namespace sbmlab {

inline constexpr const char* kConfigHeader = "sbmlab-config v1";

/// "0.8,0.2:0.2,0.8|..." (plus:minus per feature) as used by feature_laws.
Features parse_feature_laws(const std::string& text);

/// Flat key = value text, first non-comment line "sbmlab-config v1".
/// '#' starts a comment. Grid keys take comma-separated lists and expand in
/// the order n, a, b, side parameter:
///   n, a, b              cell grid
///   model                none | noisy | erasure | features
///   beta                 alpha or epsilon = n^-beta per cell
///   alpha / epsilon      constant alternative to beta
///   feature_laws         plus:minus per feature, features separated by '|',
///                        probabilities by ','  e.g. 0.8,0.2:0.2,0.8
///   trials, seed, threads, detector (two_step | ml_exact),
///   ml_mode (exact | asymptotic), generator (sbm | disjoint_cliques),
///   d_split, passes, sequential, tolerance, max_iterations, trim,
///   output, format (csv | json)
/// Unknown or repeated keys and malformed values throw std::invalid_argument.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

}  // namespace sbmlab
