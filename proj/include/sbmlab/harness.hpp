#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sbmlab/likelihood.hpp"
#include "sbmlab/side_info.hpp"
#include "sbmlab/two_step.hpp"

namespace sbmlab {

enum class SideKind { none, noisy, erasure, features };

const char* to_string(SideKind k);
/// Throws std::invalid_argument on an unknown name.
SideKind parse_side_kind(std::string_view name);

/// Side-information setting of a cell. With `beta` set, alpha (noisy) or
/// epsilon (erasure) is n^-beta at the cell's n; otherwise `value` is used
/// as given. `none` means a single uninformative feature.
struct SideInfoSpec {
  SideKind kind = SideKind::none;
  std::optional<double> beta;
  double value = 0.0;
  Features features;

  SideInfoModel instantiate(std::uint32_t n) const;
  /// "beta=0.5", "alpha=0.3", "epsilon=0.1", "K=2" or "".
  std::string regime_params() const;
  bool operator==(const SideInfoSpec& other) const;
};

struct Cell {
  std::uint32_t n = 0;
  double a = 0.0;
  double b = 0.0;
  SideInfoSpec side;
};

enum class DetectorKind { two_step, ml_exact };
/// disjoint_cliques replaces the SBM draw by two complete communities.
enum class Generator { sbm, disjoint_cliques };

struct ExperimentConfig {
  std::vector<Cell> cells;
  DetectorKind detector = DetectorKind::two_step;
  TwoStepConfig two_step;
  LikelihoodMode ml_mode = LikelihoodMode::exact;
  Generator generator = Generator::sbm;
  std::size_t trials = 100;
  std::uint64_t root_seed = 1;
  /// 0: SBMLAB_THREADS if set, else the hardware concurrency.
  unsigned threads = 0;
  std::string output;
  std::string format = "csv";
};

unsigned resolve_threads(unsigned requested);

/// One end-to-end trial: labels, graph, side information, detection.
struct TrialOutcome {
  bool success = false;
  bool error = false;
  std::string error_message;
  double mismatch_fraction = 0.0;
  /// Two-step only.
  double pre_rollback_fraction = 0.0;
  double stage1_agreement = 0.0;
  bool rolled_back = false;
};

TrialOutcome run_trial(const Cell& cell, const ExperimentConfig& config, std::uint64_t trial_seed);

struct TrialStats {
  std::uint32_t n = 0;
  double a = 0.0;
  double b = 0.0;
  std::string model;
  std::string regime_params;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double rate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  /// Mean final mismatch fraction over the trials that ran to completion;
  /// empty when every trial errored.
  std::optional<double> mean_mismatch;
  std::uint64_t seed = 0;
  /// Trials whose pipeline threw; they count as failures.
  std::size_t errors = 0;
  std::size_t rollbacks = 0;
  /// Two-step diagnostics; empty for the ML detector.
  std::optional<double> stage1_agreement;
  /// Mean mismatch fraction of the locally improved assignment before the
  /// size check. This is the per-node error the exponent fit uses.
  std::optional<double> pre_rollback_mismatch;

  bool operator==(const TrialStats&) const = default;
};

using Table = std::vector<TrialStats>;

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

inline constexpr double kZ95 = 1.959963984540054;

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z = kZ95);

/// Seed of cell `index` under a root seed; trial t of that cell uses
/// derive_seed(cell_seed, t).
std::uint64_t cell_seed(std::uint64_t root_seed, std::size_t index);

/// Runs config.trials trials of one cell. The result depends only on the
/// inputs, not on the thread count.
TrialStats run_cell(const Cell& cell, const ExperimentConfig& config, std::uint64_t seed);

/// One row per cell, in grid order; cell i uses cell_seed(root_seed, i).
Table sweep(const ExperimentConfig& config);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> used_n;
  /// Cells with zero observed errors, left out of the regression.
  std::vector<double> excluded_n;
  bool flagged = false;
};

/// Least-squares slope of -log(rate) against log(n). Needs at least three
/// distinct n values (std::invalid_argument otherwise) and two positive rates.
ExponentFit fit_exponent(std::span<const std::pair<double, double>> n_and_rate);

/// (n, per-node error) pairs from a table: the pre-size-check mismatch when
/// present, else mean_mismatch. Rows with neither are skipped.
std::vector<std::pair<double, double>> exponent_points(const Table& table);

std::string csv_header();
void emit_csv(std::ostream& out, const Table& table);
Table read_csv(std::istream& in);
void emit_json(std::ostream& out, const Table& table);
Table read_json(std::istream& in);

}  // namespace sbmlab
