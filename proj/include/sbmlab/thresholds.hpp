#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sbmlab {

/// Raised when a = b makes T = 0 and a quantity divides by T.
class DegenerateParameters : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised for regimes the theory does not characterize (features with K of
/// order log n).
class NotCharacterized : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct TGamma {
  double t = 0.0;
  double gamma = 0.0;
  /// a == b: T = 0, gamma = |beta|, eta undefined.
  bool degenerate = false;
};

/// T = log(a/b), gamma = sqrt(beta^2 + a b T^2). Requires a >= b > 0.
TGamma t_gamma(double a, double b, double beta);

/// eta(a,b,beta) = a + b + beta - 2 gamma/T + (beta/T) log((gamma+beta)/(gamma-beta)).
/// Requires a > b > 0 (a == b throws DegenerateParameters) and beta >= 0.
double eta(double a, double b, double beta);

/// T (a - b) / 2: the side-information strength where the eta description
/// stops applying.
double beta_star(double a, double b);

/// (sqrt(a) - sqrt(b))^2, the graph-only condition value.
double graph_only_value(double a, double b);

// Regime descriptors. An empty beta means the sublog case (coefficient of
// log n equal to zero with no exponent attached).
struct NoisyRegime {
  std::optional<double> beta;
};

struct ErasureRegime {
  std::optional<double> beta;
};

/// Coefficients of log n in f1 = sum of outcome LLRs, f2 = sum log alpha+,
/// f3 = sum log alpha- along one outcome sequence. f1 = f2 - f3 must hold.
struct FeatureSequence {
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
};

struct FeaturesRegime {
  std::vector<FeatureSequence> sequences;
};

enum class KGrowth { sublog, log_order };

/// K i.i.d. features with n-independent laws.
struct FeaturesIidRegime {
  KGrowth k_growth = KGrowth::sublog;
};

using RegimeDescriptor = std::variant<NoisyRegime, ErasureRegime, FeaturesRegime, FeaturesIidRegime>;

/// Throws std::invalid_argument on negative betas, positive f2/f3, f1 != f2 - f3
/// or an empty sequence list.
void validate(const RegimeDescriptor& regime);

enum class Achievable { yes, no, boundary, unknown_gap };

const char* to_string(Achievable a);

struct ThresholdReport {
  /// Compared with `threshold` (2, or 1 when beta itself is the criterion).
  double condition_value = 0.0;
  double threshold = 2.0;
  Achievable achievable = Achievable::no;
  /// Per-node error exponent: error probability n^(-exponent); recovery iff > 1.
  double exponent = 0.0;
  std::optional<double> critical_beta;
  std::string binding_case;
};

/// Recovery verdict for (a, b) under the given regime. For feature regimes
/// each sequence yields eta(a,b,|beta1|) + 2 beta' (beta' = -f2 if beta1 >= 0,
/// else -f3), covering the four feature cases at once; the report carries the
/// minimum over sequences. Sequences with |beta1| > T(a-b)/2 have no converse:
/// unless a characterized sequence already rules recovery out, the verdict is
/// unknown_gap with the achievability-side value attached.
ThresholdReport recovery_predicate(double a, double b, const RegimeDescriptor& regime);

enum class CriticalKind { noisy, erasure };

/// Smallest beta enabling exact recovery; 0 when the graph alone suffices.
/// Noisy: root of eta(a,b,beta) = 2 on (0, T(a-b)/2] by bisection to 1e-10,
/// or 1 when eta at T(a-b)/2 does not exceed 2. Empty for the noisy kind when
/// a == b, where eta is undefined.
std::optional<double> critical_beta(double a, double b, CriticalKind kind);

/// Same exponent recovery_predicate reports.
double error_exponent(double a, double b, const RegimeDescriptor& regime);

}  // namespace sbmlab
