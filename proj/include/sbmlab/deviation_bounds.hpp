#pragma once

#include <cstddef>
#include <functional>

namespace sbmlab {

/// Sum of n_terms i.i.d. copies of X = scale * (Z - W), Z ~ Bern(q), W ~ Bern(p).
struct BernDiffSum {
  std::size_t n_terms = 0;
  double p = 0.0;
  double q = 0.0;
  double scale = 0.0;
};

/// Gamma(t) = log E[e^{tX}]
///          = log(1 - q(1 - e^{tT})) + log(1 - p(1 - e^{-tT})), T = t_scale.
/// Evaluated in log-sum-exp form. Throws std::domain_error when p or q lies
/// outside [0, 1] or the result is not finite.
double log_mgf(double t, double p, double q, double t_scale);

enum class Branch { plus, minus };

/// Closed-form maximizer (1/T) log((gamma +/- beta) / (bT)), written as
/// 1/2 +/- asinh(beta / (T sqrt(ab))) / T so that beta = 0 gives 1/2 exactly.
/// Requires a > b > 0 and beta >= 0; a == b throws DegenerateParameters.
double optimal_t(double a, double b, double beta, Branch branch);

/// Limit of (n / log n)(t a_n - Gamma_n(t)) for a_n = 2 beta log(n) / n:
/// 2 beta t - b(e^{tT} - 1) - a(e^{-tT} - 1). Its argmax is optimal_t(plus)
/// and its maximum is eta(a, b, beta); beta -> -beta gives the minus branch.
double limit_objective(double a, double b, double beta, double t);

/// Golden-section maximizer of a concave function. The bracket [lo, hi] is
/// widened until the maximum lies strictly inside.
double golden_section_argmax(const std::function<double(double)>& f, double lo, double hi,
                             double tol = 1e-10);

/// Maximizer of t * a_target - Gamma(t) over the reals, found by bisection on
/// the tilted mean. Requires -scale < a_target < scale.
double tilted_argmax(const BernDiffSum& sum, double a_target);

struct TiltedLaw {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean and variance of X under e^{tx} P(x) / E[e^{tX}], by enumerating the
/// four (Z, W) outcomes.
TiltedLaw tilted_law(const BernDiffSum& sum, double t);

struct TiltedBoundResult {
  /// n (t* a - Gamma(t*) + |t*| eps)
  double exponent_term = 0.0;
  /// 1 - var / (n eps^2)
  double correction = 0.0;
  /// exp(-exponent_term) * max(correction, 0), in [0, 1].
  double bound = 0.0;
  double t_star = 0.0;
  double tilted_mean = 0.0;
  double tilted_variance = 0.0;
  /// correction <= 0: the bound says nothing at this (n, eps).
  bool vacuous = false;
};

/// Tilted-measure lower bound on P(n^-1 sum X_i >= a_target - eps).
TiltedBoundResult cramer_lower_bound(const BernDiffSum& sum, double a_target, double eps);

struct ChernoffBound {
  /// (1 - alpha) exp(-(log n / 2) sup_{t>0} [2t kappa1 + a + b - b e^t - a e^-t]),
  /// kappa1 = c / (T log n) - psi.
  double term_agree = 0.0;
  /// Same with weight alpha and kappa2 = -c / (T log n) - psi.
  double term_disagree = 0.0;
  /// Multiplicative Chernoff bound on the weak-recovery spill, capped at 1.
  double spill = 0.0;
  /// min(1, sum of the three terms).
  double total = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  /// A supremum clamped at t = 0 makes its term trivial (equal to its weight).
  bool t1_clamped = false;
  bool t2_clamped = false;
  double psi = 0.0;
  double alpha = 0.0;
};

/// Finite-n evaluation of the three-term per-node misclassification bound for
/// the two-step algorithm under noisy labels with LLR magnitude c_llr (alpha =
/// 1 / (1 + e^c)), stage-one error fraction delta_weak in (0, 1) and
/// splitting parameter d_split. psi = 1 / sqrt(-log delta_weak).
ChernoffBound chernoff_upper_bound_pe(double a, double b, double c_llr, double n,
                                      double delta_weak, double d_split);

}  // namespace sbmlab
