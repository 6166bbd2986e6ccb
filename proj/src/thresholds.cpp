#include "sbmlab/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sbmlab {
namespace {

constexpr double kBoundaryTol = 1e-12;

void check_ab(double a, double b) {
  if (!(b > 0.0) || !(a >= b) || !std::isfinite(a)) {
    throw std::invalid_argument("thresholds: require a >= b > 0");
  }
}

Achievable verdict(double value, double threshold) {
  if (std::abs(value - threshold) < kBoundaryTol) return Achievable::boundary;
  return value > threshold ? Achievable::yes : Achievable::no;
}

ThresholdReport make_report(double value, double threshold, double exponent, std::string tag) {
  ThresholdReport r;
  r.condition_value = value;
  r.threshold = threshold;
  r.achievable = verdict(value, threshold);
  r.exponent = exponent;
  r.binding_case = std::move(tag);
  return r;
}

ThresholdReport noisy_report(double a, double b, const NoisyRegime& m) {
  ThresholdReport r;
  // beta = 0 is the sublog case: eta(a, b, 0) reduces to the graph-only value.
  if (!m.beta || *m.beta == 0.0) {
    const double g = graph_only_value(a, b);
    r = make_report(g, 2.0, 0.5 * g, "noisy_sublog");
  } else if (*m.beta <= beta_star(a, b)) {
    const double e = eta(a, b, *m.beta);
    r = make_report(e, 2.0, 0.5 * e, "noisy_eta");
  } else {
    // Past T(a-b)/2 the sign-disagreeing Chernoff branch clamps at zero and
    // the flipped-label probability n^-beta takes over.
    const double beta = *m.beta;
    r = make_report(beta, 1.0, std::min(0.5 * eta(a, b, beta), beta), "noisy_beta");
  }
  if (a > b) r.critical_beta = critical_beta(a, b, CriticalKind::noisy);
  return r;
}

ThresholdReport erasure_report(double a, double b, const ErasureRegime& m) {
  const double g = graph_only_value(a, b);
  const double beta = m.beta.value_or(0.0);
  auto r = make_report(g + 2.0 * beta, 2.0, 0.5 * g + beta,
                       m.beta ? "erasure_beta" : "erasure_sublog");
  r.critical_beta = critical_beta(a, b, CriticalKind::erasure);
  return r;
}

const char* feature_case(const FeatureSequence& s, double beta_prime) {
  if (s.f1 == 0.0) return beta_prime == 0.0 ? "features_uninformative" : "features_rare";
  return beta_prime == 0.0 ? "features_informative" : "features_informative_rare";
}

ThresholdReport features_report(double a, double b, const FeaturesRegime& m) {
  const double limit = beta_star(a, b);
  std::optional<ThresholdReport> known;
  std::optional<ThresholdReport> gap;
  for (const auto& s : m.sequences) {
    const double beta1 = std::abs(s.f1);
    const double beta_prime = -(s.f1 >= 0.0 ? s.f2 : s.f3);
    if (beta1 <= limit) {
      const double value = eta(a, b, beta1) + 2.0 * beta_prime;
      if (!known || value < known->condition_value) {
        known = make_report(value, 2.0, 0.5 * value, feature_case(s, beta_prime));
      }
    } else {
      const double value = std::min(eta(a, b, beta1) + 2.0 * beta_prime, 2.0 * (beta1 + beta_prime));
      if (!gap || value < gap->condition_value) {
        gap = make_report(value, 2.0, 0.5 * value, "features_gap");
      }
    }
  }
  if (!gap) return *known;
  if (known && known->achievable == Achievable::no) return *known;
  ThresholdReport r = *gap;
  if (known && known->condition_value < r.condition_value) r = *known;
  r.achievable = Achievable::unknown_gap;
  return r;
}

}  // namespace

TGamma t_gamma(double a, double b, double beta) {
  check_ab(a, b);
  TGamma out;
  out.t = std::log(a / b);
  out.gamma = std::sqrt(beta * beta + a * b * out.t * out.t);
  out.degenerate = a == b;
  return out;
}

double beta_star(double a, double b) {
  check_ab(a, b);
  return std::log(a / b) * (a - b) / 2.0;
}

double graph_only_value(double a, double b) {
  check_ab(a, b);
  const double d = std::sqrt(a) - std::sqrt(b);
  return d * d;
}

double eta(double a, double b, double beta) {
  const auto tg = t_gamma(a, b, beta);
  if (tg.degenerate) throw DegenerateParameters("eta: undefined for a == b (T = 0)");
  if (!(beta >= 0.0)) throw std::invalid_argument("eta: beta must be >= 0");
  const double t = tg.t;
  const double gamma = tg.gamma;
  // gamma - beta = a b T^2 / (gamma + beta) avoids cancellation for large beta.
  const double gamma_minus = a * b * t * t / (gamma + beta);
  return a + b + beta - 2.0 * gamma / t + (beta / t) * std::log1p(2.0 * beta / gamma_minus);
}

void validate(const RegimeDescriptor& regime) {
  auto check_beta = [](const std::optional<double>& beta) {
    if (beta && !(*beta >= 0.0 && std::isfinite(*beta))) {
      throw std::invalid_argument("regime: beta must be finite and >= 0");
    }
  };
  if (const auto* m = std::get_if<NoisyRegime>(&regime)) check_beta(m->beta);
  if (const auto* m = std::get_if<ErasureRegime>(&regime)) check_beta(m->beta);
  if (const auto* m = std::get_if<FeaturesRegime>(&regime)) {
    if (m->sequences.empty()) throw std::invalid_argument("regime: no feature sequences");
    for (const auto& s : m->sequences) {
      if (!(s.f2 <= 0.0 && s.f3 <= 0.0)) {
        throw std::invalid_argument("regime: f2 and f3 coefficients must be <= 0");
      }
      if (std::abs(s.f1 - (s.f2 - s.f3)) > 1e-9) {
        throw std::invalid_argument("regime: f1 coefficient must equal f2 - f3");
      }
    }
  }
}

const char* to_string(Achievable a) {
  switch (a) {
    case Achievable::yes:
      return "yes";
    case Achievable::no:
      return "no";
    case Achievable::boundary:
      return "boundary";
    case Achievable::unknown_gap:
      return "unknown_gap";
  }
  return "unknown";
}

ThresholdReport recovery_predicate(double a, double b, const RegimeDescriptor& regime) {
  check_ab(a, b);
  validate(regime);
  if (const auto* m = std::get_if<NoisyRegime>(&regime)) return noisy_report(a, b, *m);
  if (const auto* m = std::get_if<ErasureRegime>(&regime)) return erasure_report(a, b, *m);
  if (const auto* m = std::get_if<FeaturesRegime>(&regime)) return features_report(a, b, *m);
  const auto& iid = std::get<FeaturesIidRegime>(regime);
  if (iid.k_growth == KGrowth::log_order) {
    throw NotCharacterized("features_iid: K of order log n is not characterized");
  }
  const double g = graph_only_value(a, b);
  return make_report(g, 2.0, 0.5 * g, "features_iid_sublog");
}

std::optional<double> critical_beta(double a, double b, CriticalKind kind) {
  const double g = graph_only_value(a, b);
  if (g >= 2.0) return 0.0;
  if (kind == CriticalKind::erasure) return 1.0 - 0.5 * g;
  if (a == b) return std::nullopt;

  const double hi_start = beta_star(a, b);
  if (!(eta(a, b, hi_start) > 2.0)) return 1.0;
  double lo = 0.0;
  double hi = hi_start;
  if (!(eta(a, b, lo) < 2.0)) throw std::logic_error("critical_beta: root not bracketed");
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (eta(a, b, mid) < 2.0 ? lo : hi) = mid;
  }
  // Forward check of the bracket the root came from.
  if (!(eta(a, b, lo) <= 2.0 && eta(a, b, hi) >= 2.0)) {
    throw std::logic_error("critical_beta: bisection lost the root");
  }
  return 0.5 * (lo + hi);
}

double error_exponent(double a, double b, const RegimeDescriptor& regime) {
  return recovery_predicate(a, b, regime).exponent;
}

}  // namespace sbmlab
