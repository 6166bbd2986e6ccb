#include "sbmlab/deviation_bounds.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sbmlab/thresholds.hpp"

namespace sbmlab {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add_exp(double x, double y) {
  if (x == kNegInf) return y;
  if (y == kNegInf) return x;
  const double hi = std::max(x, y);
  return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

void check_sum(const BernDiffSum& sum) {
  if (!(sum.q > 0.0 && sum.q <= sum.p && sum.p < 1.0)) {
    throw std::invalid_argument("BernDiffSum: require 0 < q <= p < 1");
  }
  if (!(sum.scale > 0.0)) throw std::invalid_argument("BernDiffSum: scale must be > 0");
}

// Support points of X and their log-probabilities: +T from (Z,W) = (1,0),
// -T from (0,1), 0 from the two ties.
struct FourPoint {
  std::array<double, 3> x;
  std::array<double, 3> log_prob;
};

FourPoint support(const BernDiffSum& s) {
  const double up = s.q * (1.0 - s.p);
  const double down = (1.0 - s.q) * s.p;
  const double tie = s.q * s.p + (1.0 - s.q) * (1.0 - s.p);
  return {{s.scale, -s.scale, 0.0}, {safe_log(up), safe_log(down), safe_log(tie)}};
}

// sup over t > 0 of 2 t kappa + a + b - b e^t - a e^-t; stationary point
// e^t = (kappa + sqrt(kappa^2 + ab)) / b.
struct ClampedSup {
  double t = 0.0;
  double value = 0.0;
  bool clamped = true;
};

ClampedSup clamped_sup(double a, double b, double kappa) {
  const double root = std::sqrt(kappa * kappa + a * b);
  const double u = kappa >= 0.0 ? (kappa + root) / b : a / (root - kappa);
  ClampedSup s;
  if (u > 1.0) {
    s.t = std::log(u);
    s.value = 2.0 * s.t * kappa + a + b - b * u - a / u;
    s.clamped = false;
  }
  return s;
}

}  // namespace

double log_mgf(double t, double p, double q, double t_scale) {
  if (!(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0)) {
    throw std::domain_error("log_mgf: p and q must lie in [0, 1]");
  }
  const double up = log_add_exp(safe_log(1.0 - q), safe_log(q) + t * t_scale);
  const double down = log_add_exp(safe_log(1.0 - p), safe_log(p) - t * t_scale);
  const double value = up + down;
  if (!std::isfinite(value)) throw std::domain_error("log_mgf: not finite at this t");
  return value;
}

double optimal_t(double a, double b, double beta, Branch branch) {
  if (!(beta >= 0.0)) throw std::invalid_argument("optimal_t: beta must be >= 0");
  const auto tg = t_gamma(a, b, beta);
  if (tg.degenerate) throw DegenerateParameters("optimal_t: undefined for a == b (T = 0)");
  const double shift = std::asinh(beta / (tg.t * std::sqrt(a * b))) / tg.t;
  const double t = branch == Branch::plus ? 0.5 + shift : 0.5 - shift;
#ifndef NDEBUG
  const double signed_beta = branch == Branch::plus ? beta : -beta;
  const double numeric = golden_section_argmax(
      [&](double s) { return limit_objective(a, b, signed_beta, s); }, -1.0, 2.0);
  assert(std::abs(numeric - t) < 1e-6);
#endif
  return t;
}

double limit_objective(double a, double b, double beta, double t) {
  const double tt = std::log(a / b);
  return 2.0 * beta * t - b * std::expm1(t * tt) - a * std::expm1(-t * tt);
}

double golden_section_argmax(const std::function<double(double)>& f, double lo, double hi,
                             double tol) {
  if (!(lo < hi)) throw std::invalid_argument("golden_section_argmax: empty bracket");
  for (int grow = 0; grow < 60; ++grow) {
    const double width = hi - lo;
    const double step = 1e-3 * width;
    bool moved = false;
    if (f(hi) > f(hi - step)) {
      hi += width;
      moved = true;
    }
    if (f(lo) > f(lo + step)) {
      lo -= width;
      moved = true;
    }
    if (!moved) break;
  }
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  return 0.5 * (lo + hi);
}

TiltedLaw tilted_law(const BernDiffSum& sum, double t) {
  check_sum(sum);
  const auto fp = support(sum);
  std::array<double, 3> logw{};
  double top = kNegInf;
  for (std::size_t k = 0; k < 3; ++k) {
    logw[k] = fp.log_prob[k] + t * fp.x[k];
    top = std::max(top, logw[k]);
  }
  double total = 0.0;
  std::array<double, 3> w{};
  for (std::size_t k = 0; k < 3; ++k) {
    w[k] = std::exp(logw[k] - top);
    total += w[k];
  }
  TiltedLaw law;
  double second = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    law.mean += w[k] / total * fp.x[k];
    second += w[k] / total * fp.x[k] * fp.x[k];
  }
  law.variance = std::max(0.0, second - law.mean * law.mean);
  return law;
}

double tilted_argmax(const BernDiffSum& sum, double a_target) {
  check_sum(sum);
  if (!(a_target > -sum.scale && a_target < sum.scale)) {
    throw std::invalid_argument("tilted_argmax: a_target must lie inside (-T, T)");
  }
  // The derivative of t a - Gamma(t) is a minus the tilted mean, which
  // increases in t.
  auto mean = [&](double t) { return tilted_law(sum, t).mean; };
  double lo = -1.0;
  double hi = 1.0;
  while (mean(lo) > a_target) {
    lo *= 2.0;
    if (lo < -1e9) throw std::domain_error("tilted_argmax: no bracket");
  }
  while (mean(hi) < a_target) {
    hi *= 2.0;
    if (hi > 1e9) throw std::domain_error("tilted_argmax: no bracket");
  }
  for (int it = 0; it < 400 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean(mid) < a_target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TiltedBoundResult cramer_lower_bound(const BernDiffSum& sum, double a_target, double eps) {
  check_sum(sum);
  if (!(eps > 0.0)) throw std::invalid_argument("cramer_lower_bound: eps must be > 0");
  if (sum.n_terms == 0) throw std::invalid_argument("cramer_lower_bound: n_terms must be > 0");
  TiltedBoundResult r;
  const double n = static_cast<double>(sum.n_terms);
  r.t_star = tilted_argmax(sum, a_target);
  const auto law = tilted_law(sum, r.t_star);
  r.tilted_mean = law.mean;
  r.tilted_variance = law.variance;
  const double gamma = log_mgf(r.t_star, sum.p, sum.q, sum.scale);
  r.exponent_term = n * (r.t_star * a_target - gamma + std::abs(r.t_star) * eps);
  r.correction = 1.0 - law.variance / (n * eps * eps);
  r.vacuous = !(r.correction > 0.0);
  r.bound = r.vacuous ? 0.0 : std::exp(-r.exponent_term) * r.correction;
  return r;
}

ChernoffBound chernoff_upper_bound_pe(double a, double b, double c_llr, double n,
                                      double delta_weak, double d_split) {
  if (!(a > b && b > 0.0)) throw std::invalid_argument("chernoff_upper_bound_pe: require a > b > 0");
  if (!(c_llr >= 0.0)) throw std::invalid_argument("chernoff_upper_bound_pe: c must be >= 0");
  if (!(n > 1.0)) throw std::invalid_argument("chernoff_upper_bound_pe: n must be > 1");
  if (!(delta_weak > 0.0 && delta_weak < 1.0)) {
    throw std::invalid_argument("chernoff_upper_bound_pe: delta_weak must lie in (0, 1)");
  }
  if (!(d_split > 0.0)) throw std::invalid_argument("chernoff_upper_bound_pe: D must be > 0");

  ChernoffBound r;
  const double t_scale = std::log(a / b);
  const double log_n = std::log(n);
  r.psi = 1.0 / std::sqrt(-std::log(delta_weak));
  // alpha = 1 / (1 + e^c), written to stay accurate for large c.
  r.alpha = std::exp(-c_llr) / (1.0 + std::exp(-c_llr));

  const double ratio = c_llr / (t_scale * log_n);
  const auto s1 = clamped_sup(a, b, ratio - r.psi);
  const auto s2 = clamped_sup(a, b, -ratio - r.psi);
  r.t1 = s1.t;
  r.t2 = s2.t;
  r.t1_clamped = s1.clamped;
  r.t2_clamped = s2.clamped;
  r.term_agree = (1.0 - r.alpha) * std::exp(-0.5 * log_n * s1.value);
  r.term_disagree = r.alpha * std::exp(-0.5 * log_n * s2.value);

  // P(sum of m Bern(p) >= psi log n) <= (s / e)^(-psi log n), s = psi log n / mu.
  const double mu = a * (delta_weak * log_n + 2.0 * d_split);
  const double s = r.psi * log_n / mu;
  const double log_spill = -r.psi * log_n * (std::log(s) - 1.0);
  r.spill = std::exp(std::min(0.0, log_spill));

  r.total = std::min(1.0, r.term_agree + r.term_disagree + r.spill);
  return r;
}

}  // namespace sbmlab
