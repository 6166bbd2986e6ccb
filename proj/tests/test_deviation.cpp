#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "oracles.hpp"
#include "sbmlab/deviation_bounds.hpp"
#include "sbmlab/thresholds.hpp"

using namespace sbmlab;

namespace {

// E[e^{tX}] over the four (Z, W) outcomes.
double mgf_by_outcomes(double t, double p, double q, double scale) {
  double total = 0;
  for (int z : {0, 1}) {
    for (int w : {0, 1}) {
      const double prob = (z ? q : 1 - q) * (w ? p : 1 - p);
      total += prob * std::exp(t * scale * (z - w));
    }
  }
  return total;
}

// sup over t >= 0 of 2 t kappa + a + b - b e^t - a e^-t by ternary search.
double clamped_sup_oracle(double a, double b, double kappa) {
  auto f = [&](double t) { return 2 * t * kappa + a + b - b * std::exp(t) - a * std::exp(-t); };
  double lo = 0, hi = 20;
  for (int i = 0; i < 300; ++i) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    (f(m1) < f(m2) ? lo : hi) = f(m1) < f(m2) ? m1 : m2;
  }
  return std::max(f(0.0), f(0.5 * (lo + hi)));
}

}  // namespace

TEST_SUITE("deviation_bounds") {

TEST_CASE("log mgf matches direct expectation") {
  for (double t : {-3.0, -0.5, 0.0, 0.4, 2.0}) {
    for (double p : {0.01, 0.2, 0.9}) {
      for (double q : {0.005, 0.1, 0.5}) {
        CHECK(log_mgf(t, p, q, 1.6) == doctest::Approx(std::log(mgf_by_outcomes(t, p, q, 1.6))).epsilon(1e-12));
      }
    }
  }
  CHECK(std::abs(log_mgf(0.0, 0.3, 0.2, 2.0)) < 1e-15);
  CHECK_THROWS_AS(log_mgf(0.1, 1.2, 0.1, 1.0), std::domain_error);
  CHECK_THROWS_AS(log_mgf(0.1, 0.2, -0.1, 1.0), std::domain_error);
}

TEST_CASE("log mgf is convex") {
  const double h = 1e-3;
  for (double t = -4; t <= 4; t += 0.05) {
    const double second = log_mgf(t + h, 0.05, 0.01, 2.0) - 2 * log_mgf(t, 0.05, 0.01, 2.0) +
                          log_mgf(t - h, 0.05, 0.01, 2.0);
    CHECK(second >= -1e-9);
  }
}

TEST_CASE("optimal t: pinned values and the beta = 0 case") {
  CHECK(optimal_t(5, 1, 0.5, Branch::plus) == doctest::Approx(0.5860496572751927546).epsilon(1e-14));
  CHECK(optimal_t(5, 1, 0.5, Branch::minus) == doctest::Approx(0.4139503427248072454).epsilon(1e-14));
  CHECK(optimal_t(5, 1, 0.0, Branch::plus) == 0.5);
  CHECK(optimal_t(9, 0.3, 0.0, Branch::minus) == 0.5);
  CHECK_THROWS_AS(optimal_t(2, 2, 0.5, Branch::plus), DegenerateParameters);
}

TEST_CASE("limit objective peaks at optimal t with value eta") {
  for (double a : {2.0, 5.0, 18.0}) {
    for (double b : {0.5, 1.0}) {
      for (double beta : {0.0, 0.3, 1.1}) {
        const double tp = optimal_t(a, b, beta, Branch::plus);
        const double argmax = golden_section_argmax(
            [&](double t) { return limit_objective(a, b, beta, t); }, 0.0, 1.0);
        CHECK(argmax == doctest::Approx(tp).epsilon(1e-7));
        CHECK(limit_objective(a, b, beta, tp) == doctest::Approx(eta(a, b, beta)).epsilon(1e-12));
        // Minus branch maximizes the objective with beta replaced by -beta.
        const double tm = optimal_t(a, b, beta, Branch::minus);
        const double argmax_m = golden_section_argmax(
            [&](double t) { return limit_objective(a, b, -beta, t); }, 0.0, 1.0);
        CHECK(argmax_m == doctest::Approx(tm).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("golden section widens its bracket") {
  const double x = golden_section_argmax([](double t) { return -(t - 7.5) * (t - 7.5); }, 0.0, 1.0);
  CHECK(x == doctest::Approx(7.5).epsilon(1e-8));
}

TEST_CASE("tilted argmax sets the tilted mean to the target") {
  const BernDiffSum sum{100, 0.3, 0.05, std::log(6.0)};
  for (double target : {-0.5, -0.1, 0.0, 0.2, 1.0}) {
    const double t = tilted_argmax(sum, target);
    CHECK(tilted_law(sum, t).mean == doctest::Approx(target).epsilon(1e-9));
    // Stationary point of t * target - Gamma(t).
    const double h = 1e-5;
    const double d = ((t + h) * target - log_mgf(t + h, sum.p, sum.q, sum.scale) -
                      ((t - h) * target - log_mgf(t - h, sum.p, sum.q, sum.scale))) / (2 * h);
    CHECK(std::abs(d) < 1e-7);
  }
  CHECK_THROWS(tilted_argmax(sum, 2.0));
}

TEST_CASE("tilted law by finite differences of the log mgf") {
  const BernDiffSum sum{10, 0.2, 0.1, 1.5};
  const double t = 0.7, h = 1e-4;
  const auto law = tilted_law(sum, t);
  const double g0 = log_mgf(t, 0.2, 0.1, 1.5);
  const double gp = log_mgf(t + h, 0.2, 0.1, 1.5);
  const double gm = log_mgf(t - h, 0.2, 0.1, 1.5);
  CHECK(law.mean == doctest::Approx((gp - gm) / (2 * h)).epsilon(1e-7));
  CHECK(law.variance == doctest::Approx((gp - 2 * g0 + gm) / (h * h)).epsilon(1e-5));
}

TEST_CASE("tilted lower bound never exceeds the exact tail") {
  for (std::size_t n : {20, 60, 150}) {
    const double p = 0.4, q = 0.1, scale = std::log(4.0);
    const BernDiffSum sum{n, p, q, scale};
    for (double target : {-0.4, -0.2, 0.0, 0.1}) {
      for (double eps : {0.05, 0.15, 0.3}) {
        const auto r = cramer_lower_bound(sum, target, eps);
        const double tail = oracle::tail_by_convolution(n, p, q, scale, target - eps);
        CAPTURE(n);
        CAPTURE(target);
        CAPTURE(eps);
        CHECK(r.bound <= tail);
        CHECK(r.bound >= 0.0);
      }
    }
  }
}

TEST_CASE("tilted correction grows toward one with n") {
  const double p = 0.4, q = 0.1, scale = std::log(4.0);
  double last = -INFINITY;
  for (std::size_t n : {10, 100, 1000, 10000}) {
    const auto r = cramer_lower_bound(BernDiffSum{n, p, q, scale}, -0.1, 0.1);
    CHECK(r.correction > last);
    last = r.correction;
  }
  CHECK(last > 0.9);
}

TEST_CASE("chernoff terms match the defining supremum") {
  const double a = 18, b = 2, n = 2000, delta = 0.01, d = 3;
  for (double c : {0.0, 0.5, 2.0, 6.0}) {
    const auto r = chernoff_upper_bound_pe(a, b, c, n, delta, d);
    const double log_n = std::log(n);
    const double psi = 1 / std::sqrt(-std::log(delta));
    const double ratio = c / (std::log(a / b) * log_n);
    const double alpha = 1 / (1 + std::exp(c));
    CHECK(r.psi == doctest::Approx(psi).epsilon(1e-14));
    CHECK(r.alpha == doctest::Approx(alpha).epsilon(1e-14));
    CHECK(r.term_agree ==
          doctest::Approx((1 - alpha) * std::exp(-0.5 * log_n * clamped_sup_oracle(a, b, ratio - psi))).epsilon(1e-8));
    CHECK(r.term_disagree ==
          doctest::Approx(alpha * std::exp(-0.5 * log_n * clamped_sup_oracle(a, b, -ratio - psi))).epsilon(1e-8));
    CHECK(r.total <= 1.0);
    CHECK(r.total >= r.term_agree);
  }
}

TEST_CASE("chernoff spill clamps when the trimmed mass is large") {
  // At desk-scale n the expected spill mass exceeds psi log n and the bound is vacuous.
  const auto desk = chernoff_upper_bound_pe(18, 2, 1, 2000, 0.01, 3);
  CHECK(desk.spill == 1.0);
  CHECK(desk.total == 1.0);
  // Tiny delta and D shrink the mean and the spill bound falls below one.
  const auto far = chernoff_upper_bound_pe(18, 2, 1, 1e12, 1e-6, 0.01);
  CHECK(far.spill < 1.0);
}

TEST_CASE("chernoff clamp flags") {
  // Huge c pushes kappa2 deep negative: the disagree supremum sits at t = 0.
  const auto r = chernoff_upper_bound_pe(5, 1, 200, 1000, 0.1, 2);
  CHECK(r.t2_clamped);
  CHECK(r.term_disagree == doctest::Approx(r.alpha).epsilon(1e-12));
  CHECK_THROWS_AS(chernoff_upper_bound_pe(1, 1, 1, 1000, 0.1, 2), std::invalid_argument);
  CHECK_THROWS_AS(chernoff_upper_bound_pe(5, 1, 1, 1000, 1.5, 2), std::invalid_argument);
}

}
