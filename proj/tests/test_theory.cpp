#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "dqsim/rng.hpp"
#include "dqsim/theory.hpp"

using namespace dqsim;
using namespace dqsim::theory;

namespace {

// Independent transcriptions of the long displays, written term by term in
// their printed shape rather than the library's factored form.
double tau1_min_sync_g_printed(double c, double k, double D, double xi, double sg,
                               double eps, double V, double om) {
  const double den = k * k * std::pow(D / (2 + D), 2) * sg * sg * xi * xi * eps * eps;
  const double first = std::pow(1.0 / (1.0 - std::log(2 + D)), 1.0 / om);
  const double second = std::pow(
      128 * c * (c + k) * V * V / den * std::log(64 * c * (c + k) * V * V / den), 1.0 / om);
  return std::max(first, second);
}

double tau1_min_sync_d_printed(double c, double k, double D, double beta, double eps,
                               double V, double om) {
  const double den = k * k * std::pow(D / (2 + D), 2) * beta * beta * eps * eps;
  const double first = std::pow(1.0 / (k - std::log(2 + D)), 1.0 / om);
  const double second = std::pow(
      32 * c * (c + k) * V * V / den * std::log(16 * c * (c + k) * V * V / den), 1.0 / om);
  return std::max(first, second);
}

double failure_sync_g_printed(long n, double c, double k, double D, double xi,
                              double sg, double eps, double V, double tau1,
                              double om, long sa) {
  return 4 * c * (n + 1) / k * (1 + 2 * c / k) * sa *
         std::exp(-(k * k * std::pow(D / (2 + D), 2) * xi * xi * sg * sg * eps * eps *
                    std::pow(tau1, om)) /
                  (64 * c * (c + k) * V * V));
}

double failure_sync_d_printed(long m, double c, double k, double D, double beta,
                              double eps, double V, double tau1, double om, long sa) {
  return 4 * c * (m + 1) / k * (1 + 2 * c / k) * sa *
         std::exp(-(k * k * std::pow(D / (2 + D), 2) * beta * beta * eps * eps *
                    std::pow(tau1, om)) /
                  (16 * c * (c + k) * V * V));
}

double iteration_scale_sync_printed(double V, double g, double eps, double delta, long sa,
                            double om) {
  const double one = 1.0 - g;
  return std::pow(V * V / (std::pow(one, 4) * eps * eps) *
                      std::log(sa * V * V / (std::pow(one, 5) * eps * eps * delta)),
                  1.0 / om) +
         std::pow(1.0 / one * std::log(V / (one * eps)), 1.0 / (1.0 - om));
}

TheoryParams desk_params() {
  TheoryParams p;
  p.gamma = 0.5;
  p.epsilon = 0.5;
  p.delta = 0.05;
  p.omega = 0.8;
  p.kappa = 0.8;
  p.delta_slack = 0.1;
  p.covering_l = 1;
  p.r_max = 1.0;
  return p;
}

}  // namespace

TEST_CASE("derived constants at gamma 0.5 and identities") {
  const DerivedConstants c = derive_constants(0.5, 1.0);
  CHECK(c.v_max == doctest::Approx(4.0));
  CHECK(c.xi == doctest::Approx(0.125));
  CHECK(c.sigma == doctest::Approx(0.5));
  CHECK(c.beta == doctest::Approx(0.125));
  CHECK(c.gamma_prime == doctest::Approx(0.75));
  CHECK(c.gamma_dprime == doctest::Approx(0.75));
  CHECK(derive_constants(0.9, 1.0).v_max == doctest::Approx(20.0));

  Rng rng(123);
  for (int i = 0; i < 1000; ++i) {
    const double g = rng.uniform(1.0 / 3.0 + 1e-6, 1.0 - 1e-6);
    const DerivedConstants d = derive_constants(g, 1.0);
    REQUIRE(std::abs(d.beta - d.xi) <= 1e-14);
    REQUIRE(std::abs(d.gamma_dprime - d.gamma_prime) <= 1e-14);
  }
  CHECK_THROWS_AS(derive_constants(1.0, 1.0), std::invalid_argument);
}

TEST_CASE("envelope sequences and their coupling") {
  const DerivedConstants c = derive_constants(0.5, 1.0);
  CHECK(g_seq(0, c) == doctest::Approx(4.0));
  CHECK(g_seq(1, c) == doctest::Approx(3.5));
  CHECK(d_seq(0, c) == doctest::Approx(8.0));
  CHECK(c.sigma * d_seq(0, c) == doctest::Approx(g_seq(0, c)));
  for (long k = 0; k <= 100; ++k) {
    REQUIRE(std::abs(c.sigma * d_seq(k, c) - g_seq(k, c)) <= 1e-12 * g_seq(k, c));
    if (k > 0) {
      REQUIRE(g_seq(k, c) < g_seq(k - 1, c));
      REQUIRE(d_seq(k, c) < d_seq(k - 1, c));
    }
  }
}

TEST_CASE("epoch schedule construction and growth law") {
  const BlockSchedule s = epoch_schedule(100, 2.0, 0.5, 3);
  CHECK(s.boundaries[0] == 100);
  CHECK(s.boundaries[1] == 120);  // 100 + ceil(2*10)
  CHECK_THROWS_AS(epoch_schedule(100, 0.0, 0.5, 3), std::invalid_argument);
  CHECK_THROWS_AS(epoch_schedule(0, 2.0, 0.5, 3), std::invalid_argument);

  // x_k = O(x_1 + (coeff k)^{1/(1-omega)}): the ratio stays bounded and the
  // log-log slope over late blocks matches 1/(1-omega)
  for (double omega : {0.5, 0.8}) {
    for (double coeff : {2.0, 10.0}) {
      const BlockSchedule big = epoch_schedule(50, coeff, omega, 200);
      double max_ratio = 0.0;
      for (std::size_t k = 1; k < big.boundaries.size(); ++k) {
        const double model =
            50.0 + std::pow(coeff * static_cast<double>(k), 1.0 / (1.0 - omega));
        max_ratio = std::max(max_ratio,
                             static_cast<double>(big.boundaries[k]) / model);
        REQUIRE(big.boundaries[k] > big.boundaries[k - 1]);
      }
      CHECK(max_ratio < 8.0);
      const double slope =
          std::log(static_cast<double>(big.boundaries[200]) / big.boundaries[100]) /
          std::log(200.0 / 100.0);
      CHECK(slope == doctest::Approx(1.0 / (1.0 - omega)).epsilon(0.10));
    }
  }
}

TEST_CASE("c_min per condition") {
  // huge tau_1 makes 1/tau^omega vanish: ln(2.1)/(1-ln(2.1)) ~ 2.874
  const double asym = c_min(BoundKind::kSyncG, 0.8, 0.1, 1e12, 0.8, 1);
  CHECK(asym == doctest::Approx(std::log(2.1) / (1.0 - std::log(2.1))).epsilon(1e-6));
  CHECK(asym == doctest::Approx(2.874).epsilon(1e-3));

  // just below the first-term threshold the denominator is not positive
  const double tau_boundary = std::pow(1.0 / (1.0 - std::log(2.1)), 1.0 / 0.8);
  CHECK_THROWS_AS(c_min(BoundKind::kSyncG, 0.8, 0.1, tau_boundary * 0.999, 0.8, 1),
                  std::domain_error);

  // async gap condition is exactly L times the kappa-scaled sync-d form
  const double sd = c_min(BoundKind::kSyncD, 0.8, 0.1, 200, 0.8, 1);
  const double ag3 = c_min(BoundKind::kAsyncG, 0.8, 0.1, 200, 0.8, 3);
  CHECK(ag3 == doctest::Approx(3.0 * sd).epsilon(1e-12));

  // async residual condition drops the kappa factor in the numerator
  const double ad = c_min(BoundKind::kAsyncD, 0.8, 0.1, 200, 0.8, 1);
  CHECK(ad == doctest::Approx(sd / 0.8).epsilon(1e-12));

  const TheoryParams p = desk_params();
  CHECK(c_min_composed(p, 200, true) == doctest::Approx(std::max(
      c_min(BoundKind::kSyncG, 0.8, 0.1, 200, 0.8, 1), sd)));
}

TEST_CASE("tau1 minima against printed-form re-implementations") {
  TheoryParams p = desk_params();
  const DerivedConstants c = derive_constants(p.gamma, p.r_max);
  p.c = c_min_composed(p, 200, true);

  const double g_ref = tau1_min_sync_g_printed(p.c, p.kappa, p.delta_slack, c.xi,
                                               c.sigma, p.epsilon, c.v_max, p.omega);
  CHECK(tau1_min(BoundKind::kSyncG, p, c) == doctest::Approx(g_ref).epsilon(1e-10));

  const double d_ref = tau1_min_sync_d_printed(p.c, p.kappa, p.delta_slack, c.beta,
                                               p.epsilon, c.v_max, p.omega);
  CHECK(tau1_min(BoundKind::kSyncD, p, c) == doctest::Approx(d_ref).epsilon(1e-10));

  // finite and positive at the example parameters
  CHECK(tau1_min(BoundKind::kSyncG, p, c) > 0.0);
  CHECK(std::isfinite(tau1_min(BoundKind::kSyncG, p, c)));

  // first term alone: 1 - ln(2.1) = 0.2581...
  CHECK(1.0 - std::log(2.1) == doctest::Approx(0.2581).epsilon(1e-3));

  // near the slack boundary the first term diverges and the guard fires
  TheoryParams bad = p;
  bad.delta_slack = std::exp(1.0) - 2.0 + 1e-9;
  CHECK_THROWS_AS(tau1_min(BoundKind::kSyncG, bad, c), std::domain_error);

  // L=1 async matches sync-d entirely, and sync-g on the shared second term
  TheoryParams pl = p;
  pl.covering_l = 1;
  CHECK(tau1_min(BoundKind::kAsyncD, pl, c) ==
        doctest::Approx(tau1_min(BoundKind::kSyncD, pl, c)).epsilon(1e-12));
  const double async_g = tau1_min(BoundKind::kAsyncG, pl, c);
  const double den = p.kappa * p.kappa * std::pow(p.delta_slack / 2.1, 2) * c.xi * c.xi *
                     c.sigma * c.sigma * p.epsilon * p.epsilon;
  const double shared_second =
      std::pow(128 * p.c * (p.c + p.kappa) * c.v_max * c.v_max / den *
                   std::log(64 * p.c * (p.c + p.kappa) * c.v_max * c.v_max / den),
               1.0 / p.omega);
  CHECK(async_g == doctest::Approx(shared_second).epsilon(1e-10));

  // L=10 versus L=1 scales the dominant term between L^2 and ~L^2 ln L
  TheoryParams p10 = p;
  p10.covering_l = 10;
  const double r = tau1_min(BoundKind::kAsyncG, p10, c) / async_g;
  const double lo = std::pow(100.0, 1.0 / p.omega);
  const double hi = std::pow(100.0 * 3.0 * std::log(10.0), 1.0 / p.omega);
  CHECK(r >= lo * 0.9);
  CHECK(r <= hi);
}

TEST_CASE("m_star") {
  CHECK(m_star(0.5, 0.1, 4.0) == 36);  // ceil(8 ln 80) with ln 80 = 4.382
  CHECK(m_star(0.5, 8.0, 4.0) == 0);   // epsilon already at D_0
  const DerivedConstants c = derive_constants(0.5, 1.0);
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double g = rng.uniform(0.35, 0.95);
    const double eps = rng.uniform(0.01, 1.0);
    const DerivedConstants d = derive_constants(g, 1.0);
    const long m = m_star(g, eps, d.v_max);
    REQUIRE(d_seq(m, d) <= eps);
  }
  CHECK(d_seq(36, c) <= 0.1);
}

TEST_CASE("failure probabilities") {
  TheoryParams p = desk_params();
  const DerivedConstants c = derive_constants(p.gamma, p.r_max);
  p.c = c_min_composed(p, 200, true);
  const long sa = 8;

  // vanishes as tau_1 grows
  const double at_min = failure_prob(BoundKind::kSyncG, 9, p, c,
                                     tau1_min(BoundKind::kSyncG, p, c), sa);
  CHECK(at_min <= 1e-6);
  CHECK(failure_prob(BoundKind::kSyncG, 9, p, c, 1e18, sa) == 0.0);

  // linear in the block count below the clamp
  const double f0 = failure_prob(BoundKind::kSyncG, 0, p, c, 1e15, sa);
  const double f9 = failure_prob(BoundKind::kSyncG, 9, p, c, 1e15, sa);
  CHECK(f0 / f9 == doctest::Approx(0.1).epsilon(1e-9));

  // clamps to 1 for tiny tau_1
  CHECK(failure_prob(BoundKind::kSyncG, 9, p, c, 1.0, sa) == 1.0);

  // printed-form agreement, evaluated where the value sits below the clamp
  const double tau = 1e15;
  CHECK(failure_prob(BoundKind::kSyncG, 4, p, c, tau, sa) ==
        doctest::Approx(failure_sync_g_printed(4, p.c, p.kappa, p.delta_slack, c.xi,
                                               c.sigma, p.epsilon, c.v_max, tau,
                                               p.omega, sa))
            .epsilon(1e-10));
  CHECK(failure_prob(BoundKind::kSyncD, 4, p, c, tau, sa) ==
        doctest::Approx(failure_sync_d_printed(4, p.c, p.kappa, p.delta_slack, c.beta,
                                               p.epsilon, c.v_max, tau, p.omega, sa))
            .epsilon(1e-10));

  // async reduces to sync at L=1
  TheoryParams pl = p;
  pl.covering_l = 1;
  CHECK(failure_prob(BoundKind::kAsyncG, 4, pl, c, tau, sa) ==
        doctest::Approx(failure_prob(BoundKind::kSyncG, 4, p, c, tau, sa)).epsilon(1e-12));
  CHECK(failure_prob(BoundKind::kAsyncD, 4, pl, c, tau, sa) ==
        doctest::Approx(failure_prob(BoundKind::kSyncD, 4, p, c, tau, sa)).epsilon(1e-12));

  // monotone: decreasing in tau_1, increasing in the block count
  CHECK(failure_prob(BoundKind::kSyncD, 4, p, c, 1.2e15, sa) <
        failure_prob(BoundKind::kSyncD, 4, p, c, 1e15, sa));
  CHECK(failure_prob(BoundKind::kSyncD, 5, p, c, 1e15, sa) >
        failure_prob(BoundKind::kSyncD, 4, p, c, 1e15, sa));
}

TEST_CASE("update deficit probability") {
  CHECK(update_deficit_prob(0, 100, 3.0, 0.8, 0.8, 1) == 0.0);
  const double one = update_deficit_prob(18, 100, 3.0, 0.8, 0.8, 1);
  const double two = update_deficit_prob(36, 100, 3.0, 0.8, 0.8, 1);
  CHECK(two == doctest::Approx(2.0 * one).epsilon(1e-12));
  // hand evaluation: 36 exp(-0.04*3*100^0.8/0.8) ~ 0.0917
  const double hand = 36.0 * std::exp(-0.04 * 3.0 * std::pow(100.0, 0.8) / 0.8);
  CHECK(two == doctest::Approx(hand).epsilon(1e-12));
  CHECK(two == doctest::Approx(0.0917).epsilon(2e-3));
  CHECK(update_deficit_prob(1000000, 1, 0.001, 0.8, 0.8, 1) == 1.0);
}

TEST_CASE("iteration scale indicators") {
  TheoryParams p = desk_params();
  p.epsilon = 0.1;
  const DerivedConstants c = derive_constants(p.gamma, p.r_max);
  p.c = 3.0;

  // omega = 1/2 turns the block term into an exact square
  TheoryParams ph = p;
  ph.omega = 0.5;
  const IterationScale th = iteration_scale(ph, c, 4, 2, true);
  const double base = 1.0 / (1.0 - ph.gamma) * std::log(c.v_max / ((1.0 - ph.gamma) * ph.epsilon));
  CHECK(th.block_term == doctest::Approx(base * base).epsilon(1e-12));

  // printed-form agreement for the synchronous total
  const IterationScale ts = iteration_scale(p, c, 4, 2, true);
  CHECK(ts.total ==
        doctest::Approx(iteration_scale_sync_printed(c.v_max, p.gamma, p.epsilon, p.delta, 8, p.omega))
            .epsilon(1e-10));
  CHECK(ts.total > 0.0);
  CHECK(std::isfinite(ts.total));

  // L=1 async shares the first term; the second differs only by the gamma
  // inside its log
  TheoryParams pl = p;
  pl.covering_l = 1;
  const IterationScale ta = iteration_scale(pl, c, 4, 2, false);
  CHECK(ta.lr_term == doctest::Approx(ts.lr_term).epsilon(1e-12));
  const double async_base =
      1.0 / (1.0 - p.gamma) * std::log(p.gamma * c.v_max / ((1.0 - p.gamma) * p.epsilon));
  CHECK(ta.block_term == doctest::Approx(std::pow(async_base, 1.0 / (1.0 - p.omega))).epsilon(1e-12));
}

TEST_CASE("product inequality") {
  const auto [prod, bound] = prod_help_check(2, 4, 0.5);
  CHECK(prod == doctest::Approx((1 - 1 / std::sqrt(2.0)) * (1 - 1 / std::sqrt(3.0)) * 0.5)
                    .epsilon(1e-12));
  CHECK(prod == doctest::Approx(0.06188).epsilon(1e-3));
  CHECK(bound == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(prod <= bound);

  CHECK_THROWS_AS(prod_help_check(1, 4, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(prod_help_check(4, 4, 0.5), std::invalid_argument);

  const auto [p2, b2] = prod_help_check(7, 8, 0.3);  // minimal two-factor case
  CHECK(p2 <= b2);
}

TEST_CASE("tau inequality") {
  const auto [lhs, rhs] = tau_help_check(2.0, 1.0, 3.0);
  CHECK(lhs == doctest::Approx(3.0 * std::exp(-3.0)).epsilon(1e-12));
  CHECK(rhs == doctest::Approx(std::exp(-1.5)).epsilon(1e-12));
  CHECK(lhs <= rhs);

  // exactly at the threshold
  const double a = 3.0, b = 2.0;
  const double thr = 2 * a * b * std::log(a * b);
  const auto [l2, r2] = tau_help_check(a, b, thr);
  CHECK(l2 <= r2);

  CHECK_THROWS_AS(tau_help_check(1.0, 1.0, 10.0), std::invalid_argument);  // 2ab ln ab < 1
  CHECK_THROWS_AS(tau_help_check(2.0, 1.0, 1.0), std::invalid_argument);   // below threshold
}

TEST_CASE("parameter validation distinguishes the two ranges") {
  TheoryParams p = desk_params();
  p.c = 1.0;
  p.kappa = 0.5;  // fine for the gap sequence, too small once D is involved
  CHECK_NOTHROW(validate_for_g_sequence(p));
  CHECK_THROWS_WITH_AS(validate_strict(p),
                       doctest::Contains("0.693"), std::invalid_argument);
  p.kappa = 0.8;
  CHECK_NOTHROW(validate_strict(p));
  p.delta_slack = 0.3;  // above e^0.8 - 2 = 0.2255
  CHECK_THROWS_AS(validate_strict(p), std::invalid_argument);
  p.delta_slack = 0.1;
  p.gamma = 0.2;
  CHECK_THROWS_AS(validate_for_g_sequence(p), std::invalid_argument);
}
