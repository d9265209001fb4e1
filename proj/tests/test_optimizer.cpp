#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>

#include "jscc/optimizer.hpp"

using namespace jscc;

namespace {

// Exhaustive 200 x 200 log grid over P1, Q1 in [1e-3, 1e3] with the
// closed-form analog power; written independently of optimize_upper_bound.
double coarse_grid_oracle(double alpha) {
  double best = INFINITY;
  for (int i = 0; i < 200; ++i) {
    const double p1 = std::pow(10.0, -3.0 + 6.0 * i / 199.0);
    for (int j = 0; j < 200; ++j) {
      const double q1 = std::pow(10.0, -3.0 + 6.0 * j / 199.0);
      const double pa = std::max(alpha * q1 + alpha * q1 * q1 * p1, (1.0 / q1 + p1) / std::log(1.0 + p1 * q1));
      best = std::min(best, pa + p1);
    }
  }
  return best;
}

}  // namespace

TEST(Compliance, UncodedMeetsOrderOneExactly) {
  for (double alpha : {0.1, 1.0, 10.0}) {
    const auto r = check_compliance(HybridParams{alpha, 0.0, 1.0}, Profile::rational_order1(alpha), QualityGrid{});
    EXPECT_TRUE(r.feasible);
    EXPECT_EQ(r.margin, 0.0);
  }
}

TEST(Compliance, CombinedMaxMeetsOrderTwo) {
  const HybridParams hp{min_pa_closed_form(1.0, 1.0, 1.0), 1.0, 1.0};
  const auto r = check_compliance(hp, Profile::rational_order2(1.0), verification_grid());
  EXPECT_TRUE(r.feasible);
  EXPECT_GE(r.margin, -kComplianceTolerance);
}

TEST(Compliance, UncodedFailsOrderTwo) {
  // margin(q) = q (P - q) / ((1 + P q)(1 + q^2)) is negative for q > P and
  // most negative near q = 2P for large P
  for (double power : {1.0, 100.0, 1e3}) {
    const QualityGrid grid{1e-4, 1e6, 2000};
    const auto r = check_compliance(HybridParams{power, 0.0, 1.0}, Profile::rational_order2(1.0), grid);
    EXPECT_FALSE(r.feasible);
    EXPECT_GT(r.worst_q, power);
    if (power >= 100.0) EXPECT_NEAR(r.worst_q / (2.0 * power), 1.0, 0.02);
  }
}

TEST(Compliance, UncodedViolationVanishesForHugePower) {
  // at P = 1e6 the violation (about -1/(4 P^2)) is below the compliance tolerance
  const QualityGrid grid{1e-4, 1e7, 2000};
  const auto r = check_compliance(HybridParams{1e6, 0.0, 1.0}, Profile::rational_order2(1.0), grid);
  EXPECT_LT(r.margin, 0.0);
  EXPECT_GT(r.margin, -1e-12);
  EXPECT_NEAR(r.worst_q / 2e6, 1.0, 0.02);
}

TEST(Compliance, ChecksJustBelowThreshold) {
  // analog power one part in 1e6 short of the below-threshold requirement:
  // the violation sits at Q1^- and is invisible on a coarse grid
  const double need = analog_power_below_threshold(1.0, 2.0, 1.0);
  ASSERT_DOUBLE_EQ(need, 3.0);
  const HybridParams big{need * (1 - 1e-6), 2.0, 1.0};
  const auto r = check_compliance(big, Profile::rational_order2(1.0), QualityGrid{1e-4, 1e6, 7});
  EXPECT_LT(r.margin, 0.0);
  EXPECT_EQ(r.worst_q, std::nextafter(1.0, 0.0));
}

TEST(Compliance, LayeredUsesEveryThreshold) {
  const LayeredParams lp{1.0, {1.0, 1.0, 1.0}, {0.5, 1.0, 2.0}};
  const auto pts = compliance_points(QualityGrid{1e-2, 1e2, 5}, lp.thresholds);
  for (double t : lp.thresholds) {
    EXPECT_NE(std::find(pts.begin(), pts.end(), t), pts.end());
    EXPECT_NE(std::find(pts.begin(), pts.end(), std::nextafter(t, 0.0)), pts.end());
  }
  EXPECT_TRUE(std::is_sorted(pts.begin(), pts.end()));
}

TEST(MinPa, ClosedForm) {
  EXPECT_NEAR(min_pa_closed_form(1.0, 1.0, 1.0), 2.0 / std::log(2.0), 1e-14);
  EXPECT_NEAR(min_pa_closed_form(1.0, 1.0, 1.0), 2.88539, 1e-5);
  EXPECT_NEAR(min_pa_closed_form(1.0, 10.0, 1.0), 11.0, 1e-13);
  EXPECT_NEAR(min_pa_closed_form(0.01, 1.0, 1.0), 2.0 / std::log(2.0), 1e-14);
  EXPECT_THROW(min_pa_closed_form(1.0, 0.0, 1.0), std::domain_error);
  EXPECT_THROW(min_pa_closed_form(1.0, 1.0, 0.0), std::domain_error);
}

TEST(MinPa, ExactAtUnitParameters) {
  const auto r = min_pa_exact(1.0, 1.0, 1.0, verification_grid());
  EXPECT_LE(r.p_a, min_pa_closed_form(1.0, 1.0, 1.0));
  EXPECT_DOUBLE_EQ(r.p_a, 2.0);  // below-threshold requirement dominates
  // sup of g over [1, 1e6]; dense 10^6-point grid oracle gives 0.46463592028507
  // at q = 10.303
  const double g_sup = analog_power_above_threshold(1.0, 1.0, 1.0, r.q_sup);
  EXPECT_GE(g_sup, 0.46463592028507 - 1e-13);
  EXPECT_LT(g_sup, 0.46463592028507 + 1e-9);
  EXPECT_NEAR(r.q_sup, 10.303, 0.01);
  EXPECT_FALSE(r.truncated);
}

TEST(MinPa, LargeJumpMakesGNegative) {
  // ln(1 + 10 * 1) > 1: the jump alone covers every q >= Q1, g < 0 throughout
  // and rises towards its limit (1 - L) P1 / L
  const double jump = std::log(11.0);
  for (double q : QualityGrid{1.0, 1e6, 200}.values()) {
    EXPECT_LT(analog_power_above_threshold(1.0, 10.0, 1.0, q), 0.0);
  }
  const auto r = min_pa_exact(1.0, 10.0, 1.0, verification_grid());
  EXPECT_DOUBLE_EQ(r.p_a, analog_power_below_threshold(1.0, 10.0, 1.0));
  EXPECT_DOUBLE_EQ(r.p_a, 11.0);
  EXPECT_EQ(r.q_sup, INFINITY);
  EXPECT_LT((1.0 - jump) * 10.0 / jump, 0.0);
}

TEST(MinPa, ExactNeverExceedsClosedForm) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> log_u(-3.0, 3.0);
  for (int i = 0; i < 300; ++i) {
    const double alpha = std::pow(10.0, log_u(rng));
    const double p1 = std::pow(10.0, log_u(rng));
    const double q1 = std::pow(10.0, log_u(rng));
    const auto exact = min_pa_exact(alpha, p1, q1, QualityGrid{1e-4, 1e6, 400});
    EXPECT_LE(exact.p_a, min_pa_closed_form(alpha, p1, q1) * (1 + 1e-12));
    // and the exact rule really does comply
    const auto rep = check_compliance(HybridParams{exact.p_a, p1, q1}, Profile::rational_order2(alpha),
                                      QualityGrid{1e-4, 1e6, 400});
    EXPECT_TRUE(rep.feasible) << alpha << ' ' << p1 << ' ' << q1 << ' ' << rep.margin;
  }
}

TEST(Optimize, ClosedFormAtUnitAlpha) {
  const auto r = optimize_upper_bound(1.0, PaRule::ClosedForm);
  EXPECT_LE(r.p_total, coarse_grid_oracle(1.0));
  // local minimum by Nelder-Mead and a 3001^2 local grid: 2.6455496 at
  // P1 = 0.2334, Q1 = 1.721
  EXPECT_NEAR(r.p_total, 2.6455496, 2.6455496 * 1e-3);
  EXPECT_NEAR(r.params.p_1, 0.2334, 0.01);
  EXPECT_NEAR(r.params.q_1, 1.721, 0.05);
  EXPECT_DOUBLE_EQ(r.p_total, r.params.p_a + r.params.p_1);
  EXPECT_GE(check_compliance(r.params, Profile::rational_order2(1.0), verification_grid()).margin,
            -kComplianceTolerance);
}

TEST(Optimize, UpperDominatesLower) {
  for (double alpha : {1e-2, 1.0, 1e2}) {
    const auto upper = optimize_upper_bound(alpha, PaRule::ClosedForm);
    const auto lower = lower_bound_pmin(Profile::rational_order2(alpha), QualityGrid{});
    EXPECT_GE(upper.p_total, lower.p_lower);
  }
}

TEST(Optimize, ExactNoWorseThanClosedForm) {
  GridSpec spec;
  spec.points_per_axis = 30;
  const auto closed = optimize_upper_bound(1.0, PaRule::ClosedForm, spec);
  const auto exact = optimize_upper_bound(1.0, PaRule::Exact, spec);
  EXPECT_LE(exact.p_total, closed.p_total);
}

TEST(Optimize, MonotoneInAlpha) {
  double prev = 0.0;
  for (double alpha : {1e-2, 1e-1, 1.0, 10.0, 1e2, 1e3}) {
    const double p = optimize_upper_bound(alpha, PaRule::ClosedForm).p_total;
    EXPECT_GE(p, prev);
    prev = p;
  }
}

TEST(Optimize, GapIsScaleInvariant) {
  // both bounds scale as sqrt(alpha) for the order-two profile
  const double alphas[] = {1e2, 1e4};
  const auto rows = sweep_bounds(alphas, PaRule::ClosedForm);
  EXPECT_NEAR(rows[0].gap_db, rows[1].gap_db, 0.05);
  EXPECT_NEAR(rows[1].p_upper / rows[0].p_upper, 10.0, 0.1);
}

TEST(Optimize, DeterministicAcrossWorkerCounts) {
  GridSpec spec;
  spec.points_per_axis = 20;
  const auto a = optimize_upper_bound(3.0, PaRule::ClosedForm, spec, true, 1);
  const auto b = optimize_upper_bound(3.0, PaRule::ClosedForm, spec, true, 7);
  EXPECT_EQ(a.p_total, b.p_total);
  EXPECT_EQ(a.params.p_1, b.params.p_1);
  EXPECT_EQ(a.params.q_1, b.params.q_1);
  ASSERT_EQ(a.search_log.size(), 4u * 20u * 20u);
  for (std::size_t i = 0; i < a.search_log.size(); ++i) EXPECT_EQ(a.search_log[i].p_total, b.search_log[i].p_total);
}

TEST(Optimize, OrderOneNeedsNoSearch) {
  for (double alpha : {0.1, 1.0, 10.0}) {
    const auto rep = check_compliance(HybridParams{alpha, 0.0, 1.0}, Profile::rational_order1(alpha), QualityGrid{});
    EXPECT_EQ(rep.margin, 0.0);
    EXPECT_NEAR(lower_bound_pmin(Profile::rational_order1(alpha), QualityGrid{}).p_lower, alpha, 1e-6 * alpha);
  }
}

TEST(Optimize, Validation) {
  EXPECT_THROW(optimize_upper_bound(0.0, PaRule::ClosedForm), std::domain_error);
  GridSpec spec;
  spec.points_per_axis = 5;
  EXPECT_THROW(optimize_upper_bound(1.0, PaRule::ClosedForm, spec), std::invalid_argument);
  spec = {};
  spec.p1_range = {1.0, 1.0};
  EXPECT_THROW(optimize_upper_bound(1.0, PaRule::ClosedForm, spec), std::invalid_argument);
}

TEST(Sweep, Csv) {
  const SweepRow row{1.0, 0.5, 2.0, 1.5, 0.5, 1.0, power_ratio_db(2.0, 0.5)};
  std::ostringstream os;
  write_sweep_csv(os, std::span<const SweepRow>(&row, 1));
  EXPECT_EQ(os.str(), "alpha,p_lower,p_upper,p_a,p_1,q_1,gap_db\n1,0.5,2,1.5,0.5,1,6.02059991328\n");
}
