#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jscc/bounds.hpp"
#include "jscc/errors.hpp"
#include "jscc/golden.hpp"
#include "jscc/parallel.hpp"
#include "jscc/profiles.hpp"
#include "jscc/schemes.hpp"

namespace jscc {

/// Margins at or above this count as compliant.
inline constexpr double kComplianceTolerance = 1e-9;

struct FeasibilityReport {
  bool feasible = false;
  double worst_q = 0.0;
  double margin = 0.0;  // min over evaluated points of F(q) - target(q)
};

/**
 * Points at which a staircase curve is compared with a profile: every grid
 * point plus, for each threshold inside the grid, the threshold itself and the
 * largest double below it. Sorted, duplicates removed.
 */
inline std::vector<double> compliance_points(const QualityGrid& grid, std::span<const double> thresholds) {
  auto qs = grid.values();
  for (double t : thresholds) {
    if (t >= grid.q_min && t <= grid.q_max) qs.push_back(t);
    const double below = std::nextafter(t, 0.0);
    if (below >= grid.q_min && below <= grid.q_max) qs.push_back(below);
  }
  std::sort(qs.begin(), qs.end());
  qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
  return qs;
}

template <class Fidelity>
FeasibilityReport check_compliance_curve(Fidelity&& fidelity, std::span<const double> thresholds,
                                         const Profile& target, const QualityGrid& grid) {
  grid.validate();
  FeasibilityReport out;
  out.margin = std::numeric_limits<double>::infinity();
  for (double q : compliance_points(grid, thresholds)) {
    if (q < target.q_lo() || q > target.q_hi()) continue;
    const double m = fidelity(q) - target(q);
    if (m < out.margin) {
      out.margin = m;
      out.worst_q = q;
    }
  }
  if (std::isinf(out.margin)) {
    throw std::invalid_argument("check_compliance: grid does not overlap the profile");
  }
  out.feasible = out.margin >= -kComplianceTolerance;
  return out;
}

inline FeasibilityReport check_compliance(const HybridParams& hp, const Profile& target,
                                          const QualityGrid& grid) {
  hp.validate();
  const double thresholds[] = {hp.q_1};
  return check_compliance_curve([&](double q) { return hybrid_fidelity(hp, q); }, thresholds, target, grid);
}

inline FeasibilityReport check_compliance(const LayeredParams& lp, const Profile& target,
                                          const QualityGrid& grid) {
  lp.validate();
  return check_compliance_curve([&](double q) { return multilayer_fidelity(lp, q); }, lp.thresholds,
                                target, grid);
}

// ---------------------------------------------------------------------------
// Minimum analog power for the order-two rational profile

namespace detail {
inline void require_digital_layer(double p_1, double q_1) {
  if (!(p_1 > 0.0) || !std::isfinite(p_1)) {
    throw std::domain_error("minimum analog power: p_1 must be positive (ln(1 + P1 Q1) divides)");
  }
  if (!(q_1 > 0.0) || !std::isfinite(q_1)) {
    throw std::domain_error("minimum analog power: q_1 must be positive");
  }
}
}  // namespace detail

/// Analog power needed below the threshold: alpha Q1 + alpha Q1^2 P1.
inline double analog_power_below_threshold(double alpha, double p_1, double q_1) {
  return alpha * q_1 + alpha * q_1 * q_1 * p_1;
}

/**
 * Analog power needed to meet the order-two profile at a quality q >= Q1:
 *   g(q) = [F(q) - L](1 + P1 q) / (q [1/(1 + alpha q^2) + L]),  L = ln(1 + P1 Q1).
 */
inline double analog_power_above_threshold(double alpha, double p_1, double q_1, double q) {
  const double jump = std::log1p(p_1 * q_1);
  const double aq2 = alpha * q * q;
  const double target = std::isinf(aq2) ? 1.0 : aq2 / (1.0 + aq2);
  const double slack = std::isinf(aq2) ? 0.0 : 1.0 / (1.0 + aq2);
  return (target - jump) * (1.0 + p_1 * q) / (q * (slack + jump));
}

/// max of the below-threshold requirement and the decreasing upper envelope
/// (1/L)(1/Q1 + P1) of g.
inline double min_pa_closed_form(double alpha, double p_1, double q_1) {
  if (!(alpha > 0.0)) throw std::domain_error("min_pa_closed_form: alpha must be positive");
  detail::require_digital_layer(p_1, q_1);
  const double jump = std::log1p(p_1 * q_1);
  return std::max(analog_power_below_threshold(alpha, p_1, q_1), (1.0 / q_1 + p_1) / jump);
}

struct MinAnalogPower {
  double p_a = 0.0;
  double q_sup = 0.0;      // where sup g was found (inf for the q -> inf limit)
  bool truncated = false;  // g still increasing at the scan's upper end
};

/**
 * max(alpha Q1 + alpha Q1^2 P1, sup_{q >= Q1} g(q)), with the supremum taken
 * numerically: log-spaced scan of [Q1, max(q_max, 10 Q1)], golden-section
 * refinement of every local maximum, and the analytic q -> inf limit
 * (1 - L) P1 / L.
 */
inline MinAnalogPower min_pa_exact(double alpha, double p_1, double q_1, const QualityGrid& grid) {
  if (!(alpha > 0.0)) throw std::domain_error("min_pa_exact: alpha must be positive");
  detail::require_digital_layer(p_1, q_1);
  grid.validate();

  const QualityGrid scan{q_1, std::max(grid.q_max, 10.0 * q_1), grid.points, Spacing::Log};
  const auto g = [&](double q) { return analog_power_above_threshold(alpha, p_1, q_1, q); };
  std::vector<double> vals(scan.points);
  for (std::size_t i = 0; i < scan.points; ++i) vals[i] = g(scan.at(i));

  MinAnalogPower out;
  double sup = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scan.points; ++i) {
    const bool left_ok = i == 0 || vals[i] >= vals[i - 1];
    const bool right_ok = i + 1 == scan.points || vals[i] >= vals[i + 1];
    if (!left_ok || !right_ok) continue;
    double best = vals[i];
    double at = scan.at(i);
    if (i > 0 || i + 1 < scan.points) {
      const double lo = std::log(scan.at(i == 0 ? 0 : i - 1));
      const double hi = std::log(scan.at(std::min(i + 1, scan.points - 1)));
      const auto r = golden_section_maximize([&](double x) { return g(std::exp(x)); }, lo, hi);
      if (r.value > best) {
        best = r.value;
        at = std::exp(r.x);
      }
    }
    if (best > sup) {
      sup = best;
      out.q_sup = at;
    }
  }
  out.truncated = vals[scan.points - 1] > vals[scan.points - 2];

  const double jump = std::log1p(p_1 * q_1);
  const double limit = (1.0 - jump) * p_1 / jump;
  if (limit > sup) {
    sup = limit;
    out.q_sup = std::numeric_limits<double>::infinity();
  }
  out.p_a = std::max(analog_power_below_threshold(alpha, p_1, q_1), sup);
  return out;
}

enum class PaRule { ClosedForm, Exact };

struct SearchRange {
  double min;
  double max;
};

/// Log-spaced (P1, Q1) search with local refinement rounds.
struct GridSpec {
  SearchRange p1_range{1e-3, 1e3};
  SearchRange q1_range{1e-3, 1e3};
  std::size_t points_per_axis = 60;
  std::size_t refinement_rounds = 3;

  void validate() const {
    for (const auto& r : {p1_range, q1_range}) {
      if (!(r.min > 0.0) || !(r.min < r.max) || !std::isfinite(r.max)) {
        throw std::invalid_argument("grid spec: ranges need 0 < min < max < inf");
      }
    }
    if (points_per_axis < 10) throw std::invalid_argument("grid spec: points_per_axis must be >= 10");
  }
};

/// Quality grid used for the exact analog-power rule and for verifying
/// optimizer output: wide enough that both the near-threshold and the
/// large-quality constraints are exercised.
inline QualityGrid verification_grid() { return {1e-4, 1e6, 2500, Spacing::Log}; }

struct SearchEval {
  double p_1;
  double q_1;
  double p_a;
  double p_total;
};

struct UpperBoundResult {
  double p_total = 0.0;
  HybridParams params;
  double alpha = 0.0;
  std::vector<SearchEval> search_log;
};

inline double min_pa(PaRule rule, double alpha, double p_1, double q_1, const QualityGrid& grid) {
  return rule == PaRule::ClosedForm ? min_pa_closed_form(alpha, p_1, q_1)
                                    : min_pa_exact(alpha, p_1, q_1, grid).p_a;
}

/**
 * Minimizes P = min_pa(alpha, P1, Q1) + P1 over the search grid. After the
 * initial log-spaced pass, each refinement round re-grids a window 10x
 * narrower (per axis, in log scale) centred on the incumbent and clamped to the
 * search ranges. Ties go to the smaller P1, then the smaller Q1.
 *
 * The incumbent is checked against the order-two profile on
 * verification_grid(); a failure throws ConsistencyError.
 */
inline UpperBoundResult optimize_upper_bound(double alpha, PaRule rule, const GridSpec& spec = {},
                                             bool keep_log = false, std::size_t workers = 0) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::domain_error("optimize_upper_bound: alpha must be positive");
  }
  spec.validate();
  const QualityGrid qgrid = verification_grid();
  const std::size_t n = spec.points_per_axis;

  UpperBoundResult out;
  out.alpha = alpha;
  out.p_total = std::numeric_limits<double>::infinity();

  double p_lo = std::log(spec.p1_range.min), p_hi = std::log(spec.p1_range.max);
  double q_lo = std::log(spec.q1_range.min), q_hi = std::log(spec.q1_range.max);
  std::vector<SearchEval> evals(n * n);

  for (std::size_t round = 0; round <= spec.refinement_rounds; ++round) {
    const auto axis = [n](double lo, double hi, std::size_t i) {
      return std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    };
    parallel_for(
        n,
        [&](std::size_t i) {
          const double p_1 = axis(p_lo, p_hi, i);
          for (std::size_t j = 0; j < n; ++j) {
            const double q_1 = axis(q_lo, q_hi, j);
            const double p_a = min_pa(rule, alpha, p_1, q_1, qgrid);
            evals[i * n + j] = {p_1, q_1, p_a, p_a + p_1};
          }
        },
        workers);

    // row-major order is ascending P1 then Q1, so strict < keeps the tie-break
    for (const auto& e : evals) {
      if (e.p_total < out.p_total) {
        out.p_total = e.p_total;
        out.params = {e.p_a, e.p_1, e.q_1};
      }
    }
    if (keep_log) out.search_log.insert(out.search_log.end(), evals.begin(), evals.end());

    const auto shrink = [](double& lo, double& hi, double centre, double full_lo, double full_hi) {
      const double half = (hi - lo) / 20.0;
      lo = centre - half;
      hi = centre + half;
      if (lo < full_lo) {
        hi += full_lo - lo;
        lo = full_lo;
      }
      if (hi > full_hi) {
        lo -= hi - full_hi;
        hi = full_hi;
      }
    };
    shrink(p_lo, p_hi, std::log(out.params.p_1), std::log(spec.p1_range.min), std::log(spec.p1_range.max));
    shrink(q_lo, q_hi, std::log(out.params.q_1), std::log(spec.q1_range.min), std::log(spec.q1_range.max));
  }

  const auto report = check_compliance(out.params, Profile::rational_order2(alpha), qgrid);
  if (!report.feasible) {
    throw ConsistencyError("optimize_upper_bound: incumbent violates the profile by " +
                           std::to_string(-report.margin) + " at q = " + std::to_string(report.worst_q));
  }
  return out;
}

/// 10 log10 of a power ratio.
inline double power_ratio_db(double numerator, double denominator) {
  return 10.0 * std::log10(numerator / denominator);
}

inline double to_db(double power) { return 10.0 * std::log10(power); }

struct SweepRow {
  double alpha;
  double p_lower;
  double p_upper;
  double p_a;
  double p_1;
  double q_1;
  double gap_db;
};

/// Lower and upper bounds for the order-two profile at each alpha.
inline std::vector<SweepRow> sweep_bounds(std::span<const double> alphas, PaRule rule, const GridSpec& spec = {},
                                          const QualityGrid& lower_grid = default_quality_grid()) {
  std::vector<SweepRow> rows;
  rows.reserve(alphas.size());
  for (double alpha : alphas) {
    const auto lower = lower_bound_pmin(Profile::rational_order2(alpha), lower_grid);
    const auto upper = optimize_upper_bound(alpha, rule, spec);
    rows.push_back({alpha, lower.p_lower, upper.p_total, upper.params.p_a, upper.params.p_1, upper.params.q_1,
                    power_ratio_db(upper.p_total, lower.p_lower)});
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  char buf[256];
  os << "alpha,p_lower,p_upper,p_a,p_1,q_1,gap_db\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.alpha, r.p_lower, r.p_upper,
                  r.p_a, r.p_1, r.q_1, r.gap_db);
    os << buf;
  }
}

}  // namespace jscc
