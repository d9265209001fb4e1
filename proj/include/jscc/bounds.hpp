#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <variant>

#include "jscc/golden.hpp"
#include "jscc/profiles.hpp"

namespace jscc {

enum class QLimit { AtZero, AtInfinity };

/// Location of the supremum: a finite quality or one of the two limits.
using QStar = std::variant<double, QLimit>;

struct LowerBoundResult {
  double p_lower = 0.0;
  QStar q_star = 0.0;
  bool attained = false;  // sup found at an interior grid point
};

/// (exp(F(q)) - 1) / q, the minimum power that meets F at the single quality q.
inline double lower_bound_integrand(const Profile& p, double q) {
  if (!(q > 0.0)) {
    throw std::domain_error("lower_bound_integrand: quality must be positive");
  }
  return std::expm1(p(q)) / q;
}

/**
 * Supremum over Q of the single-quality power requirement, which lower-bounds
 * the minimum power for the whole profile.
 *
 * Scans the grid, then refines around the best grid point by golden-section
 * search in log Q. For order-one profiles the Q -> 0 limit (equal to alpha)
 * is taken analytically; for order-two profiles both limits are 0.
 * Tabulated profiles are scanned on the part of the grid inside their table.
 */
inline LowerBoundResult lower_bound_pmin(const Profile& p, const QualityGrid& grid) {
  grid.validate();
  QualityGrid g = grid;
  if (!p.is_rational()) {
    g.q_min = std::max(g.q_min, p.q_lo());
    g.q_max = std::min(g.q_max, p.q_hi());
    if (!(g.q_min < g.q_max)) {
      throw std::invalid_argument("quality grid does not overlap the tabulated profile");
    }
  }

  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t i = 0; i < g.points; ++i) {
    const double v = lower_bound_integrand(p, g.at(i));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }

  LowerBoundResult out;
  out.p_lower = best_val;
  out.q_star = g.at(best);
  out.attained = best != 0 && best + 1 != g.points;

  const double lo = std::log(g.at(best == 0 ? 0 : best - 1));
  const double hi = std::log(g.at(std::min(best + 1, g.points - 1)));
  const auto refined =
      golden_section_maximize([&](double x) { return lower_bound_integrand(p, std::exp(x)); }, lo, hi);
  if (refined.value > out.p_lower) {
    out.p_lower = refined.value;
    out.q_star = std::exp(refined.x);
  }

  if (p.kind() == ProfileKind::RationalOrder1 && p.alpha() >= out.p_lower) {
    out.p_lower = p.alpha();
    out.q_star = QLimit::AtZero;
    out.attained = false;
  }
  return out;
}

}  // namespace jscc
