#pragma once

#include <cmath>
#include <cstddef>

namespace jscc {

struct ScalarMax {
  double x;
  double value;
};

/**
 * Golden-section search for the maximum of a unimodal function on [lo, hi].
 *
 * Stops when the bracket width falls below rel_tol * max(|lo|, |hi|, 1) or
 * after max_iter iterations. Returns the best point evaluated, so the result
 * is never worse than f at the final interior probes.
 */
template <class F>
ScalarMax golden_section_maximize(F&& f, double lo, double hi, double rel_tol = 1e-10,
                                  std::size_t max_iter = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (std::size_t it = 0; it < max_iter; ++it) {
    const double scale = std::fmax(1.0, std::fmax(std::fabs(lo), std::fabs(hi)));
    if (hi - lo <= rel_tol * scale) break;
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return fc >= fd ? ScalarMax{c, fc} : ScalarMax{d, fd};
}

}  // namespace jscc
