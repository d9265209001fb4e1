#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jscc {

/// Converts a channel noise variance N to the quality level Q = 1/N.
inline double noise_to_quality(double noise) {
  if (!(noise > 0.0)) {
    throw std::domain_error("noise_to_quality: noise variance must be positive");
  }
  return 1.0 / noise;
}

enum class ProfileKind { RationalOrder1, RationalOrder2, Tabulated };

struct ProfilePoint {
  double q;
  double f;
};

/**
 * Fidelity-quality target F(Q).
 *
 * The rational kinds are alpha*Q^r / (1 + alpha*Q^r) for r = 1, 2. A tabulated
 * profile interpolates linearly in (log Q, F) between its sample points and is
 * undefined outside [first q, last q].
 */
class Profile {
 public:
  static Profile rational_order1(double alpha) { return Profile(ProfileKind::RationalOrder1, alpha); }
  static Profile rational_order2(double alpha) { return Profile(ProfileKind::RationalOrder2, alpha); }

  static Profile tabulated(std::vector<ProfilePoint> table) {
    if (table.size() < 2) {
      throw std::invalid_argument("tabulated profile needs at least 2 points");
    }
    for (std::size_t i = 0; i < table.size(); ++i) {
      const auto& p = table[i];
      if (!(p.q > 0.0) || !std::isfinite(p.q)) {
        throw std::invalid_argument("tabulated profile: q must be positive and finite");
      }
      if (!(p.f >= 0.0) || !std::isfinite(p.f)) {
        throw std::invalid_argument("tabulated profile: f must be nonnegative and finite");
      }
      if (i > 0 && !(table[i - 1].q < p.q)) {
        throw std::invalid_argument("tabulated profile: q must be strictly increasing");
      }
    }
    Profile out(ProfileKind::Tabulated, 0.0);
    out.table_ = std::move(table);
    return out;
  }

  ProfileKind kind() const noexcept { return kind_; }
  double alpha() const noexcept { return alpha_; }
  std::span<const ProfilePoint> table() const noexcept { return table_; }
  bool is_rational() const noexcept { return kind_ != ProfileKind::Tabulated; }

  /// Range of Q on which the profile is defined.
  double q_lo() const noexcept { return is_rational() ? 0.0 : table_.front().q; }
  double q_hi() const noexcept { return is_rational() ? INFINITY : table_.back().q; }

  double operator()(double q) const {
    if (!(q > 0.0)) {
      throw std::domain_error("profile evaluated at nonpositive quality");
    }
    switch (kind_) {
      case ProfileKind::RationalOrder1: {
        const double x = alpha_ * q;
        return x / (1.0 + x);
      }
      case ProfileKind::RationalOrder2: {
        const double x = alpha_ * q * q;
        // x/(1+x) overflows to inf/inf for huge q
        return std::isinf(x) ? 1.0 : x / (1.0 + x);
      }
      case ProfileKind::Tabulated:
        return interpolate(q);
    }
    return 0.0;
  }

 private:
  Profile(ProfileKind kind, double alpha) : kind_(kind), alpha_(alpha) {
    if (kind != ProfileKind::Tabulated && !(alpha > 0.0 && std::isfinite(alpha))) {
      throw std::invalid_argument("rational profile requires finite alpha > 0");
    }
  }

  double interpolate(double q) const {
    if (q < table_.front().q || q > table_.back().q) {
      throw std::range_error("quality outside the tabulated profile range");
    }
    auto hi = std::lower_bound(table_.begin(), table_.end(), q,
                               [](const ProfilePoint& p, double v) { return p.q < v; });
    if (hi->q == q) return hi->f;
    auto lo = hi - 1;
    const double t = (std::log(q) - std::log(lo->q)) / (std::log(hi->q) - std::log(lo->q));
    return lo->f + t * (hi->f - lo->f);
  }

  ProfileKind kind_;
  double alpha_;
  std::vector<ProfilePoint> table_;
};

inline double eval_profile(const Profile& p, double q) { return p(q); }

/// Reads a tabulated profile from CSV with header `q,f`.
inline Profile load_profile_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("profile CSV is empty");
  }
  line.erase(std::remove_if(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }),
             line.end());
  if (line != "q,f") {
    throw std::invalid_argument("profile CSV header must be 'q,f'");
  }
  std::vector<ProfilePoint> table;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("profile CSV line " + std::to_string(lineno) + ": expected 'q,f'");
    }
    try {
      std::size_t used = 0;
      const double q = std::stod(line.substr(0, comma));
      const std::string rest = line.substr(comma + 1);
      const double f = std::stod(rest, &used);
      if (rest.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("trailing");
      table.push_back({q, f});
    } catch (const std::logic_error&) {
      throw std::invalid_argument("profile CSV line " + std::to_string(lineno) + ": not a number");
    }
  }
  return Profile::tabulated(std::move(table));
}

inline Profile load_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open profile CSV: " + path);
  }
  return load_profile_csv(in);
}

enum class Spacing { Log, Linear };

/// Discretization of the quality axis.
struct QualityGrid {
  double q_min = 1e-4;
  double q_max = 1e4;
  std::size_t points = 2000;
  Spacing spacing = Spacing::Log;

  void validate() const {
    if (!(q_min > 0.0) || !(q_min < q_max) || !std::isfinite(q_max)) {
      throw std::invalid_argument("quality grid requires 0 < q_min < q_max < inf");
    }
    if (points < 2) {
      throw std::invalid_argument("quality grid requires at least 2 points");
    }
  }

  double at(std::size_t i) const {
    if (i == 0) return q_min;
    if (i + 1 == points) return q_max;
    const double t = static_cast<double>(i) / static_cast<double>(points - 1);
    if (spacing == Spacing::Linear) return q_min + t * (q_max - q_min);
    return std::exp(std::log(q_min) + t * (std::log(q_max) - std::log(q_min)));
  }

  std::vector<double> values() const {
    validate();
    std::vector<double> out(points);
    for (std::size_t i = 0; i < points; ++i) out[i] = at(i);
    return out;
  }
};

inline QualityGrid default_quality_grid() { return {}; }

/// `n` log-spaced values from lo to hi inclusive (lo alone when n == 1).
inline std::vector<double> log_space(double lo, double hi, std::size_t n) {
  if (n == 1) return {lo};
  QualityGrid g{lo, hi, n, Spacing::Log};
  return g.values();
}

}  // namespace jscc
