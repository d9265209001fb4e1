#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "jscc/errors.hpp"
#include "jscc/profiles.hpp"

namespace jscc {

namespace detail {
inline void require_positive_quality(double q, const char* who) {
  if (!(q > 0.0)) throw std::domain_error(std::string(who) + ": quality must be positive");
}
inline void require_kappa(double kappa, const char* who) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw std::domain_error(std::string(who) + ": bandwidth factor must be finite and >= 0");
  }
}
}  // namespace detail

/// Single digital layer superimposed on an analog layer. Total power p_a + p_1.
struct HybridParams {
  double p_a = 0.0;
  double p_1 = 0.0;
  double q_1 = 1.0;

  double total_power() const noexcept { return p_a + p_1; }

  void validate() const {
    if (!(p_a >= 0.0) || !(p_1 >= 0.0) || !std::isfinite(p_a) || !std::isfinite(p_1)) {
      throw std::invalid_argument("hybrid params: powers must be finite and >= 0");
    }
    if (!(q_1 > 0.0) || !std::isfinite(q_1)) {
      throw std::invalid_argument("hybrid params: threshold quality must be positive");
    }
  }
};

/// K digital layers with increasing decoding thresholds on top of the analog layer.
struct LayeredParams {
  double p_a = 0.0;
  std::vector<double> layer_powers;
  std::vector<double> thresholds;

  static LayeredParams from_hybrid(const HybridParams& hp) { return {hp.p_a, {hp.p_1}, {hp.q_1}}; }

  std::size_t layers() const noexcept { return layer_powers.size(); }

  double total_power() const {
    return p_a + std::accumulate(layer_powers.begin(), layer_powers.end(), 0.0);
  }

  void validate() const {
    if (layer_powers.empty() || layer_powers.size() != thresholds.size()) {
      throw std::invalid_argument("layered params: need K >= 1 matching powers and thresholds");
    }
    if (!(p_a >= 0.0) || !std::isfinite(p_a)) {
      throw std::invalid_argument("layered params: analog power must be finite and >= 0");
    }
    for (std::size_t k = 0; k < layers(); ++k) {
      if (!(layer_powers[k] >= 0.0) || !std::isfinite(layer_powers[k])) {
        throw std::invalid_argument("layered params: layer powers must be finite and >= 0");
      }
      if (!(thresholds[k] > 0.0) || !std::isfinite(thresholds[k])) {
        throw std::invalid_argument("layered params: thresholds must be positive");
      }
      if (k > 0 && !(thresholds[k - 1] < thresholds[k])) {
        throw std::invalid_argument("layered params: thresholds must be strictly increasing");
      }
    }
  }
};

struct CurvePoint {
  double q;
  double f;
};

/// Achieved fidelity sampled over quality.
struct FidelityCurve {
  std::vector<CurvePoint> points;
};

template <class Fidelity>
FidelityCurve sample_curve(Fidelity&& fidelity, std::span<const double> qs) {
  FidelityCurve out;
  out.points.reserve(qs.size());
  for (double q : qs) out.points.push_back({q, fidelity(q)});
  return out;
}

inline void write_csv(std::ostream& os, const FidelityCurve& curve) {
  char buf[64];
  os << "q,f\n";
  for (const auto& p : curve.points) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", p.q, p.f);
    os << buf;
  }
}

// ---------------------------------------------------------------------------
// Uncoded transmission

inline double uncoded_fidelity(double power, double q) {
  detail::require_positive_quality(q, "uncoded_fidelity");
  const double x = power * q;
  return x / (1.0 + x);
}

/// MSE of uncoded transmission with MMSE decoding at bandwidth kappa.
inline double uncoded_distortion(double power, double noise, double kappa) {
  if (!(noise > 0.0)) throw std::domain_error("uncoded_distortion: noise must be positive");
  detail::require_kappa(kappa, "uncoded_distortion");
  return 1.0 - kappa * power / (power + noise);
}

// ---------------------------------------------------------------------------
// Hybrid digital/analog scheme, kappa -> 0

inline double hybrid_fidelity(const HybridParams& hp, double q) {
  detail::require_positive_quality(q, "hybrid_fidelity");
  const double analog = hp.p_a * q / (1.0 + hp.total_power() * q);
  return q >= hp.q_1 ? std::log1p(hp.p_1 * hp.q_1) + analog : analog;
}

/// Size of each fidelity jump, jump k occurring at thresholds[k].
inline std::vector<double> layer_jumps(const LayeredParams& lp) {
  lp.validate();
  const std::size_t layers = lp.layers();
  std::vector<double> jumps(layers);
  // power of layers k..K-1 (suffix sums)
  std::vector<double> above(layers + 1, 0.0);
  for (std::size_t k = layers; k-- > 0;) above[k] = above[k + 1] + lp.layer_powers[k];
  for (std::size_t k = 0; k < layers; ++k) {
    const double qk = lp.thresholds[k];
    jumps[k] = std::log1p(above[k] * qk) - std::log1p(above[k + 1] * qk);
  }
  return jumps;
}

/// Staircase fidelity of the K-layer scheme: the analog term plus every jump
/// whose threshold is at or below q.
inline double multilayer_fidelity(const LayeredParams& lp, double q) {
  detail::require_positive_quality(q, "multilayer_fidelity");
  const auto jumps = layer_jumps(lp);
  double f = lp.p_a * q / (1.0 + lp.total_power() * q);
  for (std::size_t k = 0; k < jumps.size() && q >= lp.thresholds[k]; ++k) f += jumps[k];
  return f;
}

/**
 * Rate-constraint polynomial for the quantization-error variance beta at
 * block length n:
 *   f_n(beta) = beta^n (1 + P Q1)(1 + P1 Q1) - beta Pa Q1 - (1 + P1 Q1).
 * The digital layer is decodable at Q1 iff f_n(beta) >= 0.
 */
inline double beta_polynomial(std::size_t n, const HybridParams& hp, double beta) {
  const double q1 = hp.q_1;
  const double digital = 1.0 + hp.p_1 * q1;
  return std::pow(beta, static_cast<double>(n)) * (1.0 + hp.total_power() * q1) * digital -
         beta * hp.p_a * q1 - digital;
}

/// Unique root of f_n on (0, 1), by bisection.
inline double beta_root(std::size_t n, const HybridParams& hp) {
  hp.validate();
  if (n < 1) throw std::domain_error("beta_root: block length must be >= 1");
  double lo = 0.0;
  double hi = 1.0;
  const double f_lo = beta_polynomial(n, hp, lo);
  const double f_hi = beta_polynomial(n, hp, hi);
  if (!(f_lo < 0.0) || !(f_hi > 0.0)) {
    throw NoRootError("beta_root: f_n(0) < 0 < f_n(1) does not hold (requires p_1 > 0)");
  }
  // Run to adjacent doubles: the steep beta^n term at large n needs the
  // bracket far below 1e-12 to keep |f_n| small.
  for (;;) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (beta_polynomial(n, hp, mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::fabs(beta_polynomial(n, hp, lo)) < std::fabs(beta_polynomial(n, hp, hi)) ? lo : hi;
}

/// Quantization-error variance a^(1/n), a = 1/(1 + P1 Q1); always satisfies f_n >= 0.
inline double beta_simple_choice(std::size_t n, const HybridParams& hp) {
  return std::pow(1.0 + hp.p_1 * hp.q_1, -1.0 / static_cast<double>(n));
}

/// Distortion below the digital threshold, where only the analog layer helps.
inline double hybrid_distortion_below(const HybridParams& hp, double q, double kappa) {
  hp.validate();
  detail::require_positive_quality(q, "hybrid_distortion_below");
  detail::require_kappa(kappa, "hybrid_distortion_below");
  if (!(q < hp.q_1)) throw std::domain_error("hybrid_distortion_below: requires q < q_1");
  return 1.0 - kappa * hp.p_a * q / (1.0 + hp.total_power() * q);
}

/// Refinement-layer distortion for a given quantization-error variance beta:
///   beta (1 - kappa beta Pa Q / (1 + (beta Pa + P1) Q)).
inline double refinement_distortion(const HybridParams& hp, double q, double kappa, double beta) {
  return beta * (1.0 - kappa * beta * hp.p_a * q / (1.0 + (beta * hp.p_a + hp.p_1) * q));
}

/// Distortion at or above the digital threshold with beta = a^kappa.
inline double hybrid_distortion_above(const HybridParams& hp, double q, double kappa) {
  hp.validate();
  detail::require_positive_quality(q, "hybrid_distortion_above");
  detail::require_kappa(kappa, "hybrid_distortion_above");
  if (!(q >= hp.q_1)) throw std::domain_error("hybrid_distortion_above: requires q >= q_1");
  const double beta = std::pow(1.0 + hp.p_1 * hp.q_1, -kappa);
  return refinement_distortion(hp, q, kappa, beta);
}

// ---------------------------------------------------------------------------
// General linear scheme: U_a = K X, digital layer of power p_1 treated as
// interference by the analog estimator, quantization error covariance C_E1.

struct MatrixScheme {
  Eigen::MatrixXd k_matrix;  // m x n
  Eigen::MatrixXd c_e1;      // n x n
  double p_1 = 0.0;

  Eigen::Index m() const noexcept { return k_matrix.rows(); }
  Eigen::Index n() const noexcept { return k_matrix.cols(); }

  /// (1/m) Tr(K K^T)
  double analog_power() const { return k_matrix.squaredNorm() / static_cast<double>(m()); }

  void validate() const {
    if (m() < 1 || n() < 1) throw std::invalid_argument("matrix scheme: K must be non-empty");
    if (c_e1.rows() != n() || c_e1.cols() != n()) {
      throw std::invalid_argument("matrix scheme: C_E1 must be n x n");
    }
    if (!k_matrix.allFinite() || !c_e1.allFinite()) {
      throw std::invalid_argument("matrix scheme: non-finite entries");
    }
    if (!(p_1 >= 0.0) || !std::isfinite(p_1)) {
      throw std::invalid_argument("matrix scheme: p_1 must be finite and >= 0");
    }
    constexpr double tol = 1e-10;
    if ((c_e1 - c_e1.transpose()).cwiseAbs().maxCoeff() > tol) {
      throw std::invalid_argument("matrix scheme: C_E1 must be symmetric");
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c_e1, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -tol || eig.eigenvalues().maxCoeff() > 1.0 + tol) {
      throw std::invalid_argument("matrix scheme: C_E1 must satisfy 0 <= C_E1 <= I");
    }
  }
};

/// m = 1 scheme with K = [k ... k], n k^2 = p_a, and C_E1 = beta I.
inline MatrixScheme make_repetition_scheme(Eigen::Index n, double p_a, double p_1, double beta) {
  const double k = std::sqrt(p_a / static_cast<double>(n));
  return {Eigen::MatrixXd::Constant(1, n, k), beta * Eigen::MatrixXd::Identity(n, n), p_1};
}

/// MMSE distortion of the analog layer alone:
///   (1/n)[n - Tr(K^T (K K^T + (P1 + N) I)^-1 K)].
inline double matrix_analog_distortion(const MatrixScheme& ms, double noise) {
  ms.validate();
  if (!(noise > 0.0)) throw std::domain_error("matrix_analog_distortion: noise must be positive");
  const auto& k = ms.k_matrix;
  Eigen::MatrixXd cov = k * k.transpose();
  cov.diagonal().array() += ms.p_1 + noise;
  const Eigen::MatrixXd solved = cov.llt().solve(k);  // (K K^T + sI)^-1 K
  const double explained = (k.array() * solved.array()).sum();
  const double n = static_cast<double>(ms.n());
  return (n - explained) / n;
}

/// MMSE distortion when estimating the quantization error E1 once the digital
/// layer is decoded:
///   (1/n)[Tr C - Tr(C K^T (K C K^T + (P1 + N) I)^-1 K C)].
inline double matrix_refinement_distortion(const MatrixScheme& ms, double noise) {
  ms.validate();
  if (!(noise > 0.0)) throw std::domain_error("matrix_refinement_distortion: noise must be positive");
  const auto& k = ms.k_matrix;
  const Eigen::MatrixXd kc = k * ms.c_e1;  // K C (m x n)
  Eigen::MatrixXd cov = kc * k.transpose();
  cov.diagonal().array() += ms.p_1 + noise;
  const Eigen::MatrixXd solved = cov.llt().solve(kc);
  const double explained = (kc.array() * solved.array()).sum();
  return (ms.c_e1.trace() - explained) / static_cast<double>(ms.n());
}

/**
 * Slack of the digital layer's rate constraint at threshold noise n1:
 *   (m/2n) ln(1 + P1/N1) - (1/2n) ln[det(K C K^T + sI) / (det C det(K K^T + sI))],
 * with s = P1 + N1. Decodable at N1 iff the slack is >= 0.
 */
inline double dpc_rate_constraint(const MatrixScheme& ms, double n1) {
  ms.validate();
  if (!(n1 > 0.0)) throw std::domain_error("dpc_rate_constraint: threshold noise must be positive");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ms.c_e1, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  if (ev.minCoeff() <= 1e-300) {
    throw DegenerateQuantizerError("dpc_rate_constraint: C_E1 is singular");
  }
  const double logdet_c = ev.array().log().sum();

  const auto logdet_spd = [](const Eigen::MatrixXd& a) {
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  };
  const auto& k = ms.k_matrix;
  const double s = ms.p_1 + n1;
  Eigen::MatrixXd with_error = k * ms.c_e1 * k.transpose();
  with_error.diagonal().array() += s;
  Eigen::MatrixXd with_source = k * k.transpose();
  with_source.diagonal().array() += s;

  const double n = static_cast<double>(ms.n());
  const double m = static_cast<double>(ms.m());
  const double capacity = m / (2.0 * n) * std::log1p(ms.p_1 / n1);
  const double required = (logdet_spd(with_error) - logdet_c - logdet_spd(with_source)) / (2.0 * n);
  return capacity - required;
}

}  // namespace jscc
