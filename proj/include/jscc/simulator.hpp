#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "jscc/parallel.hpp"
#include "jscc/schemes.hpp"

namespace jscc {

struct SimConfig {
  std::size_t n = 1;          // source symbols per channel use (kappa = 1/n)
  double power = 0.0;         // analog power
  double p_1 = 0.0;           // variance of independent Gaussian interference
  double noise = 1.0;         // channel noise variance
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 1) throw std::invalid_argument("sim config: n must be >= 1");
    if (!(power >= 0.0) || !std::isfinite(power)) throw std::invalid_argument("sim config: power must be >= 0");
    if (!(p_1 >= 0.0) || !std::isfinite(p_1)) throw std::invalid_argument("sim config: p_1 must be >= 0");
    if (!(noise > 0.0) || !std::isfinite(noise)) throw std::invalid_argument("sim config: noise must be > 0");
    if (trials < 1) throw std::invalid_argument("sim config: trials must be >= 1");
  }
};

struct SimResult {
  double mean_distortion = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
  SimConfig config_echo;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Standard normal draws from substream `stream` of `seed`.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t stream)
      : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

  double operator()() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Mean and sum of squared deviations for a batch of trials (Chan et al. merge).
struct Moments {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.count == 0) return;
    const double total = static_cast<double>(count + o.count);
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.count) / total;
    m2 += o.m2 + d * d * static_cast<double>(count) * static_cast<double>(o.count) / total;
    count += o.count;
  }
};

// Trials are split into a fixed number of chunks, each with its own substream,
// so results do not depend on how many threads run them.
inline constexpr std::uint64_t kMaxChunks = 256;

template <class Trial>
SimResult run_chunks(std::uint64_t trials, std::uint64_t seed, Trial&& trial, std::size_t workers) {
  const std::uint64_t chunks = std::min<std::uint64_t>(trials, kMaxChunks);
  std::vector<Moments> parts(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    GaussianStream normal(seed, c);
    const std::uint64_t begin = trials * c / chunks;
    const std::uint64_t end = trials * (c + 1) / chunks;
    Moments m;
    for (std::uint64_t t = begin; t < end; ++t) m.add(trial(normal));
    parts[c] = m;
  }, workers);
  Moments total;
  for (const auto& p : parts) total.merge(p);
  SimResult out;
  out.trials = total.count;
  out.mean_distortion = total.mean;
  out.std_error = total.count > 1
                      ? std::sqrt(total.m2 / static_cast<double>(total.count - 1) / static_cast<double>(total.count))
                      : 0.0;
  return out;
}

}  // namespace detail

/**
 * Uncoded transmission of n unit-variance Gaussian symbols in one channel use:
 * U = sqrt(power/n) * sum(X), V = U + Z + W with Z ~ N(0, p_1) interference and
 * W ~ N(0, noise). Each X_t is estimated by the linear MMSE estimate from V.
 * Returns the per-symbol squared error averaged over trials.
 */
inline SimResult simulate_uncoded(const SimConfig& cfg, std::size_t workers = 0) {
  cfg.validate();
  const double gain = std::sqrt(cfg.power / static_cast<double>(cfg.n));
  const double estimator = gain / (cfg.power + cfg.p_1 + cfg.noise);
  const double interference_sd = std::sqrt(cfg.p_1);
  const double noise_sd = std::sqrt(cfg.noise);
  const std::size_t n = cfg.n;

  auto out = detail::run_chunks(cfg.trials, cfg.seed, [&](detail::GaussianStream& normal) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double x = normal();
      sum += x;
      sum_sq += x * x;
    }
    const double received = gain * sum + interference_sd * normal() + noise_sd * normal();
    const double estimate = estimator * received;
    // sum_t (x_t - estimate)^2
    const double err = sum_sq - 2.0 * estimate * sum + static_cast<double>(n) * estimate * estimate;
    return err / static_cast<double>(n);
  }, workers);
  out.config_echo = cfg;
  return out;
}

/**
 * V = K X + Z + W with X ~ N(0, I_n), Z ~ N(0, p_1 I_m), W ~ N(0, noise I_m),
 * estimated by A1 = K^T (K K^T + (p_1 + noise) I)^-1.
 */
inline SimResult simulate_matrix_analog(const MatrixScheme& ms, double noise, std::uint64_t trials,
                                        std::uint64_t seed, std::size_t workers = 0) {
  ms.validate();
  if (!(noise > 0.0) || !std::isfinite(noise)) throw std::invalid_argument("simulate_matrix_analog: noise must be > 0");
  if (trials < 1) throw std::invalid_argument("simulate_matrix_analog: trials must be >= 1");

  const auto m = ms.m();
  const auto n = ms.n();
  Eigen::MatrixXd cov = ms.k_matrix * ms.k_matrix.transpose();
  cov.diagonal().array() += ms.p_1 + noise;
  const Eigen::MatrixXd estimator = cov.llt().solve(ms.k_matrix).transpose();  // n x m
  const double interference_sd = std::sqrt(ms.p_1);
  const double noise_sd = std::sqrt(noise);

  auto out = detail::run_chunks(trials, seed, [&](detail::GaussianStream& normal) {
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = normal();
    Eigen::VectorXd v = ms.k_matrix * x;
    for (Eigen::Index i = 0; i < m; ++i) v[i] += interference_sd * normal() + noise_sd * normal();
    return (x - estimator * v).squaredNorm() / static_cast<double>(n);
  }, workers);
  out.config_echo = {static_cast<std::size_t>(n), ms.analog_power(), ms.p_1, noise, trials, seed};
  return out;
}

}  // namespace jscc
