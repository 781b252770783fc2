#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "aoi/config.hpp"

// All quantities here are on the J scale (mean weighted AoI in frames) and
// refer to the infinite-horizon regime. Use ewsaoi_from_objective to convert.

namespace aoi {

namespace detail {

struct BoundSums {
  double alpha = 0.0;           // sum alpha_i
  double inv_p = 0.0;           // sum 1/p_i
  double sqrt_alpha_p = 0.0;    // sum sqrt(alpha_i/p_i)
  double alpha_over_p = 0.0;    // sum alpha_i/p_i
};

inline BoundSums sums(std::span<const double> alpha, std::span<const double> p) {
  BoundSums s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s.alpha += alpha[i];
    s.inv_p += 1.0 / p[i];
    s.sqrt_alpha_p += std::sqrt(alpha[i] / p[i]);
    s.alpha_over_p += alpha[i] / p[i];
  }
  return s;
}

// Population variance of {1/p_i}.
inline double variance_inv_p(std::span<const double> p) {
  const double m = static_cast<double>(p.size());
  double mean = 0.0;
  for (double x : p) mean += 1.0 / x;
  mean /= m;
  double var = 0.0;
  for (double x : p) var += (1.0 / x - mean) * (1.0 / x - mean);
  return var / m;
}

// (2/(MT)) [ (sum sqrt(w/p))^2 + (T-1) sum w/p ], shared by the Lyapunov bounds.
inline double drift_bound(std::span<const double> w, std::span<const double> p, std::size_t T) {
  const auto s = sums(w, p);
  const double m = static_cast<double>(p.size());
  const double t = static_cast<double>(T);
  return 2.0 / (m * t) * (s.sqrt_alpha_p * s.sqrt_alpha_p + (t - 1.0) * s.alpha_over_p);
}

}  // namespace detail

/// Universal lower bound: (1/2MT)(sum sqrt(alpha_i/p_i))^2 + (1/2M) sum alpha_i.
inline double lower_bound(const NetworkConfig& config) {
  const auto s = detail::sums(config.weight, config.reliability);
  const double m = static_cast<double>(config.num_clients());
  const double t = static_cast<double>(config.slots_per_frame);
  return s.sqrt_alpha_p * s.sqrt_alpha_p / (2.0 * m * t) + s.alpha / (2.0 * m);
}

/// Coefficient of variation of {1/p_i}, population convention.
inline double coeff_variation(std::span<const double> p) {
  double mean = 0.0;
  for (double x : p) mean += 1.0 / x;
  mean /= static_cast<double>(p.size());
  return std::sqrt(detail::variance_inv_p(p)) / mean;
}

/// Greedy upper bound. The finite-M form needs (1/T) sum 1/p_i > 1 and throws
/// std::domain_error otherwise; the asymptotic (large-M) form always exists.
inline double ub_greedy(const NetworkConfig& config, bool asymptotic) {
  const auto s = detail::sums(config.weight, config.reliability);
  const double m = static_cast<double>(config.num_clients());
  const double t = static_cast<double>(config.slots_per_frame);
  const double base = s.alpha / (2.0 * m);
  if (asymptotic) {
    const double cv = coeff_variation(config.reliability);
    return s.alpha * s.inv_p * (1.0 + cv * cv / m) / (2.0 * m * t) + base;
  }
  const double x = s.inv_p / t - 1.0;
  if (!(x > 0.0))
    throw std::domain_error("ub_greedy: finite-M form requires (1/T) sum 1/p_i > 1");
  const double v = detail::variance_inv_p(config.reliability);
  const double y = 1.0 + 1.0 / m + (4.0 - 1.0 / t + 2.0 / m) / x +
                   (4.0 - 1.0 / t + 1.0 / m + m / (t * t) * v) / (x * x);
  return s.alpha * x * y / (2.0 * m) + base;
}

/// Greedy guarantee (large-M form), equal to ub_greedy(asymptotic) / lower_bound.
/// Evaluated as 1 + gap / denominator, with the Cauchy-Schwarz gap
/// (sum alpha)(sum 1/p) - (sum sqrt(alpha/p))^2 written as the Lagrange sum
/// of squares, so symmetric networks give exactly 1.
inline double rho_greedy(const NetworkConfig& config) {
  const auto& a = config.weight;
  const auto& p = config.reliability;
  const auto s = detail::sums(a, p);
  const double m = static_cast<double>(config.num_clients());
  const double t = static_cast<double>(config.slots_per_frame);
  double lagrange = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const double d = std::sqrt(a[i] / p[j]) - std::sqrt(a[j] / p[i]);
      lagrange += d * d;
    }
  const double cv = coeff_variation(p);
  const double gap = lagrange + s.alpha * s.inv_p * cv * cv / m;
  return 1.0 + gap / (s.sqrt_alpha_p * s.sqrt_alpha_p + t * s.alpha);
}

/// Greedy guarantee from the finite-M upper bound.
inline double rho_greedy_finite(const NetworkConfig& config) {
  return ub_greedy(config, false) / lower_bound(config);
}

/// Per-frame delivery probability of client i under the randomized policy.
/// exact: sum_s [1-(1-p)^s] C(T,s) q^s (1-q)^(T-s), q = beta_i / sum beta.
/// bound: p T beta_i / (sum beta + (T-1) beta_i).
inline double expected_delivery_prob(const NetworkConfig& config, std::span<const double> beta,
                                      std::size_t i, bool exact) {
  double total = 0.0;
  for (double b : beta) total += b;
  const double p = config.reliability[i];
  const std::size_t T = config.slots_per_frame;
  if (!exact) {
    const double t = static_cast<double>(T);
    return p * t * beta[i] / (total + (t - 1.0) * beta[i]);
  }
  const double q = beta[i] / total;
  // Binomial weights built incrementally; T is small in practice.
  double sum = 0.0;
  double binom = 1.0;
  for (std::size_t s = 0; s <= T; ++s) {
    if (s > 0) binom = binom * static_cast<double>(T - s + 1) / static_cast<double>(s);
    const double sel = binom * std::pow(q, static_cast<double>(s)) *
                       std::pow(1.0 - q, static_cast<double>(T - s));
    sum += (1.0 - std::pow(1.0 - p, static_cast<double>(s))) * sel;
  }
  return sum;
}

/// Long-run objective of the randomized policy: (1/M) sum alpha_i / E[d_i].
inline double randomized_analytic_objective(const NetworkConfig& config,
                                            std::span<const double> beta) {
  double total = 0.0;
  for (std::size_t i = 0; i < config.num_clients(); ++i)
    total += config.weight[i] / expected_delivery_prob(config, beta, i, true);
  return total / static_cast<double>(config.num_clients());
}

inline double ub_randomized(const NetworkConfig& config, std::span<const double> beta) {
  const double m = static_cast<double>(config.num_clients());
  const double t = static_cast<double>(config.slots_per_frame);
  double beta_sum = 0.0, weighted = 0.0, alpha_over_p = 0.0;
  for (std::size_t i = 0; i < config.num_clients(); ++i) {
    const double a = config.weight[i], p = config.reliability[i];
    beta_sum += beta[i];
    weighted += a / (p * beta[i]);
    alpha_over_p += a / p;
  }
  return beta_sum * weighted / (t * m) + (t - 1.0) / (t * m) * alpha_over_p;
}

inline double rho_randomized(const NetworkConfig& config, std::span<const double> beta) {
  return ub_randomized(config, beta) / lower_bound(config);
}

inline double ub_maxweight(const NetworkConfig& config) {
  return detail::drift_bound(config.weight, config.reliability, config.slots_per_frame);
}

inline double rho_maxweight(const NetworkConfig& config) {
  return ub_maxweight(config) / lower_bound(config);
}

/// alpha~_i = (alpha_i/2) (2/(1-(1-p_i)^T) + 1)^2.
inline std::vector<double> alpha_tilde(std::span<const double> alpha, std::span<const double> p,
                                       std::size_t T) {
  std::vector<double> out(alpha.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = 1.0 - std::pow(1.0 - p[i], static_cast<double>(T));
    const double f = 2.0 / r + 1.0;
    out[i] = alpha[i] / 2.0 * f * f;
  }
  return out;
}

inline double ub_whittle(const NetworkConfig& config) {
  const auto at = alpha_tilde(config.weight, config.reliability, config.slots_per_frame);
  return detail::drift_bound(at, config.reliability, config.slots_per_frame);
}

inline double rho_whittle(const NetworkConfig& config) {
  return ub_whittle(config) / lower_bound(config);
}

struct BoundsReport {
  double lower_bound = 0.0;
  double cv = 0.0;
  /// Finite-M greedy bound; NaN where its domain condition fails.
  double ub_greedy = std::numeric_limits<double>::quiet_NaN();
  double ub_greedy_asymptotic = 0.0;
  double ub_randomized = 0.0;
  double ub_maxweight = 0.0;
  double ub_whittle = 0.0;
  double rho_greedy = 0.0;  // large-M form
  double rho_randomized = 0.0;
  double rho_maxweight = 0.0;
  double rho_whittle = 0.0;
  std::vector<double> alpha_tilde;
  double analytic_randomized_J = 0.0;

  /// Tightest valid upper bound for greedy: finite-M when defined.
  double greedy_upper() const {
    return std::isnan(ub_greedy) ? ub_greedy_asymptotic : ub_greedy;
  }
};

inline BoundsReport compute_bounds(const NetworkConfig& config, std::span<const double> beta) {
  BoundsReport r;
  r.lower_bound = lower_bound(config);
  r.cv = coeff_variation(config.reliability);
  try {
    r.ub_greedy = ub_greedy(config, false);
  } catch (const std::domain_error&) {
  }
  r.ub_greedy_asymptotic = ub_greedy(config, true);
  r.ub_randomized = ub_randomized(config, beta);
  r.ub_maxweight = ub_maxweight(config);
  r.ub_whittle = ub_whittle(config);
  r.rho_greedy = rho_greedy(config);
  r.rho_randomized = r.ub_randomized / r.lower_bound;
  r.rho_maxweight = r.ub_maxweight / r.lower_bound;
  r.rho_whittle = r.ub_whittle / r.lower_bound;
  r.alpha_tilde = alpha_tilde(config.weight, config.reliability, config.slots_per_frame);
  r.analytic_randomized_J = randomized_analytic_objective(config, beta);
  return r;
}

}  // namespace aoi
