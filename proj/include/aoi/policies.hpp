#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "aoi/config.hpp"
#include "aoi/core_model.hpp"
#include "aoi/rng.hpp"

namespace aoi {

namespace detail {

// Undelivered client with the largest weight; ties go to the lowest index.
template <typename WeightFn>
Decision argmax_undelivered(std::size_t num_clients, const DeliveredSet& delivered,
                            WeightFn&& weight) {
  using W = std::invoke_result_t<WeightFn&, std::size_t>;
  Decision best;
  W best_weight{};
  for (std::size_t i = 0; i < num_clients; ++i) {
    if (delivered.contains(i)) continue;
    const W w = weight(i);
    if (!best || w > best_weight) {
      best = i;
      best_weight = w;
    }
  }
  return best;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Per-slot decision rules
// ---------------------------------------------------------------------------

/// Serves the undelivered client with the highest AoI.
inline Decision greedy_decide(std::span<const Age> h, const DeliveredSet& delivered) {
  return detail::argmax_undelivered(h.size(), delivered, [&](std::size_t i) { return h[i]; });
}

/// Draws client i with probability beta_i / sum(beta) among *all* clients and
/// idles if that client's packet was already delivered. Consumes one draw.
inline Decision randomized_decide(const DeliveredSet& delivered, std::span<const double> beta,
                                  Rng& rng) {
  double total = 0.0;
  for (double b : beta) total += b;
  const double u = rng.uniform() * total;
  std::size_t pick = beta.size() - 1;
  double cum = 0.0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    cum += beta[i];
    if (u < cum) {
      pick = i;
      break;
    }
  }
  if (delivered.contains(pick)) return std::nullopt;
  return pick;
}

/// Lyapunov-drift weight p * alpha * h * (h + 2).
inline double maxweight_weight(Age h, double p, double alpha) {
  const double x = static_cast<double>(h);
  return p * alpha * x * (x + 2.0);
}

inline Decision maxweight_decide(std::span<const Age> h, const DeliveredSet& delivered,
                                 const NetworkConfig& config) {
  return detail::argmax_undelivered(h.size(), delivered, [&](std::size_t i) {
    return maxweight_weight(h[i], config.reliability[i], config.weight[i]);
  });
}

/// (1 + (1-p)^T) / (1 - (1-p)^T), the per-client constant inside the index.
inline double whittle_factor(double p, std::size_t T) {
  if (!(p > 0.0)) throw std::domain_error("whittle_factor: p must be positive");
  const double q = std::pow(1.0 - p, static_cast<double>(T));
  return (1.0 + q) / (1.0 - q);
}

inline double whittle_index_with_factor(Age h, double p, double alpha, double factor) {
  const double x = static_cast<double>(h);
  return p * alpha * x * (x + factor);
}

/// Whittle index p * alpha * h * [h + (1+(1-p)^T)/(1-(1-p)^T)].
inline double whittle_index(Age h, double p, double alpha, std::size_t T) {
  return whittle_index_with_factor(h, p, alpha, whittle_factor(p, T));
}

/// Service charge at which idling and transmitting tie in state h of the
/// single-client decoupled problem, i.e. the charge that puts the optimal
/// threshold at h + 1. Equals (T/2) * whittle_index; the common factor T/2
/// leaves the index policy's ordering unchanged.
inline double decoupled_indifference_charge(Age h, double p, double alpha, std::size_t T) {
  return 0.5 * static_cast<double>(T) * whittle_index(h, p, alpha, T);
}

inline Decision whittle_decide(std::span<const Age> h, const DeliveredSet& delivered,
                               const NetworkConfig& config) {
  return detail::argmax_undelivered(h.size(), delivered, [&](std::size_t i) {
    return whittle_index(h[i], config.reliability[i], config.weight[i], config.slots_per_frame);
  });
}

// ---------------------------------------------------------------------------
// Policy selection
// ---------------------------------------------------------------------------

struct Greedy {};
struct Randomized {
  std::vector<double> beta;
};
struct MaxWeight {};
struct WhittleIndex {};

using PolicyKind = std::variant<Greedy, Randomized, MaxWeight, WhittleIndex>;

inline std::string_view policy_name(const PolicyKind& policy) {
  constexpr std::string_view names[] = {"greedy", "randomized", "maxweight", "whittle"};
  return names[policy.index()];
}

/// beta_i = sqrt(alpha_i / p_i); makes the randomized guarantee < 2 at T = 1.
inline std::vector<double> beta_sqrt_alpha_over_p(const NetworkConfig& config) {
  std::vector<double> beta(config.num_clients());
  for (std::size_t i = 0; i < beta.size(); ++i)
    beta[i] = std::sqrt(config.weight[i] / config.reliability[i]);
  return beta;
}

inline void validate_policy(const PolicyKind& policy, const NetworkConfig& config) {
  if (const auto* r = std::get_if<Randomized>(&policy)) {
    if (r->beta.size() != config.num_clients())
      throw config_error("beta", "length must equal the number of clients");
    for (double b : r->beta)
      if (!(b > 0.0) || !std::isfinite(b)) throw config_error("beta", "entries must be positive");
  }
}

/// Binds a policy to a network, caching per-client constants used in every slot.
class Scheduler {
 public:
  Scheduler(PolicyKind policy, const NetworkConfig& config)
      : policy_(std::move(policy)), config_(&config) {
    validate_policy(policy_, config);
    if (std::holds_alternative<WhittleIndex>(policy_)) {
      factor_.resize(config.num_clients());
      for (std::size_t i = 0; i < factor_.size(); ++i)
        factor_[i] = whittle_factor(config.reliability[i], config.slots_per_frame);
    }
  }

  Decision decide(std::span<const Age> h, const DeliveredSet& delivered, Rng& rng) const {
    switch (policy_.index()) {
      case 0:
        return greedy_decide(h, delivered);
      case 1:
        return randomized_decide(delivered, std::get<Randomized>(policy_).beta, rng);
      case 2:
        return maxweight_decide(h, delivered, *config_);
      default:
        return detail::argmax_undelivered(h.size(), delivered, [&](std::size_t i) {
          return whittle_index_with_factor(h[i], config_->reliability[i], config_->weight[i],
                                           factor_[i]);
        });
    }
  }

  const PolicyKind& policy() const noexcept { return policy_; }

 private:
  PolicyKind policy_;
  const NetworkConfig* config_;
  std::vector<double> factor_;
};

// ---------------------------------------------------------------------------
// Single-client decoupled model with a per-transmission service charge
// ---------------------------------------------------------------------------

struct DecoupledParams {
  double charge = 0.0;  // C >= 0
  double p = 1.0;
  double alpha = 1.0;
  std::size_t slots_per_frame = 1;

  /// (1-p)^T: probability a transmitting frame ends without delivery.
  double miss() const { return std::pow(1.0 - p, static_cast<double>(slots_per_frame)); }
  /// Z = 1/2 + (1-p)^T / (1 - (1-p)^T).
  double z() const {
    const double q = miss();
    return 0.5 + q / (1.0 - q);
  }
  /// Expected charge paid in a frame spent transmitting until delivery.
  double frame_charge() const { return charge * (1.0 - miss()) / p; }

  void validate() const {
    if (!(charge >= 0.0)) throw std::domain_error("decoupled: charge must be >= 0");
    if (!(p > 0.0 && p <= 1.0)) throw std::domain_error("decoupled: p must lie in (0,1]");
    if (!(alpha > 0.0)) throw std::domain_error("decoupled: alpha must be positive");
    if (slots_per_frame == 0) throw std::domain_error("decoupled: T must be positive");
  }
};

/// Optimal threshold: transmit in frames with h >= H. H is the largest
/// integer not above 1 - Z + sqrt(Z^2 + 2C/(pT alpha)). The comparison is
/// done in the squared form with a 1e-12 relative slack so that charges
/// sitting exactly on a boundary land on the upper side.
inline std::uint64_t threshold_H(const DecoupledParams& params) {
  params.validate();
  const double z = params.z();
  const double rhs = 2.0 * params.charge /
                     (params.p * static_cast<double>(params.slots_per_frame) * params.alpha);
  if (!std::isfinite(rhs)) return std::numeric_limits<std::uint64_t>::max();
  const double slack = 1e-12 * std::max(rhs, 1.0);
  auto fits = [&](std::uint64_t h) {
    const double x = static_cast<double>(h - 1);
    return x * (x + 2.0 * z) <= rhs + slack;
  };
  const double approx = 1.0 - z + std::sqrt(z * z + rhs);
  std::uint64_t h = approx < 1.0 ? 1 : static_cast<std::uint64_t>(std::floor(approx));
  while (h > 1 && !fits(h)) --h;
  while (fits(h + 1)) ++h;
  return h;
}

/// Long-run average cost per slot of the threshold-H policy:
/// alpha/(1-q) + [C/(Tp) + alpha H (H-1)/2] / [H + q/(1-q)], q = (1-p)^T.
inline double decoupled_avg_cost(const DecoupledParams& params, std::uint64_t H) {
  params.validate();
  if (H < 1) throw std::domain_error("decoupled_avg_cost: H must be >= 1");
  const double q = params.miss();
  const double r = 1.0 - q;
  const double h = static_cast<double>(H);
  const double t = static_cast<double>(params.slots_per_frame);
  return params.alpha / r +
         (params.charge / (t * params.p) + params.alpha * h * (h - 1.0) / 2.0) / (h + q / r);
}

/// Slot-level simulation of the threshold-H policy starting from h = 1.
/// Pays C for every slot actually used for a transmission and returns
/// (1/(frames T)) * sum_k (T alpha h_k + C * transmissions_k).
inline double decoupled_simulate(const DecoupledParams& params, std::uint64_t H,
                                 std::uint64_t frames, Rng& rng) {
  params.validate();
  if (frames < 1) throw std::domain_error("decoupled_simulate: frames must be >= 1");
  const std::size_t T = params.slots_per_frame;
  const double t = static_cast<double>(T);
  std::uint64_t h = 1;
  double age_cost = 0.0;
  std::uint64_t transmissions = 0;
  for (std::uint64_t k = 0; k < frames; ++k) {
    age_cost += static_cast<double>(h);
    bool delivered = false;
    if (h >= H) {
      for (std::size_t n = 0; n < T && !delivered; ++n) {
        ++transmissions;
        delivered = rng.bernoulli(params.p);
      }
    }
    h = delivered ? 1 : h + 1;
  }
  const double total = t * params.alpha * age_cost + params.charge * static_cast<double>(transmissions);
  return total / (static_cast<double>(frames) * t);
}

}  // namespace aoi
