#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoi/config.hpp"
#include "aoi/core_model.hpp"

// Exact finite-horizon optimum of E[J_K] by backward induction over
// (frame, AoI vector, delivered mask, slot). Cost alpha_i h_i / (KM) is paid
// once at the start of each frame; the value after frame K is zero.

namespace aoi {

class dp_infeasible : public std::runtime_error {
 public:
  explicit dp_infeasible(double state_count)
      : std::runtime_error("dp_optimal: " + std::to_string(state_count) +
                           " state-slots exceed the budget"),
        state_count_(state_count) {}
  double state_count() const noexcept { return state_count_; }

 private:
  double state_count_;
};

struct DpOptions {
  double state_budget = 1e9;
  /// Keep the argmin action for every (frame, h, mask, slot).
  bool retain_policy = false;
};

/// A point of the slot-level state space. `frame` is needed because the
/// finite-horizon optimal policy is not stationary.
struct DpStateKey {
  std::size_t frame = 1;
  std::vector<Age> aoi;
  std::uint32_t delivered = 0;  // bit i set: client i already served
  std::size_t slot = 1;
};

struct DpSolution {
  double optimal_expected_J = 0.0;
  double state_count = 0.0;
  std::size_t num_clients = 0;
  std::size_t slots_per_frame = 0;
  std::vector<Age> initial_aoi;
  /// actions[k-1][(h_index * T + (n-1)) << M | mask]; -1 means idle.
  std::optional<std::vector<std::vector<std::int8_t>>> actions;
};

/// h_cap^M * 2^M * T with h_cap = K + max h_1.
inline double dp_state_count(const NetworkConfig& config) {
  const Age max_h1 = *std::max_element(config.initial_aoi.begin(), config.initial_aoi.end());
  const double cap = static_cast<double>(config.horizon + max_h1);
  const double m = static_cast<double>(config.num_clients());
  return std::pow(cap, m) * std::pow(2.0, m) * static_cast<double>(config.slots_per_frame);
}

namespace detail {

// AoI values reachable at the start of frame k: client i lies in [1, k-1+h1_i].
inline std::vector<std::size_t> frame_box(const NetworkConfig& config, std::size_t k) {
  std::vector<std::size_t> dims(config.num_clients());
  for (std::size_t i = 0; i < dims.size(); ++i) dims[i] = k - 1 + config.initial_aoi[i];
  return dims;
}

inline std::size_t box_size(const std::vector<std::size_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

// Mixed-radix index, client 0 fastest; h values are 1-based.
inline std::size_t box_index(const std::vector<std::size_t>& dims, const std::vector<Age>& h) {
  std::size_t idx = 0;
  for (std::size_t i = dims.size(); i-- > 0;) idx = idx * dims[i] + (h[i] - 1);
  return idx;
}

}  // namespace detail

inline DpSolution dp_optimal(const NetworkConfig& config, const DpOptions& options = {}) {
  config.validate();
  const std::size_t M = config.num_clients();
  const std::size_t T = config.slots_per_frame;
  const std::size_t K = config.horizon;
  const double count = dp_state_count(config);
  if (M > 20 || count > options.state_budget) throw dp_infeasible(count);

  const std::size_t masks = std::size_t{1} << M;
  const std::uint32_t full = static_cast<std::uint32_t>(masks - 1);
  const double scale = 1.0 / (static_cast<double>(K) * static_cast<double>(M));

  DpSolution sol;
  sol.state_count = count;
  sol.num_clients = M;
  sol.slots_per_frame = T;
  sol.initial_aoi = config.initial_aoi;
  if (options.retain_policy) sol.actions.emplace(K);

  std::vector<double> next_value;  // value at the start of frame k+1 (empty: zero)
  std::vector<std::size_t> next_dims;
  std::vector<double> cur_layer(masks), nxt_layer(masks);
  std::vector<Age> h(M), h_next(M);

  for (std::size_t k = K; k >= 1; --k) {
    const auto dims = detail::frame_box(config, k);
    const std::size_t n_states = detail::box_size(dims);
    std::vector<double> value(n_states);
    std::vector<std::int8_t>* table = nullptr;
    if (sol.actions) {
      (*sol.actions)[k - 1].assign(n_states * T * masks, -1);
      table = &(*sol.actions)[k - 1];
    }
    std::fill(h.begin(), h.end(), 1);
    for (std::size_t s = 0; s < n_states; ++s) {
      double cost = 0.0;
      for (std::size_t i = 0; i < M; ++i) cost += config.weight[i] * static_cast<double>(h[i]);
      cost *= scale;

      // Value after the last slot, by delivered mask.
      for (std::uint32_t mask = 0; mask < masks; ++mask) {
        if (next_value.empty()) {
          nxt_layer[mask] = 0.0;
          continue;
        }
        for (std::size_t i = 0; i < M; ++i) h_next[i] = (mask >> i & 1u) ? 1 : h[i] + 1;
        nxt_layer[mask] = next_value[detail::box_index(next_dims, h_next)];
      }
      for (std::size_t n = T; n >= 1; --n) {
        for (std::uint32_t mask = 0; mask < masks; ++mask) {
          const double idle = nxt_layer[mask];
          double best = idle;
          if (mask != full) {
            for (std::size_t i = 0; i < M; ++i) {
              if (mask >> i & 1u) continue;
              const double p = config.reliability[i];
              const double v = p * nxt_layer[mask | (1u << i)] + (1.0 - p) * idle;
              best = std::min(best, v);
            }
          }
          cur_layer[mask] = best;
          if (table) {
            // Idle on near-ties, then the lowest-index near-minimizer.
            const double tol = 1e-12 * std::max(1.0, std::abs(best));
            std::int8_t act = -1;
            if (idle > best + tol) {
              for (std::size_t i = 0; i < M; ++i) {
                if (mask >> i & 1u) continue;
                const double p = config.reliability[i];
                const double v = p * nxt_layer[mask | (1u << i)] + (1.0 - p) * idle;
                if (v <= best + tol) {
                  act = static_cast<std::int8_t>(i);
                  break;
                }
              }
            }
            (*table)[((s * T + (n - 1)) << M) | mask] = act;
          }
        }
        std::swap(cur_layer, nxt_layer);
      }
      value[s] = cost + nxt_layer[0];

      for (std::size_t i = 0; i < M; ++i) {  // odometer increment
        if (h[i] < dims[i]) {
          ++h[i];
          break;
        }
        h[i] = 1;
      }
    }
    next_value = std::move(value);
    next_dims = dims;
  }
  sol.optimal_expected_J = next_value[detail::box_index(next_dims, config.initial_aoi)];
  return sol;
}

/// Stored optimal action for a state; requires DpOptions::retain_policy.
inline Decision dp_policy_decide(const DpSolution& solution, const DpStateKey& key) {
  if (!solution.actions) throw std::logic_error("dp_policy_decide: decision table not retained");
  const std::size_t M = solution.num_clients;
  const std::size_t T = solution.slots_per_frame;
  const auto& frames = *solution.actions;
  if (key.frame < 1 || key.frame > frames.size() || key.slot < 1 || key.slot > T ||
      key.aoi.size() != M || key.delivered >= (1u << M))
    throw contract_error("dp_policy_decide: state outside the solved space");
  std::vector<std::size_t> dims(M);
  for (std::size_t i = 0; i < M; ++i) {
    dims[i] = key.frame - 1 + solution.initial_aoi[i];
    if (key.aoi[i] < 1 || key.aoi[i] > dims[i])
      throw contract_error("dp_policy_decide: AoI unreachable at this frame");
  }
  const std::size_t s = detail::box_index(dims, key.aoi);
  const auto act = frames[key.frame - 1][((s * T + (key.slot - 1)) << M) | key.delivered];
  if (act < 0) return std::nullopt;
  return static_cast<std::size_t>(act);
}

}  // namespace aoi
