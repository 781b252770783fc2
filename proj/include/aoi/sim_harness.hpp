#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "aoi/bounds.hpp"
#include "aoi/config.hpp"
#include "aoi/core_model.hpp"
#include "aoi/policies.hpp"
#include "aoi/rng.hpp"

namespace aoi {

/// Observer hooks for run_episode. All members are optional.
struct NullObserver {
  void frame_start(std::size_t /*k*/, std::span<const Age> /*h*/) {}
  void slot(std::size_t /*k*/, std::size_t /*n*/, Decision /*d*/, bool /*success*/) {}
};

/// Simulates K frames of T slots. In each slot the policy decides; when a
/// client is chosen a Bernoulli(p_i) channel outcome is drawn from the same
/// stream (randomized selection first, then the channel). Deterministic in
/// (config, policy, seed).
template <typename Observer = NullObserver>
EpisodeResult run_episode(const NetworkConfig& config, const PolicyKind& policy,
                          std::uint64_t seed, Observer&& observer = {}) {
  const std::size_t M = config.num_clients();
  const std::size_t T = config.slots_per_frame;
  const std::size_t K = config.horizon;
  const Scheduler scheduler(policy, config);
  Rng rng(seed);
  TraceRecorder recorder(M);
  std::vector<std::uint64_t> age_sum(M, 0);

  FrameState state = FrameState::initial(config);
  while (state.frame <= K) {
    const std::size_t k = state.frame;
    if (state.slot == 1) {
      observer.frame_start(k, state.aoi);
      for (std::size_t i = 0; i < M; ++i) age_sum[i] += state.aoi[i];
    }
    const Decision d = scheduler.decide(state.aoi, state.delivered, rng);
    bool success = false;
    if (d) {
      recorder.on_transmit(*d);
      success = rng.bernoulli(config.reliability[*d]);
    }
    observer.slot(k, state.slot, d, success);
    if (state.slot == T) {
      DeliveredSet closing = state.delivered;
      if (d && success) closing.insert(*d);
      recorder.on_frame_end(k, closing);
    }
    state = advance_slot(std::move(state), d, success, T);
  }

  EpisodeResult result;
  double total = 0.0;
  for (std::size_t i = 0; i < M; ++i) total += config.weight[i] * static_cast<double>(age_sum[i]);
  result.objective = total / (static_cast<double>(K) * static_cast<double>(M));
  result.ewsaoi = ewsaoi_from_objective(result.objective, config);
  result.trace = std::move(recorder).finish(K);
  result.seed = seed;
  return result;
}

struct ExperimentSpec {
  NetworkConfig config;
  PolicyKind policy;
  std::size_t runs = 1;
  std::uint64_t master_seed = 0;
};

struct SummaryStats {
  double mean_J = 0.0;
  double std_error = 0.0;  // of J; T * std_error on the EWSAoI scale
  double mean_ewsaoi = 0.0;
  double ewsaoi_std_error = 0.0;
  std::size_t runs = 0;
  /// Set when runs == 1 and no standard error can be estimated.
  bool insufficient_replication = false;
  std::vector<double> per_run_J;
};

/// Sum in a fixed binary tree so the result depends only on the input order.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline SummaryStats summarize(std::vector<double> per_run, const NetworkConfig& config) {
  SummaryStats s;
  s.runs = per_run.size();
  const double n = static_cast<double>(s.runs);
  s.mean_J = pairwise_sum(per_run) / n;
  if (s.runs > 1) {
    std::vector<double> dev(per_run.size());
    for (std::size_t r = 0; r < per_run.size(); ++r)
      dev[r] = (per_run[r] - s.mean_J) * (per_run[r] - s.mean_J);
    s.std_error = std::sqrt(pairwise_sum(dev) / (n - 1.0)) / std::sqrt(n);
  } else {
    s.insufficient_replication = true;
  }
  s.mean_ewsaoi = ewsaoi_from_objective(s.mean_J, config);
  s.ewsaoi_std_error = static_cast<double>(config.slots_per_frame) * s.std_error;
  s.per_run_J = std::move(per_run);
  return s;
}

/// Threads to use when the caller passes 0: AOI_SCHED_THREADS, else hardware.
inline std::size_t default_threads() {
  if (const char* env = std::getenv("AOI_SCHED_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::min(std::max<std::size_t>(threads, 1), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; !failed && (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// Independent stream per (policy, replication).
inline std::uint64_t episode_seed(std::uint64_t master, const PolicyKind& policy,
                                  std::size_t replication) {
  return derive_seed(master, 0xA0150000u + policy.index(), replication);
}

inline SummaryStats monte_carlo(const ExperimentSpec& spec, std::size_t threads = 0) {
  if (spec.runs < 1) throw config_error("runs", "must be >= 1");
  spec.config.validate();
  validate_policy(spec.policy, spec.config);
  if (threads == 0) threads = default_threads();
  std::vector<double> per_run(spec.runs);
  parallel_for(spec.runs, threads, [&](std::size_t r) {
    per_run[r] =
        run_episode(spec.config, spec.policy, episode_seed(spec.master_seed, spec.policy, r))
            .objective;
  });
  return summarize(std::move(per_run), spec.config);
}

/// Beta vector the bounds use for a spec: its own when randomized, else sqrt(alpha/p).
inline std::vector<double> bounds_beta(const ExperimentSpec& spec) {
  if (const auto* r = std::get_if<Randomized>(&spec.policy)) return r->beta;
  return beta_sqrt_alpha_over_p(spec.config);
}

struct SweepRow {
  ExperimentSpec spec;
  std::optional<SummaryStats> stats;
  std::optional<BoundsReport> bounds;
  std::string error;  // non-empty when this point failed
};

/// monte_carlo plus bounds for every spec, in input order. A failing point is
/// reported in its row and does not stop the sweep.
inline std::vector<SweepRow> sweep(const std::vector<ExperimentSpec>& specs,
                                   std::size_t threads = 0) {
  std::vector<SweepRow> rows;
  rows.reserve(specs.size());
  for (const auto& spec : specs) {
    SweepRow row{spec, std::nullopt, std::nullopt, {}};
    try {
      row.stats = monte_carlo(spec, threads);
      row.bounds = compute_bounds(spec.config, bounds_beta(spec));
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Upper bound (J scale) matching a policy.
inline double policy_upper_bound(const BoundsReport& b, const PolicyKind& policy) {
  switch (policy.index()) {
    case 0:
      return b.greedy_upper();
    case 1:
      return b.ub_randomized;
    case 2:
      return b.ub_maxweight;
    default:
      return b.ub_whittle;
  }
}

}  // namespace aoi
