#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "aoi/config.hpp"

namespace aoi {

/// Clients whose packet for the current frame has been delivered.
class DeliveredSet {
 public:
  DeliveredSet() = default;
  explicit DeliveredSet(std::size_t num_clients) : flags_(num_clients, 0) {}

  bool contains(std::size_t i) const { return flags_[i] != 0; }
  void insert(std::size_t i) {
    if (!flags_[i]) {
      flags_[i] = 1;
      ++count_;
    }
  }
  void clear() {
    std::fill(flags_.begin(), flags_.end(), 0);
    count_ = 0;
  }
  std::size_t size() const noexcept { return count_; }
  std::size_t capacity() const noexcept { return flags_.size(); }
  bool all() const noexcept { return count_ == flags_.size(); }
  bool empty() const noexcept { return count_ == 0; }

  static DeliveredSet of(std::size_t num_clients, std::initializer_list<std::size_t> members) {
    DeliveredSet s(num_clients);
    for (auto i : members) s.insert(i);
    return s;
  }

  friend bool operator==(const DeliveredSet& a, const DeliveredSet& b) {
    return a.flags_ == b.flags_;
  }

 private:
  std::vector<std::uint8_t> flags_;
  std::size_t count_ = 0;
};

/// Live state of the slot/frame machine. `aoi` is fixed within a frame and
/// only changes at the frame boundary.
struct FrameState {
  std::size_t frame = 1;  // k, 1-based
  std::size_t slot = 1;   // n in [1, T]
  std::vector<Age> aoi;
  DeliveredSet delivered;

  static FrameState initial(const NetworkConfig& config) {
    return FrameState{1, 1, config.initial_aoi, DeliveredSet(config.num_clients())};
  }
};

/// Frame-boundary AoI update: delivered clients reset to 1, the rest age by one.
inline std::vector<Age> advance_frame(std::vector<Age> h, const DeliveredSet& delivered) {
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = delivered.contains(i) ? 1 : h[i] + 1;
  return h;
}

/// Applies one slot: the decision and its channel outcome. Crossing slot T
/// closes the frame, updating AoI and clearing the delivered set.
inline FrameState advance_slot(FrameState state, Decision decision, bool success,
                               std::size_t slots_per_frame) {
  if (decision) {
    const std::size_t i = *decision;
    if (i >= state.aoi.size())
      throw contract_error("advance_slot: client index " + std::to_string(i) + " out of range");
    if (state.delivered.contains(i))
      throw contract_error("advance_slot: client " + std::to_string(i) +
                           " already delivered this frame");
    if (success) state.delivered.insert(i);
  }
  if (state.slot < slots_per_frame) {
    ++state.slot;
    return state;
  }
  state.aoi = advance_frame(std::move(state.aoi), state.delivered);
  state.delivered.clear();
  state.slot = 1;
  ++state.frame;
  return state;
}

/// Mean weighted AoI over the horizon: (1/KM) sum_k sum_i alpha_i h_{k,i}.
/// `series[k]` is the AoI vector at the start of frame k+1.
inline double accumulate_objective(std::span<const std::vector<Age>> series,
                                   const NetworkConfig& config) {
  const std::size_t m = config.num_clients();
  if (series.size() != config.horizon)
    throw contract_error("accumulate_objective: expected " + std::to_string(config.horizon) +
                         " frames, got " + std::to_string(series.size()));
  std::vector<std::uint64_t> per_client(m, 0);
  for (const auto& h : series) {
    if (h.size() != m) throw contract_error("accumulate_objective: AoI vector has wrong length");
    for (std::size_t i = 0; i < m; ++i) per_client[i] += h[i];
  }
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) total += config.weight[i] * static_cast<double>(per_client[i]);
  return total / (static_cast<double>(config.horizon) * static_cast<double>(m));
}

/// Converts the working objective J to the Expected Weighted Sum AoI scale.
inline double ewsaoi_from_objective(double j, const NetworkConfig& config) {
  const double t = static_cast<double>(config.slots_per_frame);
  const double m = static_cast<double>(config.num_clients());
  return t / (2.0 * m) * config.weight_sum() + t * j;
}

/// Per-client delivery history. The first interval is counted from frame 1,
/// as though a delivery happened at frame 0.
struct ClientTrace {
  std::uint64_t deliveries = 0;     // D_i
  std::uint64_t transmissions = 0;  // A_i
  std::vector<std::uint64_t> intervals;
  std::uint64_t residual = 0;  // R_i
};

struct DeliveryTrace {
  std::size_t horizon = 0;
  std::vector<ClientTrace> clients;
};

/// Builds a DeliveryTrace incrementally from slot and frame events.
class TraceRecorder {
 public:
  explicit TraceRecorder(std::size_t num_clients) : last_(num_clients, 0) {
    trace_.clients.resize(num_clients);
  }

  void on_transmit(std::size_t i) { ++trace_.clients[i].transmissions; }

  /// Called once per frame k (1-based) with the frame's delivered set.
  void on_frame_end(std::size_t k, const DeliveredSet& delivered) {
    for (std::size_t i = 0; i < last_.size(); ++i) {
      if (!delivered.contains(i)) continue;
      auto& c = trace_.clients[i];
      c.intervals.push_back(k - last_[i]);
      ++c.deliveries;
      last_[i] = k;
    }
  }

  DeliveryTrace finish(std::size_t horizon) && {
    trace_.horizon = horizon;
    for (std::size_t i = 0; i < last_.size(); ++i) trace_.clients[i].residual = horizon - last_[i];
    return std::move(trace_);
  }

 private:
  DeliveryTrace trace_;
  std::vector<std::size_t> last_;
};

struct TraceObjective {
  double value = 0.0;
  /// Set when some client had no delivery; that client's term was taken from
  /// its full-horizon run instead of the interval-moment form.
  bool degenerate = false;
};

/// Objective recomputed from inter-delivery statistics:
/// (1/2M) sum_i alpha_i [ (mean(I) + R/D)^-1 mean(I^2) + R^2/K + 1 ].
/// Initial ages above 1 add (h_1 - 1) for every frame of the first segment.
inline TraceObjective trace_objective(const DeliveryTrace& trace, const NetworkConfig& config) {
  const std::size_t m = config.num_clients();
  if (trace.clients.size() != m) throw contract_error("trace_objective: client count mismatch");
  const double k = static_cast<double>(trace.horizon);
  TraceObjective out;
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& c = trace.clients[i];
    const double r = static_cast<double>(c.residual);
    const double alpha = config.weight[i];
    double first_segment = r;
    double term;
    if (c.deliveries == 0) {
      out.degenerate = true;
      term = alpha * (r * r / k + 1.0);
    } else {
      const double d = static_cast<double>(c.deliveries);
      double sum_i = 0.0, sum_i2 = 0.0;
      for (auto len : c.intervals) {
        const double x = static_cast<double>(len);
        sum_i += x;
        sum_i2 += x * x;
      }
      const double mean_i = sum_i / d;
      const double mean_i2 = sum_i2 / d;
      term = alpha * (mean_i2 / (mean_i + r / d) + r * r / k + 1.0);
      first_segment = static_cast<double>(c.intervals.front());
    }
    total += term;
    total += 2.0 * alpha * static_cast<double>(config.initial_aoi[i] - 1) * first_segment / k;
  }
  out.value = total / (2.0 * static_cast<double>(m));
  return out;
}

struct EpisodeResult {
  double objective = 0.0;  // J
  double ewsaoi = 0.0;
  DeliveryTrace trace;
  std::uint64_t seed = 0;
};

}  // namespace aoi
