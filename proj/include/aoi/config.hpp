#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace aoi {

/// Thrown when a caller breaks an operation's precondition (e.g. scheduling a
/// client whose packet was already delivered this frame).
class contract_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Thrown when a network description is invalid. `key()` names the offending
/// field so front ends can report it.
class config_error : public std::invalid_argument {
 public:
  config_error(std::string key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Age in frames since the last delivery. Always >= 1.
using Age = std::uint64_t;

/// A per-slot scheduling decision: a client index, or idle (nullopt).
using Decision = std::optional<std::size_t>;

/// One problem instance: M clients, T slots per frame, K frames.
struct NetworkConfig {
  std::size_t slots_per_frame = 1;  // T
  std::size_t horizon = 1;          // K
  std::vector<double> reliability;  // p_i in (0,1]
  std::vector<double> weight;       // alpha_i > 0
  std::vector<Age> initial_aoi;     // h_1,i >= 1

  std::size_t num_clients() const noexcept { return reliability.size(); }

  void validate() const {
    const std::size_t m = reliability.size();
    if (m == 0) throw config_error("clients", "at least one client is required");
    if (slots_per_frame == 0) throw config_error("T", "must be positive");
    if (horizon == 0) throw config_error("K", "must be positive");
    if (weight.size() != m) throw config_error("alpha", "length differs from p");
    if (initial_aoi.size() != m) throw config_error("h1", "length differs from p");
    for (std::size_t i = 0; i < m; ++i) {
      if (!(reliability[i] > 0.0 && reliability[i] <= 1.0))
        throw config_error("p", "client " + std::to_string(i) + " must lie in (0,1]");
      if (!(weight[i] > 0.0))
        throw config_error("alpha", "client " + std::to_string(i) + " must be positive");
      if (initial_aoi[i] < 1)
        throw config_error("h1", "client " + std::to_string(i) + " must be >= 1");
    }
  }

  double weight_sum() const { return std::accumulate(weight.begin(), weight.end(), 0.0); }

  /// Builds a validated config with h_1 = all ones.
  static NetworkConfig make(std::size_t T, std::size_t K, std::vector<double> p,
                            std::vector<double> alpha) {
    NetworkConfig c;
    c.slots_per_frame = T;
    c.horizon = K;
    c.initial_aoi.assign(p.size(), 1);
    c.reliability = std::move(p);
    c.weight = std::move(alpha);
    c.validate();
    return c;
  }

  /// Symmetric network: every client shares p and alpha.
  static NetworkConfig symmetric(std::size_t M, std::size_t T, std::size_t K, double p,
                                 double alpha = 1.0) {
    return make(T, K, std::vector<double>(M, p), std::vector<double>(M, alpha));
  }
};

}  // namespace aoi
