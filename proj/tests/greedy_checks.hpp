#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "aoi/core_model.hpp"

// Episode log shared by the greedy structure checks.
struct EpisodeLog {
  std::vector<std::vector<aoi::Age>> frames;
  std::vector<aoi::Decision> decisions;
  std::vector<bool> outcomes;
  void frame_start(std::size_t, std::span<const aoi::Age> h) { frames.emplace_back(h.begin(), h.end()); }
  void slot(std::size_t, std::size_t, aoi::Decision d, bool ok) {
    decisions.push_back(d);
    outcomes.push_back(ok);
  }
};

// Deliveries that break the cyclic order 0,1,...,M-1,0,... Clients are
// assumed sorted by descending initial age. When the delivered client ties in
// age with the expected one, any tie-break is allowed and the two trade
// places in the cycle.
inline int round_robin_violations(const EpisodeLog& log, std::size_t M, std::size_t T) {
  std::vector<std::size_t> order(M);
  std::iota(order.begin(), order.end(), 0);
  std::size_t pos = 0;
  int bad = 0;
  for (std::size_t s = 0; s < log.decisions.size(); ++s) {
    if (!log.outcomes[s]) continue;
    const std::size_t got = *log.decisions[s];
    const std::size_t want = order[pos];
    if (got != want) {
      const auto& h = log.frames[s / T];
      if (h[got] == h[want]) {
        std::iter_swap(order.begin() + pos, std::find(order.begin(), order.end(), got));
      } else {
        ++bad;
      }
    }
    pos = (pos + 1) % M;
  }
  return bad;
}

// Slots where greedy moved away from a client whose transmission had just
// failed within the same frame.
inline int persistence_violations(const EpisodeLog& log, std::size_t T) {
  int bad = 0;
  for (std::size_t s = 1; s < log.decisions.size(); ++s) {
    if (s % T == 0) continue;
    const auto& prev = log.decisions[s - 1];
    if (prev && !log.outcomes[s - 1] && log.decisions[s] != prev) ++bad;
  }
  return bad;
}
