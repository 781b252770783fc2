#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "aoi/aoi.hpp"

using namespace aoi;

namespace {

// Expected J by expanding the full outcome tree from (frame, slot, h, delivered).
// `choose` returns the candidate decisions considered at a node; the minimum
// over them is taken, so a single candidate evaluates a fixed policy.
using Chooser = std::function<std::vector<Decision>(std::size_t k, std::size_t n,
                                                    const std::vector<Age>&, const DeliveredSet&)>;

double tree_value(const NetworkConfig& c, std::size_t k, std::size_t n, const std::vector<Age>& h,
                  const DeliveredSet& d, const Chooser& choose) {
  const std::size_t M = c.num_clients(), T = c.slots_per_frame, K = c.horizon;
  if (k > K) return 0.0;
  double cost = 0.0;
  if (n == 1) {
    for (std::size_t i = 0; i < M; ++i) cost += c.weight[i] * static_cast<double>(h[i]);
    cost /= static_cast<double>(K * M);
  }
  auto next = [&](const DeliveredSet& nd) {
    if (n < T) return tree_value(c, k, n + 1, h, nd, choose);
    return tree_value(c, k + 1, 1, advance_frame(h, nd), DeliveredSet(M), choose);
  };
  double best = INFINITY;
  for (const auto& dec : choose(k, n, h, d)) {
    double v;
    if (!dec) {
      v = next(d);
    } else {
      auto nd = d;
      nd.insert(*dec);
      const double p = c.reliability[*dec];
      v = p * next(nd) + (1.0 - p) * next(d);
    }
    best = std::min(best, v);
  }
  return cost + best;
}

std::vector<Decision> all_decisions(std::size_t, std::size_t, const std::vector<Age>& h,
                                    const DeliveredSet& d) {
  std::vector<Decision> out = {std::nullopt};
  for (std::size_t i = 0; i < h.size(); ++i)
    if (!d.contains(i)) out.push_back(i);
  return out;
}

NetworkConfig small_random(Rng& g) {
  const std::size_t M = 1 + g.next() % 3, T = 1 + g.next() % 2, K = 1 + g.next() % 3;
  std::vector<double> p(M), a(M);
  std::vector<Age> h1(M);
  for (std::size_t i = 0; i < M; ++i) {
    p[i] = 0.1 + 0.9 * g.uniform();
    a[i] = 0.5 + 1.5 * g.uniform();
    h1[i] = 1 + g.next() % 3;
  }
  auto c = NetworkConfig::make(T, K, p, a);
  c.initial_aoi = h1;
  return c;
}

}  // namespace

TEST(DpOracle, MatchesTreeSearch) {
  Rng g(17);
  for (int t = 0; t < 60; ++t) {
    const auto c = small_random(g);
    const double tree = tree_value(c, 1, 1, c.initial_aoi, DeliveredSet(c.num_clients()), all_decisions);
    EXPECT_NEAR(dp_optimal(c).optimal_expected_J, tree, 1e-12) << t;
  }
}

TEST(DpOracle, RetainedPolicyAchievesOptimum) {
  Rng g(23);
  for (int t = 0; t < 40; ++t) {
    const auto c = small_random(g);
    const auto sol = dp_optimal(c, {1e9, true});
    const Chooser table = [&](std::size_t k, std::size_t n, const std::vector<Age>& h,
                              const DeliveredSet& d) {
      std::uint32_t mask = 0;
      for (std::size_t i = 0; i < h.size(); ++i)
        if (d.contains(i)) mask |= 1u << i;
      return std::vector<Decision>{dp_policy_decide(sol, {k, h, mask, n})};
    };
    const double v = tree_value(c, 1, 1, c.initial_aoi, DeliveredSet(c.num_clients()), table);
    EXPECT_NEAR(v, sol.optimal_expected_J, 1e-12);
  }
}

TEST(DpOracle, NoWorseThanHeuristics) {
  Rng g(29);
  for (int t = 0; t < 40; ++t) {
    const auto c = small_random(g);
    const double opt = dp_optimal(c).optimal_expected_J;
    const Chooser greedy = [](std::size_t, std::size_t, const std::vector<Age>& h,
                              const DeliveredSet& d) { return std::vector<Decision>{greedy_decide(h, d)}; };
    const Chooser mw = [&](std::size_t, std::size_t, const std::vector<Age>& h, const DeliveredSet& d) {
      return std::vector<Decision>{maxweight_decide(h, d, c)};
    };
    EXPECT_LE(opt, tree_value(c, 1, 1, c.initial_aoi, DeliveredSet(c.num_clients()), greedy) + 1e-12);
    EXPECT_LE(opt, tree_value(c, 1, 1, c.initial_aoi, DeliveredSet(c.num_clients()), mw) + 1e-12);
  }
}

TEST(DpOracle, GreedyOptimalOnSymmetric) {
  for (double p : {0.3, 0.7, 1.0})
    for (std::size_t M : {1u, 2u, 3u})
      for (std::size_t T : {1u, 2u}) {
        const auto c = NetworkConfig::symmetric(M, T, 4, p);
        const Chooser greedy = [](std::size_t, std::size_t, const std::vector<Age>& h,
                                  const DeliveredSet& d) {
          return std::vector<Decision>{greedy_decide(h, d)};
        };
        const double g = tree_value(c, 1, 1, c.initial_aoi, DeliveredSet(M), greedy);
        EXPECT_NEAR(dp_optimal(c).optimal_expected_J, g, 1e-12);
      }
}

TEST(DpOracle, ErrorFreeSteadyState) {
  // p = 1, M = 2, T = 1: steady frame-sum 3, so J -> 1.5 and EWSAoI -> 2.
  const auto c = NetworkConfig::make(1, 1000, {1.0, 1.0}, {1.0, 1.0});
  const double j = dp_optimal(c).optimal_expected_J;
  EXPECT_NEAR(j, 1.5, 1e-3);
  EXPECT_NEAR(ewsaoi_from_objective(j, c), 2.0, 1e-3);
}

TEST(DpOracle, AboveLowerBoundOnEwsaoiScale) {
  Rng g(31);
  for (int t = 0; t < 20; ++t) {
    const std::size_t M = 1 + g.next() % 2, T = 1 + g.next() % 3;
    std::vector<double> p(M);
    for (auto& x : p) x = 0.1 + 0.9 * g.uniform();
    const auto c = NetworkConfig::make(T, 60, p, std::vector<double>(M, 1.0));
    EXPECT_LE(lower_bound(c), dp_optimal(c).optimal_expected_J + 1e-12);
  }
}

TEST(DpOracle, SingleClientTransmitsWhenUndelivered) {
  const auto c = NetworkConfig::make(2, 2, {0.6}, {1.0});
  const auto sol = dp_optimal(c, {1e9, true});
  EXPECT_EQ(dp_policy_decide(sol, {1, {1}, 0, 1}), Decision{0});
  EXPECT_EQ(dp_policy_decide(sol, {1, {1}, 0, 2}), Decision{0});
}

TEST(DpOracle, SymmetricDecisionsMatchGreedy) {
  // Decisions in the final frame cannot affect J, so frames 1..K-1 are compared.
  const auto c = NetworkConfig::symmetric(3, 2, 5, 0.6);
  const auto sol = dp_optimal(c, {1e9, true});
  for (std::size_t k = 1; k < c.horizon; ++k)
    for (Age a = 1; a <= k; ++a)
      for (Age b = 1; b <= k; ++b)
        for (Age e = 1; e <= k; ++e)
          for (std::uint32_t mask = 0; mask < 7; ++mask)
            for (std::size_t n = 1; n <= 2; ++n) {
              const std::vector<Age> h = {a, b, e};
              DeliveredSet d(3);
              for (std::size_t i = 0; i < 3; ++i)
                if (mask >> i & 1u) d.insert(i);
              const auto dp = dp_policy_decide(sol, {k, h, mask, n});
              const auto gr = greedy_decide(h, d);
              ASSERT_TRUE(dp.has_value());
              EXPECT_EQ(h[*dp], h[*gr]);
            }
}

TEST(DpOracle, RefusesOversizedProblems) {
  const auto c = NetworkConfig::symmetric(10, 2, 100, 0.5);
  EXPECT_THROW(dp_optimal(c), dp_infeasible);
  try {
    dp_optimal(c);
  } catch (const dp_infeasible& e) {
    EXPECT_NEAR(e.state_count(), dp_state_count(c), 1.0);
  }
  EXPECT_THROW(dp_optimal(NetworkConfig::symmetric(2, 2, 10, 0.5), {10.0, false}), dp_infeasible);
}

TEST(DpOracle, DecideRequiresTableAndValidState) {
  const auto c = NetworkConfig::symmetric(2, 1, 3, 0.5);
  EXPECT_THROW(dp_policy_decide(dp_optimal(c), {1, {1, 1}, 0, 1}), std::logic_error);
  const auto sol = dp_optimal(c, {1e9, true});
  EXPECT_THROW(dp_policy_decide(sol, {4, {1, 1}, 0, 1}), contract_error);
  EXPECT_THROW(dp_policy_decide(sol, {1, {2, 1}, 0, 1}), contract_error);
  EXPECT_THROW(dp_policy_decide(sol, {1, {1, 1}, 4, 1}), contract_error);
}
