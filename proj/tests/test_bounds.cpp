#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "aoi/aoi.hpp"

using namespace aoi;

namespace {

NetworkConfig random_config(Rng& g, std::size_t max_m, std::size_t max_t) {
  const std::size_t M = 1 + g.next() % max_m, T = 1 + g.next() % max_t;
  std::vector<double> p(M), a(M);
  for (std::size_t i = 0; i < M; ++i) {
    p[i] = 0.02 + 0.98 * g.uniform();
    a[i] = 0.1 + 3.0 * g.uniform();
  }
  return NetworkConfig::make(T, 1, p, a);
}

// Per-frame delivery probability from slot independence: each slot misses
// client i with probability (1-q) + q(1-p).
double enumerate_delivery(const NetworkConfig& c, const std::vector<double>& beta, std::size_t i) {
  double total = 0.0;
  for (double b : beta) total += b;
  const double q = beta[i] / total, p = c.reliability[i];
  const std::size_t T = c.slots_per_frame;
  double undelivered = 1.0;
  for (std::size_t n = 0; n < T; ++n) undelivered *= (1.0 - q) + q * (1.0 - p);
  return 1.0 - undelivered;
}

}  // namespace

TEST(LowerBound, HandValue) {
  EXPECT_DOUBLE_EQ(lower_bound(NetworkConfig::make(1, 1, {0.5}, {1.0})), 1.5);
}

TEST(CoeffVariation, HandValues) {
  const std::vector<double> sym = {0.4, 0.4, 0.4};
  EXPECT_EQ(coeff_variation(sym), 0.0);
  const std::vector<double> p = {1.0, 1.0 / 3.0};
  EXPECT_NEAR(coeff_variation(p), 0.5, 1e-15);
}

TEST(UbGreedy, AsymptoticHandValue) {
  const auto c = NetworkConfig::make(1, 1, {0.5, 0.5}, {1.0, 1.0});
  EXPECT_DOUBLE_EQ(ub_greedy(c, true), 2.5);
  EXPECT_DOUBLE_EQ(lower_bound(c), 2.5);
  EXPECT_EQ(rho_greedy(c), 1.0);
}

TEST(UbGreedy, AsymptoticAsymmetric) {
  const auto c = NetworkConfig::make(1, 1, {1.0, 0.25}, {1.0, 1.0});
  const double cv = coeff_variation(c.reliability);
  EXPECT_NEAR(cv, 0.6, 1e-15);
  EXPECT_NEAR(ub_greedy(c, true), (2.0 * 5.0 * (1.0 + cv * cv / 2.0) + 2.0) / 4.0, 1e-14);
  EXPECT_NEAR(rho_greedy(c), ub_greedy(c, true) / lower_bound(c), 1e-14);
}

TEST(UbGreedy, FiniteDomain) {
  EXPECT_THROW(ub_greedy(NetworkConfig::make(2, 1, {1.0, 1.0}, {1.0, 1.0}), false),
               std::domain_error);
  const auto b = compute_bounds(NetworkConfig::make(2, 1, {1.0, 1.0}, {1.0, 1.0}),
                                std::vector<double>{1.0, 1.0});
  EXPECT_TRUE(std::isnan(b.ub_greedy));
  EXPECT_EQ(b.greedy_upper(), b.ub_greedy_asymptotic);
}

TEST(UbGreedy, SymmetricLargeMApproachesLowerBound) {
  double prev = 1e9;
  for (std::size_t M : {10u, 100u, 1000u, 10000u}) {
    const auto c = NetworkConfig::symmetric(M, 2, 1, 0.5);
    const double r = ub_greedy(c, false) / lower_bound(c);
    EXPECT_LT(r, prev);
    prev = r;
  }
  EXPECT_LT(prev, 1.01);
}

TEST(RhoGreedy, SymmetricIsExactlyOne) {
  Rng g(1);
  for (int t = 0; t < 500; ++t) {
    const std::size_t M = 1 + g.next() % 30, T = 1 + g.next() % 10;
    const auto c = NetworkConfig::symmetric(M, T, 1, 0.01 + 0.99 * g.uniform(), 0.1 + 5 * g.uniform());
    EXPECT_EQ(rho_greedy(c), 1.0);
  }
}

TEST(DeliveryProb, T1Exact) {
  const auto c = NetworkConfig::make(1, 1, {0.3, 0.8}, {1.0, 1.0});
  const std::vector<double> beta = {1.0, 3.0};
  EXPECT_NEAR(expected_delivery_prob(c, beta, 0, true), 0.25 * 0.3, 1e-15);
  EXPECT_NEAR(expected_delivery_prob(c, beta, 1, true), 0.75 * 0.8, 1e-15);
}

TEST(DeliveryProb, HandT2) {
  const auto c = NetworkConfig::make(2, 1, {0.5, 0.5}, {1.0, 1.0});
  const std::vector<double> beta = {1.0, 1.0};
  EXPECT_NEAR(expected_delivery_prob(c, beta, 0, true), 0.4375, 1e-15);
  EXPECT_NEAR(expected_delivery_prob(c, beta, 0, false), 1.0 / 3.0, 1e-15);
}

TEST(DeliveryProb, EnumerationAndBoundOrdering) {
  Rng g(2);
  for (int t = 0; t < 300; ++t) {
    const auto c = random_config(g, 5, 8);
    std::vector<double> beta(c.num_clients());
    for (auto& b : beta) b = 0.1 + g.uniform();
    for (std::size_t i = 0; i < c.num_clients(); ++i) {
      const double exact = expected_delivery_prob(c, beta, i, true);
      EXPECT_NEAR(exact, enumerate_delivery(c, beta, i), 1e-12);
      EXPECT_GE(exact, expected_delivery_prob(c, beta, i, false) - 1e-12);
    }
  }
}

TEST(Randomized, AnalyticHandValues) {
  EXPECT_DOUBLE_EQ(randomized_analytic_objective(NetworkConfig::make(1, 1, {0.5}, {1.0}),
                                                 std::vector<double>{1.0}),
                   2.0);
  EXPECT_DOUBLE_EQ(randomized_analytic_objective(NetworkConfig::make(1, 1, {1.0, 1.0}, {1.0, 1.0}),
                                                 std::vector<double>{1.0, 1.0}),
                   2.0);
}

TEST(Randomized, BoundHandValue) {
  const auto c = NetworkConfig::make(1, 1, {0.5}, {1.0});
  const std::vector<double> beta = {1.0};
  EXPECT_DOUBLE_EQ(ub_randomized(c, beta), 2.0);
  EXPECT_DOUBLE_EQ(rho_randomized(c, beta), 4.0 / 3.0);
}

TEST(Randomized, BoundDominatesAnalytic) {
  Rng g(3);
  for (int t = 0; t < 500; ++t) {
    const auto c = random_config(g, 6, 6);
    std::vector<double> beta(c.num_clients());
    for (auto& b : beta) b = 0.1 + g.uniform();
    EXPECT_GE(ub_randomized(c, beta) * (1 + 1e-12), randomized_analytic_objective(c, beta));
  }
}

TEST(Randomized, SqrtRuleBelowTwoAtT1) {
  Rng g(4);
  for (int t = 0; t < 1000; ++t) {
    auto c = random_config(g, 20, 1);
    EXPECT_LT(rho_randomized(c, beta_sqrt_alpha_over_p(c)), 2.0);
  }
}

TEST(MaxWeight, HandValues) {
  EXPECT_DOUBLE_EQ(rho_maxweight(NetworkConfig::make(1, 1, {1.0}, {1.0})), 2.0);
  for (std::size_t M : {1u, 2u, 5u, 50u}) {
    const auto c = NetworkConfig::symmetric(M, 1, 1, 1.0, 1.7);
    const double m = static_cast<double>(M);
    EXPECT_NEAR(rho_maxweight(c), 4 * m / (m + 1), 1e-12);
  }
}

TEST(Whittle, AlphaTildeHand) {
  const std::vector<double> a = {1.0, 2.0}, p = {0.5, 0.5};
  const auto at = alpha_tilde(a, p, 1);
  EXPECT_DOUBLE_EQ(at[0], 12.5);
  EXPECT_DOUBLE_EQ(at[1], 25.0);
}

TEST(Guarantees, OrderingAndAtLeastOne) {
  Rng g(5);
  for (int t = 0; t < 1000; ++t) {
    const auto c = random_config(g, 10, 6);
    const auto b = compute_bounds(c, beta_sqrt_alpha_over_p(c));
    EXPECT_GE(b.rho_whittle, b.rho_maxweight);
    for (double r : {b.rho_greedy, b.rho_randomized, b.rho_maxweight, b.rho_whittle}) EXPECT_GE(r, 1.0);
    if (!std::isnan(b.ub_greedy)) {
      EXPECT_GE(b.ub_greedy / b.lower_bound, 1.0);
    }
    EXPECT_NEAR(b.rho_greedy, b.ub_greedy_asymptotic / b.lower_bound, 1e-12 * b.rho_greedy);
  }
}
