#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "bq/errors.hpp"
#include "bq/state_models.hpp"

using namespace bq;

namespace {

// Plain M/M/1 birth-death path: time in each state, plus the event count.
struct Path {
  std::vector<double> time_in_state;
  std::size_t events = 0;
  double horizon = 0.0;
};

Path simulate_mm1(double lambda, double mu, double horizon, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::exponential_distribution<double> up(lambda), both(lambda + mu);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Path p;
  p.horizon = horizon;
  std::size_t n = 0;
  double t = 0.0;
  while (t < horizon) {
    const double dt = n == 0 ? up(gen) : both(gen);
    const double stay = std::min(dt, horizon - t);
    if (p.time_in_state.size() <= n) p.time_in_state.resize(n + 1, 0.0);
    p.time_in_state[n] += stay;
    t += dt;
    if (t >= horizon) break;
    ++p.events;
    if (n == 0 || u(gen) < lambda / (lambda + mu)) ++n;
    else --n;
  }
  return p;
}

}  // namespace

TEST(ServiceRateChain, RejectsBrokenInvariants) {
  EXPECT_THROW(ServiceRateChain({2.0, 1.0}, {0.5, 0.5}), InvalidChain);
  EXPECT_THROW(ServiceRateChain({0.0, 1.0}, {0.5, 0.5}), InvalidChain);
  EXPECT_THROW(ServiceRateChain({1.0, 2.0}, {0.6, 0.5}), InvalidChain);
  EXPECT_THROW(ServiceRateChain({1.0, 2.0}, {-0.1, 1.1}), InvalidChain);
  EXPECT_THROW(ServiceRateChain({1.0, 2.0}, {1.0}), InvalidChain);
  EXPECT_THROW(ServiceRateChain({}, {}), InvalidChain);
  EXPECT_NO_THROW(ServiceRateChain({1.0, 2.0}, {0.5, 0.5}));
}

TEST(EffectiveRate, Examples) {
  EXPECT_DOUBLE_EQ(effective_rate(ServiceRateChain({1, 3}, {0.5, 0.5})), 2.0);
  EXPECT_DOUBLE_EQ(effective_rate(ServiceRateChain({5}, {1.0})), 5.0);
}

TEST(EffectiveRate, MatchesSimulatedChainTimeAverage) {
  // CTMC whose embedded jumps go to level k with probability probs[k] and
  // holding times are exp(1): the time-average rate approaches the mean.
  const std::vector<double> levels{1, 2, 4}, probs{0.2, 0.3, 0.5};
  std::mt19937_64 gen(5);
  std::discrete_distribution<int> pick(probs.begin(), probs.end());
  std::exponential_distribution<double> hold(1.0);
  double area = 0.0, total = 0.0;
  for (int s = 0; s < 400000; ++s) {
    const double h = hold(gen);
    area += levels[pick(gen)] * h;
    total += h;
  }
  const double sim = area / total;
  EXPECT_NEAR(effective_rate(ServiceRateChain(levels, probs)) / sim, 1.0, 0.01);
}

TEST(Cdf, PrefixSums) {
  const auto c = cdf(ServiceRateChain({1, 2, 3}, {0.2, 0.3, 0.5}));
  ASSERT_EQ(c.size(), 3u);
  EXPECT_NEAR(c[0], 0.2, 1e-15);
  EXPECT_NEAR(c[1], 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(c[2], 1.0);
  EXPECT_EQ(cdf(ServiceRateChain({7}, {1.0})), std::vector<double>{1.0});
}

TEST(Cdf, RandomChainAgainstIndependentAccumulation) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> w(5), levels(5);
  for (int k = 0; k < 5; ++k) {
    w[k] = u(gen);
    levels[k] = k + 1.0;
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  const auto c = cdf(ServiceRateChain(levels, w));
  double acc = 0.0;
  for (int k = 0; k < 5; ++k) {
    acc += w[k];
    EXPECT_NEAR(c[k], acc, 1e-12);
  }
}

TEST(FsdCompare, Examples) {
  const ServiceRateChain x({1, 2}, {0.2, 0.8}), y({1, 2}, {0.5, 0.5});
  EXPECT_EQ(fsd_compare(x, x), Dominance::NoDominance);
  EXPECT_EQ(fsd_compare(x, y), Dominance::XDominates);
  EXPECT_EQ(fsd_compare(y, x), Dominance::YDominates);
  const std::vector<double> fx{0.1, 0.9, 1.0}, fy{0.3, 0.6, 1.0};
  EXPECT_EQ(fsd_compare_cdfs(fx, fy), Dominance::NoDominance);
}

TEST(FsdCompare, UnionGridAndIncompatibleGrids) {
  // Shifting every level up dominates.
  EXPECT_EQ(fsd_compare(ServiceRateChain::centered(6.0), ServiceRateChain::centered(5.0)), Dominance::XDominates);
  const std::vector<double> a{0.5, 1.0}, b{1.0};
  EXPECT_THROW(fsd_compare_cdfs(a, b), IncompatibleGrids);
  EXPECT_THROW(fsd_compare_cdfs(std::vector<double>{}, std::vector<double>{}), IncompatibleGrids);
}

TEST(Icd, Examples) {
  EXPECT_DOUBLE_EQ(icd_event_rate(0.5), 1.0);
  EXPECT_DOUBLE_EQ(icd_event_rate(2.0), 4.0);
  EXPECT_DOUBLE_EQ(icd_time(0.5), 1.0);
  EXPECT_DOUBLE_EQ(icd_time(2.0), 0.25);
  EXPECT_THROW(icd_time(0.0), NonpositiveRate);
  EXPECT_THROW(icd_event_rate(-1.0), NonpositiveRate);
}

TEST(Icd, MatchesSimulatedEventRateAndGap) {
  const auto p = simulate_mm1(3.0, 6.0, 100000.0, 21);
  const double rate = static_cast<double>(p.events) / p.horizon;
  EXPECT_NEAR(rate / icd_event_rate(3.0), 1.0, 0.02);
  const double gap = p.horizon / static_cast<double>(p.events);
  EXPECT_NEAR(gap / icd_time(3.0), 1.0, 0.02);
}

TEST(StationaryLength, Examples) {
  const auto d = stationary_length_dist(1.0, 2.0);
  EXPECT_DOUBLE_EQ(d.prob(0), 0.5);
  EXPECT_DOUBLE_EQ(d.prob(1), 0.25);
  EXPECT_DOUBLE_EQ(d.prob(2), 0.125);
  EXPECT_DOUBLE_EQ(stationary_length_dist(1.0, 4.0).prob(0), 0.75);
  EXPECT_THROW(stationary_length_dist(2.0, 2.0), UnstableQueue);
  EXPECT_THROW(stationary_length_dist(3.0, 2.0), UnstableQueue);
}

TEST(StationaryLength, TruncationHonoursTailMass) {
  for (double rho : {0.1, 0.5, 0.9, 0.99}) {
    const auto n = geometric_truncation(rho);
    EXPECT_LT(std::pow(rho, n + 1), kTailMass);
    if (n > 0) EXPECT_GE(std::pow(rho, n), kTailMass);
    double s = 0.0;
    const auto d = stationary_length_dist(rho, 1.0);
    for (std::size_t k = 0; k <= n; ++k) s += d.prob(k);
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(StationaryLength, MatchesSimulatedTimeInState) {
  const auto p = simulate_mm1(2.0, 5.0, 200000.0, 33);
  const auto d = stationary_length_dist(2.0, 5.0);
  double tv = 0.0;
  for (std::size_t n = 0; n < std::max<std::size_t>(p.time_in_state.size(), 40); ++n) {
    const double emp = n < p.time_in_state.size() ? p.time_in_state[n] / p.horizon : 0.0;
    tv += std::abs(emp - d.prob(n));
  }
  EXPECT_LT(0.5 * tv, 0.01);
}
