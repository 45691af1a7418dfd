#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <random>

#include "bq/errors.hpp"
#include "bq/optimizer.hpp"
#include "bq/parallel.hpp"

using namespace bq;

namespace {

SystemParams system_of(double li, double lj, double lo = 0.5, double hi = 15.0) {
  SystemParams s;
  s.lambda_i = li;
  s.lambda_j = lj;
  s.mu_min = lo;
  s.mu_max = hi;
  return s;
}

BehaviorParams behavior(double t_local, double eta, double r) {
  BehaviorParams bp;
  bp.t_local = t_local;
  bp.eta = eta;
  bp.r = r;
  return bp;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Objective rebuilt term by term from its definition.
double reference_objective(double mi, double mj, double li, double lj, const BehaviorParams& bp,
                           const ObjectiveWeights& w) {
  const double delta = std::max(0.0, bp.t_local - bp.eta * bp.r);
  auto renege = [&](double l, double m) {
    const double rho = l / m;
    double s = 0.0;
    // Same stopping rule as the library: smallest N with rho^(N+1) < 1e-9.
    int last = 0;
    while (!(std::pow(rho, last + 1) < 1e-9)) ++last;
    for (int n = 1; n <= last; ++n) s += (1 - rho) * std::pow(rho, n) * boost::math::gamma_q(double(n), (m - l) * delta);
    return l * s;
  };
  const double e = std::exp(-bp.eta * bp.r);
  return w.tau * ((li / mi) / (mi - li) + (lj / mj) / (mj - lj)) +
         w.phi * (li * renege(li, mi) + lj * renege(lj, mj)) +
         w.psi * (li * logistic(bp.d * (2 * li * e - 2 * lj * e)) +
                  lj * logistic(bp.d * e * ((mi - li) - (mj - lj))));
}

}  // namespace

TEST(Objective, PureDelay) {
  const ObjectiveWeights w{1.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(objective(2.0, 2.0, system_of(1, 1), behavior(5, 0.3, 3), w), 1.0);
}

TEST(Objective, SymmetricJockeyOnly) {
  const ObjectiveWeights w{0.0, 0.0, 1.0};
  EXPECT_DOUBLE_EQ(objective(4.0, 4.0, system_of(1.5, 1.5), behavior(5, 0.3, 3), w), 1.5);
}

TEST(Objective, MatchesIndependentReimplementation) {
  const ObjectiveWeights w{1.0, 1.0, 1.0};
  const auto bp = behavior(5.0, 0.5, 5.0);
  EXPECT_NEAR(objective(7.0, 8.0, system_of(1.5, 1.5), bp, w), reference_objective(7, 8, 1.5, 1.5, bp, w), 1e-12);
  const auto bp2 = behavior(6.0, 0.1, 3.0);
  EXPECT_NEAR(objective(3.0, 2.5, system_of(2.0, 0.7), bp2, w), reference_objective(3, 2.5, 2.0, 0.7, bp2, w), 1e-12);
}

TEST(Objective, UnstableThrows) {
  EXPECT_THROW(objective(1.0, 3.0, system_of(1, 1), behavior(5, 0.3, 3), {}), UnstableQueue);
}

TEST(Stationarity, DelayTermMatchesFiniteDifference) {
  const auto sys = system_of(1.2, 0.8);
  const auto bp = behavior(5, 0.3, 3);
  const ObjectiveWeights w{1.0, 0.0, 0.0};
  KKTPoint p;
  p.mu_i = 4.0;
  p.mu_j = 6.5;
  const auto st = stationarity_residuals(p, sys, bp, w);
  const double h = fd_step(p.mu_i);
  const double fd = (objective(p.mu_i + h, p.mu_j, sys, bp, w) - objective(p.mu_i - h, p.mu_j, sys, bp, w)) / (2 * h);
  EXPECT_NEAR(st.i.total() / fd, 1.0, 1e-6);
  EXPECT_DOUBLE_EQ(st.i.delay, delay_gradient(4.0, 1.2));
}

TEST(Stationarity, ActiveMultiplierZeroesResidual) {
  const auto sys = system_of(1.0, 1.0);
  const auto bp = behavior(5, 0.3, 3);
  const ObjectiveWeights w{1.0, 0.0, 0.0};
  // tau-only optimum sits on the upper bound; gamma_2 absorbs the gradient.
  const auto p = solve_kkt(15.0, 15.0, sys, bp, w);
  EXPECT_GT(p.gamma_i[1], 0.0);
  EXPECT_NEAR(p.stationarity_residuals[0], 0.0, 1e-12);
  EXPECT_NEAR(p.stationarity_residuals[1], 0.0, 1e-12);
  EXPECT_TRUE(check_slackness(p, sys).pass);
}

TEST(Stationarity, JockeyTermUsesQuarterAtBalance) {
  const auto sys = system_of(1.0, 1.0);
  const auto bp = behavior(5, 0.3, 3);
  const ObjectiveWeights w{0.0, 0.0, 2.0};
  KKTPoint p;
  p.mu_i = p.mu_j = 3.0;
  const auto st = stationarity_residuals(p, sys, bp, w);
  EXPECT_NEAR(st.i.jockey, 2.0 * bp.d * bp.decay() * 0.25 * 2.0, 1e-15);
  EXPECT_NEAR(st.j.jockey, -st.i.jockey, 1e-15);
}

TEST(Slackness, Examples) {
  const auto sys = system_of(1.0, 1.0);
  KKTPoint p;
  p.mu_i = 4.0;
  p.mu_j = 5.0;
  EXPECT_TRUE(check_slackness(p, sys).pass);
  p.mu_i = 1.5;  // interior, so a positive stability multiplier breaks slackness
  p.gamma_i[2] = 0.3;
  EXPECT_FALSE(check_slackness(p, sys).pass);

  auto lo = system_of(0.2, 0.2, 1.0, 10.0);
  KKTPoint q;
  q.mu_i = 1.0;
  q.mu_j = 5.0;
  q.gamma_i[0] = 0.7;
  const auto rep = check_slackness(q, lo);
  EXPECT_TRUE(rep.pass);
  EXPECT_TRUE(rep.dual_feasible);
  q.gamma_j[0] = -0.1;
  EXPECT_FALSE(check_slackness(q, lo).pass);
}

TEST(Optimize, TauOnlyPicksLargestRates) {
  const auto res = optimize(GridSpec{}, system_of(1.0, 2.0), behavior(5, 0.3, 3), {1.0, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(res.best_mu_i, 15.0);
  EXPECT_DOUBLE_EQ(res.best_mu_j, 15.0);
  ASSERT_TRUE(res.hessian.has_value());
  EXPECT_TRUE(res.hessian->psd);
}

TEST(Optimize, BelowReferenceValueAtThreeSeconds) {
  const auto sys = system_of(0.25, 0.25);
  const auto res = optimize(GridSpec{}, sys, behavior(5, 0.3, 3), {});
  EXPECT_LT(res.best_value, 1.62);
  EXPECT_LE(res.best_value, objective(4.5, 2.5, sys, behavior(5, 0.3, 3), {}));
}

TEST(Optimize, MatchesExhaustiveScan) {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> lam(0.1, 8.0), w(0.0, 2.0);
  for (int c = 0; c < 10; ++c) {
    const auto sys = system_of(lam(gen), lam(gen));
    const auto bp = behavior(1.0 + w(gen) * 3, 0.05 + w(gen) / 4, 3.0 + 2 * (c % 4));
    const ObjectiveWeights ow{w(gen) + 0.01, w(gen), w(gen)};
    double best = INFINITY, bi = 0, bj = 0;
    for (int a = 0; a <= 29; ++a)
      for (int b = 0; b <= 29; ++b) {
        const double mi = 0.5 + 0.5 * a, mj = 0.5 + 0.5 * b;
        if (mi <= sys.lambda_i || mj <= sys.lambda_j) continue;
        const double v = objective(mi, mj, sys, bp, ow);
        if (v < best) best = v, bi = mi, bj = mj;
      }
    const auto res = optimize(GridSpec{}, sys, bp, ow);
    EXPECT_EQ(res.best_mu_i, bi);
    EXPECT_EQ(res.best_mu_j, bj);
    EXPECT_EQ(res.best_value, best);
  }
}

TEST(Optimize, NoFeasiblePoint) {
  EXPECT_THROW(optimize(GridSpec{}, system_of(20.0, 1.0), behavior(5, 0.3, 3), {}), NoFeasiblePoint);
}

TEST(Landscape, ParallelMatchesSerial) {
  const auto sys = system_of(1.3, 2.1);
  const auto bp = behavior(4, 0.2, 7);
  const auto a = scan_landscape(GridSpec{}, sys, bp, {});
  const auto b = scan_landscape_serial(GridSpec{}, sys, bp, {});
  ASSERT_EQ(a.size(), b.size());
  ASSERT_EQ(a.size(), 30u * 30u);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].mu_i, b[k].mu_i);
    EXPECT_EQ(a[k].mu_j, b[k].mu_j);
    EXPECT_EQ(a[k].feasible, b[k].feasible);
    if (a[k].feasible) EXPECT_EQ(a[k].objective, b[k].objective);
    else EXPECT_TRUE(std::isnan(a[k].objective) && std::isnan(b[k].objective));
  }
  EXPECT_EQ(a.front().mu_i, 0.5);
  EXPECT_EQ(a[1].mu_j, 1.0);
}

TEST(Hessian, SymmetricConfiguration) {
  const auto h = hessian_psd_check(5.0, 5.0, system_of(1.5, 1.5), behavior(5, 0.3, 3), {});
  EXPECT_NEAR(h.h[0][1], h.h[1][0], 1e-6);
  EXPECT_LE(h.eig_min, h.eig_max);
}

TEST(Hessian, TauOnlyIsConvex) {
  const auto h = hessian_psd_check(3.0, 4.0, system_of(1.0, 2.0), behavior(5, 0.3, 3), {1.0, 0.0, 0.0});
  EXPECT_TRUE(h.psd);
  EXPECT_NEAR(h.h[0][1], 0.0, 1e-6);
}

TEST(Hessian, StencilUnderflow) {
  EXPECT_THROW(hessian_psd_check(1.00001, 4.0, system_of(1.0, 2.0), behavior(5, 0.3, 3), {}), StepUnderflow);
}

TEST(Grid, Values) {
  const auto v = GridSpec{}.values();
  ASSERT_EQ(v.size(), 30u);
  EXPECT_EQ(v.front(), 0.5);
  EXPECT_EQ(v.back(), 15.0);
  EXPECT_THROW((GridSpec{1.0, 0.5, 0.5}.values()), InvalidParams);
}
