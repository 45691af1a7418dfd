#include <gtest/gtest.h>

#include <cmath>

#include "bq/errors.hpp"
#include "bq/sim_engine.hpp"

using namespace bq;

namespace {

SystemState make_state(double li, double lj, double mi, double mj, std::size_t ni, std::size_t nj) {
  SystemState s;
  s.lambda = {li, lj};
  s.mu = {mi, mj};
  std::uint64_t id = 0;
  for (std::size_t k = 0; k < ni; ++k) s.queues[0].push_back({id++, 0.0, QueueId::I, 0, ModelKind::FSD});
  for (std::size_t k = 0; k < nj; ++k) s.queues[1].push_back({id++, 0.0, QueueId::J, 0, ModelKind::FSD});
  return s;
}

BehaviorParams behavior(double t_local, double eta, double r) {
  BehaviorParams bp;
  bp.t_local = t_local;
  bp.eta = eta;
  bp.r = r;
  return bp;
}

}  // namespace

TEST(Dispatch, AlternatesAndSnapshots) {
  auto s = make_state(2.0, 1.0, 5.0, 4.0, 0, 0);
  EXPECT_EQ(dispatch_bulletin(s, 0.0, 0).kind, ModelKind::FSD);
  EXPECT_EQ(dispatch_bulletin(s, 3.0, 1).kind, ModelKind::ICD);
  EXPECT_EQ(dispatch_bulletin(s, 6.0, 2).kind, ModelKind::FSD);
  EXPECT_EQ(dispatch_bulletin(s, 6.0, 1, BulletinMode::FsdOnly).kind, ModelKind::FSD);

  const auto icd = dispatch_bulletin(s, 3.0, 1);
  EXPECT_DOUBLE_EQ(std::get<IcdPayload>(icd.payload).t_icd_i, 0.25);
  EXPECT_DOUBLE_EQ(std::get<IcdPayload>(icd.payload).t_icd_j, 0.5);

  const auto fsd = dispatch_bulletin(s, 0.0, 0);
  s.mu[0] = 9.0;  // later changes do not leak into the dispatched payload
  EXPECT_EQ(std::get<FsdPayload>(fsd.payload).chain_i, ServiceRateChain::centered(5.0));
  EXPECT_EQ(std::get<FsdPayload>(fsd.payload).chain_j, ServiceRateChain::centered(4.0));

  auto idle = make_state(0.0, 1.0, 5.0, 4.0, 0, 0);
  EXPECT_TRUE(std::isinf(std::get<IcdPayload>(dispatch_bulletin(idle, 0.0, 1).payload).t_icd_i));
}

TEST(Reactions, EmptyQueuesGiveNoEvents) {
  auto s = make_state(2.0, 2.0, 5.0, 5.0, 0, 1);
  CounterRng rng(1, 9);
  EXPECT_TRUE(apply_reactions(s, dispatch_bulletin(s, 0.0, 0), behavior(1, 0.2, 3), rng).empty());
}

TEST(Reactions, ClampedSlackMakesEveryBufferedRequestRenege) {
  auto s = make_state(2.0, 2.0, 5.0, 5.0, 6, 3);
  CounterRng rng(1, 9);
  const auto ev = apply_reactions(s, dispatch_bulletin(s, 0.0, 0, BulletinMode::FsdOnly), behavior(1, 0.5, 3), rng);
  EXPECT_EQ(ev.size(), 5u + 2u);
  for (const auto& e : ev) EXPECT_EQ(e.action, Action::Renege);
  EXPECT_EQ(s.queues[0].size(), 1u);
  EXPECT_EQ(s.queues[1].size(), 1u);
}

TEST(Reactions, HugeLocalTimeMeansNoReneges) {
  auto s = make_state(2.0, 2.0, 8.0, 5.0, 8, 8);  // queue i dominates
  CounterRng rng(3, 9);
  for (int b = 0; b < 200; ++b) {
    auto copy = s;
    for (const auto& e : apply_reactions(copy, dispatch_bulletin(copy, 0.0, 0, BulletinMode::FsdOnly),
                                         behavior(1e6, 0.2, 3), rng))
      EXPECT_NE(e.action, Action::Renege);
  }
}

TEST(Reactions, FrequenciesMatchProbabilities) {
  const auto bp = behavior(1.0, 0.2, 3.0);
  for (auto mode : {BulletinMode::IcdOnly, BulletinMode::FsdOnly}) {
    const auto base = make_state(3.0, 1.0, 5.0, 7.0, 4, 2);
    CounterRng rng(11, 9);
    JockeyCache cache;
    double pj = 0.0, pr = 0.0;
    double nj = 0.0, nr = 0.0;
    std::size_t first = 0;
    const int n = 100000;
    for (int b = 0; b < n; ++b) {
      auto s = base;
      const auto ev = apply_reactions(s, dispatch_bulletin(s, 0.0, 0, mode), bp, rng, &cache);
      // The first decision of queue i always sees the same state.
      const auto& e = ev.front();
      ASSERT_EQ(e.from, QueueId::I);
      ASSERT_EQ(e.position, 1u);
      pj += e.p_jockey;
      if (e.action != Action::Jockey) pr += e.p_renege;
      nj += e.action == Action::Jockey;
      nr += e.action == Action::Renege;
      ++first;
    }
    EXPECT_GT(pj, 0.0);
    EXPECT_GT(pr, 0.0);
    EXPECT_NEAR(nj / first, pj / first, 0.01) << to_string(mode);
    EXPECT_NEAR(nr / first, pr / first, 0.01) << to_string(mode);
  }
}

TEST(Reactions, JockeyersJoinTailAndDoNotReactAgain) {
  auto s = make_state(3.0, 1.0, 5.0, 5.0, 5, 1);
  BehaviorParams bp = behavior(100.0, 0.0, 1.0);
  bp.d = 50.0;  // jockey probability ~1 from queue i
  CounterRng rng(2, 9);
  const auto ev = apply_reactions(s, dispatch_bulletin(s, 0.0, 1, BulletinMode::IcdOnly), bp, rng);
  EXPECT_EQ(s.queues[0].size(), 1u);
  EXPECT_EQ(s.queues[1].size(), 5u);
  for (std::size_t k = 1; k < 5; ++k) {
    EXPECT_EQ(s.queues[1][k].source, QueueId::I);
    EXPECT_EQ(s.queues[1][k].jockeys, 1u);
  }
  EXPECT_EQ(ev.size(), 4u);  // queue j had no buffered requests at the snapshot
}

TEST(Replication, ZeroArrivals) {
  SimConfig c;
  c.lambda = 0.0;
  c.horizon = 500.0;
  const auto m = run_replication(c);
  EXPECT_EQ(m.arrivals, 0u);
  EXPECT_EQ(m.served, 0u);
  EXPECT_TRUE(m.wait_served.empty());
  EXPECT_TRUE(m.wait_reneged.empty());
  EXPECT_EQ(m.renege_rate(ModelKind::FSD), 0.0);
  EXPECT_EQ(m.jockey_rate(ModelKind::ICD), 0.0);
}

TEST(Replication, ConservationAndDeterminism) {
  SimConfig c;
  c.lambda = 9.0;
  c.mu_i = 5.5;
  c.mu_j = 5.0;
  c.horizon = 800.0;
  c.policy = true;
  c.seed = 42;
  const auto a = run_replication(c);
  const auto b = run_replication(c);
  EXPECT_EQ(a.arrivals, a.served + a.reneged + a.residual);
  EXPECT_EQ(a.arrivals, b.arrivals);
  EXPECT_EQ(a.wait_served, b.wait_served);
  EXPECT_EQ(a.wait_jockeyed, b.wait_jockeyed);
  EXPECT_EQ(a.mu_i_final, b.mu_i_final);
  c.seed = 43;
  EXPECT_NE(run_replication(c).wait_served, a.wait_served);
}

TEST(Replication, NoBulletinsMeansNoImpatience) {
  SimConfig c;
  c.bulletins = BulletinMode::None;
  c.horizon = 1000.0;
  const auto m = run_replication(c);
  EXPECT_EQ(m.reneged, 0u);
  EXPECT_TRUE(m.wait_jockeyed.empty());
  EXPECT_EQ(m.bulletins[0] + m.bulletins[1], 0u);
}

TEST(Replication, PolicyKeepsRatesOnLatticeAndInBounds) {
  SimConfig c;
  c.lambda = 8.0;
  c.mu_i = 5.0;
  c.mu_j = 5.0;
  c.policy = true;
  c.horizon = 600.0;
  c.record_trace = true;
  const auto m = run_replication(c);
  ASSERT_FALSE(m.trace.empty());
  for (const auto& row : m.trace) {
    EXPECT_GE(row.mu_i, c.mu_min);
    EXPECT_LE(row.mu_j, c.mu_max);
    EXPECT_DOUBLE_EQ(std::fmod(row.mu_i, 0.5), 0.0);
    EXPECT_GE(row.predicted_renege, 0.0);
    EXPECT_LE(row.predicted_jockey, 1.0);
  }
}

TEST(SimConfig, ValidationNamesField) {
  SimConfig c;
  c.mu_i = 1.0;  // lambda_i = 2
  try {
    c.validate();
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("mu_i"), std::string::npos);
  }
  SimConfig d;
  d.horizon = -1.0;
  EXPECT_THROW(d.validate(), ValidationError);
  SimConfig w;
  w.warmup = 5000.0;
  EXPECT_THROW(w.validate(), ValidationError);
}
