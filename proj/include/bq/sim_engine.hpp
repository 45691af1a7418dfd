#pragma once

// Seeded discrete-event simulation of two FCFS queues whose buffered tenants
// react to periodic FSD / ICD bulletins by staying, reneging or jockeying.

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <tuple>
#include <variant>
#include <vector>

#include "bq/policy.hpp"
#include "bq/rng.hpp"

namespace bq {

enum class BulletinMode { Alternate, FsdOnly, IcdOnly, None };

const char* to_string(BulletinMode m) noexcept;

enum class Outcome { Pending, Served, Reneged, JockeyedThenServed, JockeyedThenReneged };

/// Shape of the three-level rate chain snapshotted into FSD payloads.
struct ChainShape {
  double spread = 0.2;
  double side_weight = 0.25;
};

struct SimConfig {
  double lambda = 4.0;  ///< total arrival rate
  double split = 0.5;   ///< fraction of arrivals routed to queue i
  double mu_i = 5.0;
  double mu_j = 5.0;
  double mu_min = 0.5;
  double mu_max = 15.0;
  BehaviorParams bp;
  double horizon = 2000.0;
  std::optional<double> warmup;  ///< defaults to 10% of the horizon
  std::uint64_t seed = 1;
  bool policy = false;
  BulletinMode bulletins = BulletinMode::Alternate;
  ChainShape chain;
  ObjectiveWeights weights;
  double policy_alpha = 0.2;
  double policy_step = 0.5;
  bool record_trace = false;

  double lambda_i() const noexcept { return lambda * split; }
  double lambda_j() const noexcept { return lambda * (1.0 - split); }
  double warmup_time() const noexcept { return warmup.value_or(0.1 * horizon); }
  /// Throws InvalidConfig naming the violated invariant.
  void validate() const;
};

struct QueuedRequest {
  std::uint64_t id = 0;
  double arrival = 0.0;
  QueueId source = QueueId::I;
  std::uint32_t jockeys = 0;
  ModelKind last_trigger = ModelKind::FSD;  ///< bulletin kind of the latest jockey
};

struct SystemState {
  std::array<std::deque<QueuedRequest>, 2> queues;
  std::array<double, 2> lambda{};
  std::array<double, 2> mu{};
  ChainShape chain;

  std::deque<QueuedRequest>& queue(QueueId q) { return queues[static_cast<std::size_t>(q)]; }
  const std::deque<QueuedRequest>& queue(QueueId q) const {
    return queues[static_cast<std::size_t>(q)];
  }
};

struct FsdPayload {
  ServiceRateChain chain_i;
  ServiceRateChain chain_j;
};

struct IcdPayload {
  double t_icd_i;
  double t_icd_j;
};

struct Bulletin {
  ModelKind kind = ModelKind::FSD;
  double time = 0.0;
  std::uint64_t sequence = 0;
  std::variant<IcdPayload, FsdPayload> payload;
};

/// Kind alternates with sequence parity under BulletinMode::Alternate.
/// ICD entries are +inf for a queue with zero arrival rate.
Bulletin dispatch_bulletin(const SystemState& state, double clock, std::uint64_t sequence,
                           BulletinMode mode = BulletinMode::Alternate);

struct ReactionEvent {
  ModelKind kind;
  QueueId from;
  Action action;
  std::size_t position;  ///< requests ahead when the decision was taken
  std::size_t queue_length;
  double p_jockey;  ///< probability the jockey test used (0 when not offered)
  double p_renege;  ///< probability the renege test used (0 when not offered)
  QueuedRequest request;
};

/// Memo of FSD jockey integrals keyed by (ell, k, xi_i, xi_j, shift).
using JockeyCache = std::map<std::tuple<std::size_t, std::size_t, double, double, double>, double>;

/// Every buffered request (not the one in service) draws its action, queue i
/// head-to-tail then queue j. Jockeyers join the destination tail and do not
/// react again within this bulletin. Returns one event per evaluated request.
std::vector<ReactionEvent> apply_reactions(SystemState& state, const Bulletin& bulletin,
                                           const BehaviorParams& bp, CounterRng& rng,
                                           JockeyCache* cache = nullptr);

struct RateSample {
  double time;
  double mu_i;
  double mu_j;
};

struct PolicyTraceRow {
  double time;
  double mu_i;
  double mu_j;
  double utility;
  double predicted_renege;
  double predicted_jockey;
};

struct Metrics {
  double measured_time = 0.0;  ///< horizon - warmup

  // Whole-run totals for conservation.
  std::uint64_t arrivals = 0;
  std::uint64_t served = 0;
  std::uint64_t reneged = 0;
  std::uint64_t residual = 0;

  // Post-warmup event counts indexed [model kind][source queue].
  std::array<std::array<std::uint64_t, 2>, 2> renege_count{};
  std::array<std::array<std::uint64_t, 2>, 2> jockey_count{};
  std::array<std::uint64_t, 2> bulletins{};

  // Post-warmup waiting times (arrival to service start or renege),
  // partitioned: served / reneged never jockeyed / jockeyed at least once.
  std::vector<double> wait_served;
  std::vector<double> wait_reneged;
  std::vector<double> wait_jockeyed;
  std::array<std::vector<double>, 2> wait_reneged_by_kind;   ///< by kind of the renege bulletin
  std::array<std::vector<double>, 2> wait_jockeyed_by_kind;  ///< by kind of the last jockey

  std::array<double, 2> mean_queue_length{};
  std::vector<RateSample> rates;
  std::vector<PolicyTraceRow> trace;
  double mu_i_final = 0.0;
  double mu_j_final = 0.0;

  double renege_rate(ModelKind k) const noexcept;
  double jockey_rate(ModelKind k) const noexcept;
  double renege_rate(ModelKind k, QueueId q) const noexcept;
  double jockey_rate(ModelKind k, QueueId q) const noexcept;
};

/// One replication, fully determined by the config (seed included).
Metrics run_replication(const SimConfig& config);

}  // namespace bq
