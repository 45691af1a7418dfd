#include "bq/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bq/errors.hpp"

namespace bq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent generator streams of one replication.
enum Stream : std::uint64_t { kArrivals = 1, kRouting = 2, kServiceI = 3, kServiceJ = 4, kReactions = 5 };

constexpr QueueId other(QueueId q) noexcept { return q == QueueId::I ? QueueId::J : QueueId::I; }
constexpr std::size_t idx(QueueId q) noexcept { return static_cast<std::size_t>(q); }

double cached_jockey(std::size_t ell, std::size_t k, double xi_q, double xi_o, double shift,
                     JockeyCache* cache) {
  if (cache == nullptr) return jockey_probability_fsd_numeric(ell, k, xi_q, xi_o, shift);
  const auto key = std::make_tuple(ell, k, xi_q, xi_o, shift);
  if (auto it = cache->find(key); it != cache->end()) return it->second;
  const double p = jockey_probability_fsd_numeric(ell, k, xi_q, xi_o, shift);
  cache->emplace(key, p);
  return p;
}

}  // namespace

const char* to_string(BulletinMode m) noexcept {
  switch (m) {
    case BulletinMode::Alternate: return "alternate";
    case BulletinMode::FsdOnly: return "fsd";
    case BulletinMode::IcdOnly: return "icd";
    case BulletinMode::None: return "none";
  }
  return "?";
}

void SimConfig::validate() const {
  auto fail = [](const char* field, const char* msg) { throw ValidationError(field, msg); };
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda", "must be a finite nonnegative rate");
  if (!(split > 0.0 && split < 1.0)) fail("split", "must lie in (0, 1)");
  if (!(mu_min > 0.0)) fail("mu_min", "must be positive");
  if (!(mu_min <= mu_max)) fail("mu_max", "must not be below mu_min");
  if (!(mu_i >= mu_min && mu_i <= mu_max)) fail("mu_i", "must lie in [mu_min, mu_max]");
  if (!(mu_j >= mu_min && mu_j <= mu_max)) fail("mu_j", "must lie in [mu_min, mu_max]");
  if (!(lambda_i() < mu_i)) fail("mu_i", "stability requires lambda_i < mu_i");
  if (!(lambda_j() < mu_j)) fail("mu_j", "stability requires lambda_j < mu_j");
  try {
    bp.validate();
  } catch (const InvalidParams& e) {
    fail("behavior", e.what());
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) fail("horizon", "must be positive and finite");
  const double w = warmup_time();
  if (!(w >= 0.0 && w < horizon)) fail("warmup", "requires horizon > warmup >= 0");
  if (!(chain.spread > 0.0 && chain.spread < 1.0)) fail("chain_spread", "must lie in (0, 1)");
  if (!(chain.side_weight >= 0.0 && chain.side_weight <= 0.5))
    fail("chain_side_weight", "must lie in [0, 0.5]");
  if (policy) {
    try {
      weights.validate();
    } catch (const InvalidParams& e) {
      fail("weights", e.what());
    }
    if (!(policy_alpha > 0.0 && policy_alpha < 1.0)) fail("alpha", "must lie in (0, 1)");
    if (!(policy_step > 0.0)) fail("step", "must be positive");
  }
}

Bulletin dispatch_bulletin(const SystemState& state, double clock, std::uint64_t sequence,
                           BulletinMode mode) {
  Bulletin b;
  b.time = clock;
  b.sequence = sequence;
  switch (mode) {
    case BulletinMode::FsdOnly: b.kind = ModelKind::FSD; break;
    case BulletinMode::IcdOnly: b.kind = ModelKind::ICD; break;
    default: b.kind = sequence % 2 == 0 ? ModelKind::FSD : ModelKind::ICD; break;
  }
  if (b.kind == ModelKind::FSD) {
    b.payload = FsdPayload{
        ServiceRateChain::centered(state.mu[0], state.chain.spread, state.chain.side_weight),
        ServiceRateChain::centered(state.mu[1], state.chain.spread, state.chain.side_weight)};
  } else {
    auto t = [](double lambda) { return lambda > 0.0 ? icd_time(lambda) : kInf; };
    b.payload = IcdPayload{t(state.lambda[0]), t(state.lambda[1])};
  }
  return b;
}

std::vector<ReactionEvent> apply_reactions(SystemState& state, const Bulletin& bulletin,
                                           const BehaviorParams& bp, CounterRng& rng,
                                           JockeyCache* cache) {
  std::vector<ReactionEvent> events;
  const double shift = bp.eta * bp.r;

  // Rates as advertised by the bulletin.
  std::array<double, 2> mu_adv = state.mu;
  std::array<bool, 2> other_better{false, false};
  std::array<bool, 2> renege_gate{true, true};
  if (const auto* fsd = std::get_if<FsdPayload>(&bulletin.payload)) {
    mu_adv = {effective_rate(fsd->chain_i), effective_rate(fsd->chain_j)};
    const auto verdict = fsd_compare(fsd->chain_i, fsd->chain_j);
    other_better = {verdict == Dominance::YDominates, verdict == Dominance::XDominates};
  } else {
    const auto& icd = std::get<IcdPayload>(bulletin.payload);
    renege_gate = {icd.t_icd_i < icd.t_icd_j, icd.t_icd_j < icd.t_icd_i};
  }

  // Requests that jockey in during this bulletin sit past these counts.
  const std::array<std::size_t, 2> buffered_at_dispatch{
      state.queues[0].size() > 1 ? state.queues[0].size() - 1 : 0,
      state.queues[1].size() > 1 ? state.queues[1].size() - 1 : 0};

  for (QueueId q : {QueueId::I, QueueId::J}) {
    const QueueId o = other(q);
    auto& src = state.queue(q);
    auto& dst = state.queue(o);
    const double lq = state.lambda[idx(q)];
    const double lo = state.lambda[idx(o)];
    const std::size_t buffered = buffered_at_dispatch[idx(q)];
    std::size_t pos = 1;
    for (std::size_t n = 0; n < buffered; ++n) {
      ReactionEvent ev{bulletin.kind, q, Action::Stay, pos, src.size(), 0.0, 0.0, src[pos]};

      if (bulletin.kind == ModelKind::FSD) {
        if (other_better[idx(q)]) {
          const double xi_q = 2.0 * mu_adv[idx(q)] - lq;
          const double xi_o = 2.0 * mu_adv[idx(o)] - lo;
          ev.p_jockey = cached_jockey(pos, dst.size() + 1, xi_q, xi_o, shift, cache);
        }
      } else if (lq > 0.0 && lo > 0.0) {
        ev.p_jockey = jockey_probability_icd(lq, lo, bp);
      }

      if (ev.p_jockey > 0.0 && rng.bernoulli(ev.p_jockey)) {
        ev.action = Action::Jockey;
      } else if (renege_gate[idx(q)] && mu_adv[idx(q)] > lq) {
        ev.p_renege = renege_probability(pos, mu_adv[idx(q)], lq, bp);
        if (ev.p_renege > 0.0 && rng.bernoulli(ev.p_renege)) ev.action = Action::Renege;
      }

      switch (ev.action) {
        case Action::Stay:
          ++pos;
          break;
        case Action::Jockey: {
          QueuedRequest moved = src[pos];
          src.erase(src.begin() + static_cast<std::ptrdiff_t>(pos));
          ++moved.jockeys;
          moved.last_trigger = bulletin.kind;
          ev.request = moved;
          dst.push_back(moved);
          break;
        }
        case Action::Renege:
          src.erase(src.begin() + static_cast<std::ptrdiff_t>(pos));
          break;
      }
      events.push_back(ev);
    }
  }
  return events;
}

double Metrics::renege_rate(ModelKind k, QueueId q) const noexcept {
  if (!(measured_time > 0.0)) return 0.0;
  return static_cast<double>(renege_count[static_cast<std::size_t>(k)][idx(q)]) / measured_time;
}

double Metrics::jockey_rate(ModelKind k, QueueId q) const noexcept {
  if (!(measured_time > 0.0)) return 0.0;
  return static_cast<double>(jockey_count[static_cast<std::size_t>(k)][idx(q)]) / measured_time;
}

double Metrics::renege_rate(ModelKind k) const noexcept {
  return renege_rate(k, QueueId::I) + renege_rate(k, QueueId::J);
}

double Metrics::jockey_rate(ModelKind k) const noexcept {
  return jockey_rate(k, QueueId::I) + jockey_rate(k, QueueId::J);
}

namespace {

class Replication {
 public:
  explicit Replication(const SimConfig& cfg)
      : cfg_(cfg),
        warmup_(cfg.warmup_time()),
        arrivals_rng_(cfg.seed, kArrivals),
        routing_rng_(cfg.seed, kRouting),
        service_rng_{CounterRng(cfg.seed, kServiceI), CounterRng(cfg.seed, kServiceJ)},
        reaction_rng_(cfg.seed, kReactions),
        model_(cfg.policy_alpha) {
    state_.lambda = {cfg.lambda_i(), cfg.lambda_j()};
    state_.mu = {cfg.mu_i, cfg.mu_j};
    state_.chain = cfg.chain;
    sys_.lambda_i = cfg.lambda_i();
    sys_.lambda_j = cfg.lambda_j();
    sys_.mu_min = cfg.mu_min;
    sys_.mu_max = cfg.mu_max;
    metrics_.measured_time = cfg.horizon - warmup_;
  }

  Metrics run() {
    metrics_.rates.push_back({0.0, state_.mu[0], state_.mu[1]});
    double next_arrival = cfg_.lambda > 0.0 ? arrivals_rng_.exponential(cfg_.lambda) : kInf;
    double next_bulletin = cfg_.bulletins == BulletinMode::None ? kInf : cfg_.bp.r;
    std::uint64_t sequence = 0;

    while (true) {
      // Ties resolve as departure i, departure j, arrival, bulletin.
      double t_next = departure_[0];
      int kind = 0;
      if (departure_[1] < t_next) t_next = departure_[1], kind = 1;
      if (next_arrival < t_next) t_next = next_arrival, kind = 2;
      if (next_bulletin < t_next) t_next = next_bulletin, kind = 3;
      if (!(t_next <= cfg_.horizon)) break;
      accumulate_lengths(t_next);
      clock_ = t_next;

      switch (kind) {
        case 0: depart(QueueId::I); break;
        case 1: depart(QueueId::J); break;
        case 2:
          arrive();
          next_arrival = clock_ + arrivals_rng_.exponential(cfg_.lambda);
          break;
        case 3:
          bulletin(sequence++);
          next_bulletin = clock_ + cfg_.bp.r;
          break;
      }
    }
    accumulate_lengths(cfg_.horizon);

    metrics_.residual = state_.queues[0].size() + state_.queues[1].size();
    metrics_.mu_i_final = state_.mu[0];
    metrics_.mu_j_final = state_.mu[1];
    if (metrics_.measured_time > 0.0)
      for (double& a : metrics_.mean_queue_length) a /= metrics_.measured_time;
    return std::move(metrics_);
  }

 private:
  bool measuring() const noexcept { return clock_ >= warmup_; }

  void accumulate_lengths(double t_next) {
    const double from = std::max(clock_, warmup_);
    if (t_next <= from) return;
    for (std::size_t q = 0; q < 2; ++q)
      metrics_.mean_queue_length[q] += static_cast<double>(state_.queues[q].size()) * (t_next - from);
  }

  void start_service(QueueId q) {
    auto& queue = state_.queue(q);
    if (queue.empty()) {
      departure_[idx(q)] = kInf;
      return;
    }
    const QueuedRequest& head = queue.front();
    if (measuring()) {
      const double wait = clock_ - head.arrival;
      if (head.jockeys == 0) {
        metrics_.wait_served.push_back(wait);
      } else {
        metrics_.wait_jockeyed.push_back(wait);
        metrics_.wait_jockeyed_by_kind[static_cast<std::size_t>(head.last_trigger)].push_back(wait);
      }
    }
    departure_[idx(q)] = clock_ + service_rng_[idx(q)].exponential(state_.mu[idx(q)]);
  }

  void arrive() {
    ++metrics_.arrivals;
    const QueueId q = routing_rng_.uniform() < cfg_.split ? QueueId::I : QueueId::J;
    QueuedRequest req;
    req.id = next_id_++;
    req.arrival = clock_;
    req.source = q;
    auto& queue = state_.queue(q);
    queue.push_back(req);
    if (queue.size() == 1) start_service(q);
  }

  void depart(QueueId q) {
    auto& queue = state_.queue(q);
    queue.pop_front();
    ++metrics_.served;
    start_service(q);
  }

  void bulletin(std::uint64_t sequence) {
    const Bulletin b = dispatch_bulletin(state_, clock_, sequence, cfg_.bulletins);
    const auto kind = static_cast<std::size_t>(b.kind);
    if (measuring()) ++metrics_.bulletins[kind];

    const std::array<bool, 2> was_empty{state_.queues[0].empty(), state_.queues[1].empty()};
    const auto events = apply_reactions(state_, b, cfg_.bp, reaction_rng_, &jockey_cache_);

    for (const auto& ev : events) {
      const auto from = idx(ev.from);
      if (ev.action == Action::Renege) {
        ++metrics_.reneged;
        if (measuring()) {
          ++metrics_.renege_count[kind][from];
          const double wait = clock_ - ev.request.arrival;
          if (ev.request.jockeys == 0) {
            metrics_.wait_reneged.push_back(wait);
            metrics_.wait_reneged_by_kind[kind].push_back(wait);
          } else {
            metrics_.wait_jockeyed.push_back(wait);
            metrics_.wait_jockeyed_by_kind[static_cast<std::size_t>(ev.request.last_trigger)]
                .push_back(wait);
          }
        }
      } else if (ev.action == Action::Jockey && measuring()) {
        ++metrics_.jockey_count[kind][from];
      }
    }
    for (QueueId q : {QueueId::I, QueueId::J})
      if (was_empty[idx(q)] && !state_.queue(q).empty()) start_service(q);

    if (cfg_.policy) adapt(events);
  }

  void adapt(const std::vector<ReactionEvent>& events) {
    for (const auto& ev : events)
      model_.observe({ev.kind, ev.from, ev.action, ev.queue_length, 0.0});

    PolicyState ps;
    ps.mu_i = state_.mu[0];
    ps.mu_j = state_.mu[1];
    ps.step = cfg_.policy_step;
    ps.weights = cfg_.weights;
    const auto [mi, mj] = recalibrate(ps, model_, sys_, cfg_.bp);
    const std::array<double, 2> next{mi, mj};
    for (QueueId q : {QueueId::I, QueueId::J}) {
      const auto k = idx(q);
      if (next[k] == state_.mu[k]) continue;
      state_.mu[k] = next[k];
      // Memoryless service: the residual of the request in service is redrawn.
      if (!state_.queues[k].empty())
        departure_[k] = clock_ + service_rng_[k].exponential(state_.mu[k]);
    }
    if (next[0] != ps.mu_i || next[1] != ps.mu_j) metrics_.rates.push_back({clock_, mi, mj});
    if (cfg_.record_trace) {
      ps.mu_i = mi;
      ps.mu_j = mj;
      metrics_.trace.push_back(
          {clock_, mi, mj, expected_utility(ps, model_, sys_, cfg_.bp),
           0.5 * (model_.predicted_renege(QueueId::I) + model_.predicted_renege(QueueId::J)),
           0.5 * (model_.predicted_jockey(QueueId::I) + model_.predicted_jockey(QueueId::J))});
    }
  }

  const SimConfig& cfg_;
  double warmup_;
  double clock_ = 0.0;
  std::uint64_t next_id_ = 0;
  SystemState state_;
  SystemParams sys_;
  std::array<double, 2> departure_{kInf, kInf};
  CounterRng arrivals_rng_;
  CounterRng routing_rng_;
  std::array<CounterRng, 2> service_rng_;
  CounterRng reaction_rng_;
  PredictiveModel model_;
  JockeyCache jockey_cache_;
  Metrics metrics_;
};

}  // namespace

Metrics run_replication(const SimConfig& config) {
  config.validate();
  return Replication(config).run();
}

}  // namespace bq
