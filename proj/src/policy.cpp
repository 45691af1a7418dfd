#include "bq/policy.hpp"

#include <cmath>

#include "bq/errors.hpp"

namespace bq {

const char* to_string(ModelKind k) noexcept { return k == ModelKind::FSD ? "FSD" : "ICD"; }

const char* to_string(Action a) noexcept {
  switch (a) {
    case Action::Stay: return "stay";
    case Action::Renege: return "renege";
    case Action::Jockey: return "jockey";
  }
  return "?";
}

PredictiveModel::PredictiveModel(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParams("smoothing factor must lie in (0, 1)");
  for (auto& by_queue : cells_)
    for (auto& cell : by_queue) cell.fill(1.0 / 3.0);
}

void PredictiveModel::observe(const ReactionObservation& obs) {
  auto& cell = cells_[static_cast<std::size_t>(obs.model_kind)][static_cast<std::size_t>(obs.queue)];
  double total = 0.0;
  for (std::size_t a = 0; a < cell.size(); ++a) {
    const double hit = a == static_cast<std::size_t>(obs.action) ? 1.0 : 0.0;
    cell[a] = (1.0 - alpha_) * cell[a] + alpha_ * hit;
    total += cell[a];
  }
  for (double& f : cell) f /= total;
}

const ActionProbs& PredictiveModel::action_probabilities(ModelKind kind, QueueId queue) const noexcept {
  return cells_[static_cast<std::size_t>(kind)][static_cast<std::size_t>(queue)];
}

double PredictiveModel::predicted_renege(QueueId queue) const noexcept {
  const auto q = static_cast<std::size_t>(queue);
  return 0.5 * (cells_[0][q][1] + cells_[1][q][1]);
}

double PredictiveModel::predicted_jockey(QueueId queue) const noexcept {
  const auto q = static_cast<std::size_t>(queue);
  return 0.5 * (cells_[0][q][2] + cells_[1][q][2]);
}

double expected_utility_at(double mu_i, double mu_j, const PolicyState& state,
                           const PredictiveModel& model, const SystemParams& sys,
                           const BehaviorParams& bp) {
  const auto t = objective_terms(mu_i, mu_j, sys, bp);
  const auto& w = state.weights;
  const double delay = w.tau * (t.delay_i + t.delay_j);
  const double renege = w.phi * (model.predicted_renege(QueueId::I) * t.renege_i +
                                 model.predicted_renege(QueueId::J) * t.renege_j);
  const double jockey = w.psi * (model.predicted_jockey(QueueId::I) * t.jockey_i +
                                 model.predicted_jockey(QueueId::J) * t.jockey_j);
  return -(delay + renege + jockey);
}

double expected_utility(const PolicyState& state, const PredictiveModel& model,
                        const SystemParams& sys, const BehaviorParams& bp) {
  return expected_utility_at(state.mu_i, state.mu_j, state, model, sys, bp);
}

std::pair<double, double> recalibrate(const PolicyState& state, const PredictiveModel& model,
                                      const SystemParams& sys, const BehaviorParams& bp) {
  std::pair<double, double> best{state.mu_i, state.mu_j};
  if (!sys.feasible(state.mu_i, state.mu_j)) return best;
  double best_u = expected_utility(state, model, sys, bp);
  // Offsets ascend, so the first strict improvement among equals is the
  // lexicographically smallest pair.
  for (int a = -1; a <= 1; ++a) {
    for (int b = -1; b <= 1; ++b) {
      if (a == 0 && b == 0) continue;
      const double mi = state.mu_i + a * state.step;
      const double mj = state.mu_j + b * state.step;
      if (!sys.feasible(mi, mj)) continue;
      const double u = expected_utility_at(mi, mj, state, model, sys, bp);
      if (u > best_u) {
        best_u = u;
        best = {mi, mj};
      }
    }
  }
  return best;
}

}  // namespace bq
