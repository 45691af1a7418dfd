#pragma once

// Rule-based queue policy: an online model of tenant reactions feeding a
// one-step lattice search over the service rates.

#include <array>
#include <cstddef>
#include <utility>

#include "bq/optimizer.hpp"

namespace bq {

enum class ModelKind : std::size_t { FSD = 0, ICD = 1 };
enum class QueueId : std::size_t { I = 0, J = 1 };
enum class Action : std::size_t { Stay = 0, Renege = 1, Jockey = 2 };

const char* to_string(ModelKind k) noexcept;
const char* to_string(Action a) noexcept;

struct ReactionObservation {
  ModelKind model_kind = ModelKind::FSD;
  QueueId queue = QueueId::I;
  Action action = Action::Stay;
  std::size_t queue_length = 0;
  double staleness_age = 0.0;  ///< seconds since dispatch, within [0, r]
};

using ActionProbs = std::array<double, 3>;  // stay, renege, jockey

/// Per (model kind, queue) exponentially weighted action frequencies.
class PredictiveModel {
 public:
  explicit PredictiveModel(double alpha = 0.2);

  void observe(const ReactionObservation& obs);
  const ActionProbs& action_probabilities(ModelKind kind, QueueId queue) const noexcept;

  /// Mean renege / jockey probability of a queue over both model kinds.
  double predicted_renege(QueueId queue) const noexcept;
  double predicted_jockey(QueueId queue) const noexcept;

  double alpha() const noexcept { return alpha_; }

 private:
  double alpha_;
  std::array<std::array<ActionProbs, 2>, 2> cells_;  // [kind][queue]
};

struct PolicyState {
  double mu_i = 1.0;
  double mu_j = 1.0;
  double step = 0.5;
  ObjectiveWeights weights;
};

/// Negated objective with the renege and jockey terms of each queue scaled by
/// that queue's predicted renege and jockey probabilities.
double expected_utility(const PolicyState& state, const PredictiveModel& model,
                        const SystemParams& sys, const BehaviorParams& bp);

/// Utility at explicit rates, sharing expected_utility's weighting.
double expected_utility_at(double mu_i, double mu_j, const PolicyState& state,
                           const PredictiveModel& model, const SystemParams& sys,
                           const BehaviorParams& bp);

/// Moves to the best of the 9 feasible lattice neighbours. Ties keep the
/// current rates, then prefer the lexicographically smallest pair.
std::pair<double, double> recalibrate(const PolicyState& state, const PredictiveModel& model,
                                      const SystemParams& sys, const BehaviorParams& bp);

}  // namespace bq
