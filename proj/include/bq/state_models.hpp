#pragma once

// Information models carried by bulletins: stationary service-rate chains with
// first-order stochastic dominance, and the inter-changing-time model of
// M/M/1 queue-length dynamics.

#include <cstddef>
#include <span>
#include <vector>

namespace bq {

// Geometric tail mass below which infinite sums over queue lengths stop.
inline constexpr double kTailMass = 1e-9;

/// Stationary distribution over K ordered service-rate levels.
class ServiceRateChain {
 public:
  /// Throws InvalidChain unless levels are strictly increasing and positive,
  /// probs are nonnegative and sum to 1 within 1e-12, and sizes match.
  ServiceRateChain(std::vector<double> levels, std::vector<double> probs);

  /// Three-level chain {(1-s)mu, mu, (1+s)mu} with probs {w, 1-2w, w}.
  static ServiceRateChain centered(double mu, double spread = 0.2, double side_weight = 0.25);

  std::span<const double> levels() const noexcept { return levels_; }
  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return levels_.size(); }

  bool operator==(const ServiceRateChain&) const = default;

 private:
  std::vector<double> levels_;
  std::vector<double> probs_;
};

/// Probability-weighted mean of the chain's levels.
double effective_rate(const ServiceRateChain& chain);

/// Prefix sums of the stationary probabilities; last entry is 1.
std::vector<double> cdf(const ServiceRateChain& chain);

enum class Dominance { XDominates, YDominates, NoDominance };

const char* to_string(Dominance d) noexcept;

/// Dominance verdict for two CDFs evaluated on the same grid. Throws
/// IncompatibleGrids when the lengths differ or are zero.
Dominance fsd_compare_cdfs(std::span<const double> fx, std::span<const double> fy);

/// Chains on different level sets are merged onto the union grid with step
/// CDFs before comparison.
Dominance fsd_compare(const ServiceRateChain& x, const ServiceRateChain& y);

/// Rate of queue-length changes of a stable M/M/1 queue: 2 lambda.
double icd_event_rate(double lambda);

/// Mean time between successive queue-length changes: 1 / (2 lambda).
double icd_time(double lambda);

struct QueueParams {
  double lambda = 1.0;
  double mu = 2.0;
  double mu_min = 0.5;
  double mu_max = 15.0;

  double rho() const noexcept { return lambda / mu; }
  /// Throws NonpositiveRate / UnstableQueue / InvalidParams on violation.
  void validate() const;
};

/// Geometric law pi_n = (1 - rho) rho^n of an M/M/1 queue length.
class StationaryLengthDist {
 public:
  explicit StationaryLengthDist(double rho);

  double rho() const noexcept { return rho_; }
  double prob(std::size_t n) const noexcept;
  /// Mass on lengths > n, i.e. rho^(n+1).
  double tail_after(std::size_t n) const noexcept;
  /// Smallest N with rho^(N+1) < kTailMass. Sums run over n = 0..N.
  std::size_t truncation() const noexcept { return truncation_; }

 private:
  double rho_;
  std::size_t truncation_;
};

/// Throws UnstableQueue if lambda >= mu.
StationaryLengthDist stationary_length_dist(const QueueParams& params);
StationaryLengthDist stationary_length_dist(double lambda, double mu);

/// Smallest N such that rho^(N+1) < tail. rho must lie in [0, 1).
std::size_t geometric_truncation(double rho, double tail = kTailMass);

}  // namespace bq
