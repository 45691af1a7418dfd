#pragma once

// Reneging and jockeying probabilities and rates for both bulletin models,
// including the staleness degradation driven by the dispatch interval.

#include <cstddef>
#include <vector>

#include "bq/state_models.hpp"

namespace bq {

struct BehaviorParams {
  double t_local = 5.0;  ///< deterministic local-processing time [s]
  double d = 1.0;        ///< sigmoid steepness [1/jobs]
  double eta = 0.3;      ///< staleness sensitivity in [0, 1]
  double r = 3.0;        ///< dispatch interval [s]

  /// Throws InvalidParams naming the violated bound.
  void validate() const;
  /// Staleness factor e^{-eta r} applied to sigmoid arguments.
  double decay() const noexcept;
  /// Delta = max(0, t_local - eta r).
  double slack() const noexcept;
};

double sigmoid(double x) noexcept;
double sigmoid_derivative(double x) noexcept;

/// x^v e^{-x} / v!, evaluated in the log domain. Equals [v == 0] at x = 0.
double poisson_term(std::size_t v, double x) noexcept;

/// sum_{v=0}^{ell-1} x^v e^{-x} / v!, i.e. P(Erlang(ell, nu) > t) at x = nu t.
double poisson_head_sum(std::size_t ell, double x) noexcept;

/// ell / mu.
double expected_remaining(std::size_t ell, double mu);

/// P(Erlang(ell, nu) <= t); ell = 0 means no wait and yields 1.
double erlang_wait_cdf(std::size_t ell, double nu, double t);

/// Stationary mixture sum_n pi_n * erlang_wait_cdf(n, nu, t), truncated at
/// the geometric tail rule.
double mixture_wait_cdf(const StationaryLengthDist& dist, double nu, double t);

/// Upper Erlang tail at Delta with rate mu - lambda. Zero for ell = 0.
double renege_probability(std::size_t ell, double mu, double lambda, const BehaviorParams& bp);

/// lambda * sum_l pi_l * renege_probability(l) under the truncation rule.
double renege_rate_fsd(double lambda, double mu, const BehaviorParams& bp);
/// Same functional form; the simulator applies it behind the ICD gate.
double renege_rate_icd(double lambda, double mu, const BehaviorParams& bp);

/// sigma(2 d e^{-eta r} (lambda_i - lambda_j)).
double jockey_probability_icd(double lambda_i, double lambda_j, const BehaviorParams& bp);
/// lambda_i P(i->j) + lambda_j P(j->i).
double jockey_rate_icd(double lambda_i, double lambda_j, const BehaviorParams& bp);

/// Adaptive Gauss-Kronrod evaluation of P{W_j,k < W_i,ell} with both Erlang
/// laws delayed by `shift`. Throws QuadratureFailure when the error estimate
/// exceeds 1e-9.
double jockey_probability_fsd_numeric(std::size_t ell, std::size_t k, double xi_i, double xi_j,
                                      double shift);

/// The printed closed form. It does not depend on k and is not clamped to
/// [0, 1]; see conformance_report for how far it strays from the integral.
double jockey_probability_fsd_closed(std::size_t ell, std::size_t k, double xi_i, double xi_j);

/// lambda_i p_ij + lambda_j p_ji.
double jockey_rate_fsd(double lambda_i, double lambda_j, double p_ij, double p_ji);

struct ConformanceRow {
  std::size_t ell;
  std::size_t k;
  double xi_i;
  double xi_j;
  double numeric;
  double closed;
  double abs_diff;
};

/// Closed form vs integral at zero shift over the full (ell, k, xi_i, xi_j)
/// cross product, in that nesting order.
std::vector<ConformanceRow> conformance_report(const std::vector<std::size_t>& ells,
                                               const std::vector<std::size_t>& ks,
                                               const std::vector<double>& xis);

}  // namespace bq
