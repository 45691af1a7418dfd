#pragma once

// Service-rate optimization over the delay + impatience objective: exhaustive
// grid search, KKT stationarity and complementary-slackness checks, and a
// finite-difference Hessian test.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "bq/impatience.hpp"

namespace bq {

struct ObjectiveWeights {
  double tau = 1.0;  ///< delay
  double phi = 1.0;  ///< reneging
  double psi = 1.0;  ///< jockeying

  void validate() const;
};

/// Arrival rates of both queues and the shared service-rate bounds.
struct SystemParams {
  double lambda_i = 0.25;
  double lambda_j = 0.25;
  double mu_min = 0.5;
  double mu_max = 15.0;

  void validate() const;
  /// mu_min <= mu <= mu_max and mu > lambda for both queues.
  bool feasible(double mu_i, double mu_j) const noexcept;
};

/// Additive pieces of the objective before weighting.
struct ObjectiveTerms {
  double delay_i = 0.0;   ///< rho_i / (mu_i - lambda_i)
  double delay_j = 0.0;
  double renege_i = 0.0;  ///< lambda_i * R_reneg(mu_i)
  double renege_j = 0.0;
  double jockey_i = 0.0;  ///< lambda_i * sigma(d (2 lambda_i e - 2 lambda_j e))
  double jockey_j = 0.0;  ///< lambda_j * sigma(d e ((mu_i - lambda_i) - (mu_j - lambda_j)))

  double weighted(const ObjectiveWeights& w) const noexcept;
};

/// Throws UnstableQueue when mu <= lambda on either queue.
ObjectiveTerms objective_terms(double mu_i, double mu_j, const SystemParams& sys,
                               const BehaviorParams& bp);
double objective(double mu_i, double mu_j, const SystemParams& sys, const BehaviorParams& bp,
                 const ObjectiveWeights& w);

/// d/dmu [rho / (mu - lambda)] = -lambda (2 mu - lambda) / (mu^2 (mu - lambda)^2).
double delay_gradient(double mu, double lambda);

struct KKTPoint {
  double mu_i = 0.0;
  double mu_j = 0.0;
  /// gamma_{1..3} per queue: lower bound, upper bound, stability.
  std::array<double, 3> gamma_i{};
  std::array<double, 3> gamma_j{};
  std::array<double, 2> stationarity_residuals{};
  std::array<double, 6> slackness_residuals{};
};

/// Stationarity expressions split into their printed terms.
struct StationarityBreakdown {
  double delay = 0.0;
  double renege = 0.0;
  double jockey = 0.0;
  double multipliers = 0.0;
  double total() const noexcept { return delay + renege + jockey + multipliers; }
};

struct StationarityResult {
  StationarityBreakdown i;
  StationarityBreakdown j;
  std::array<double, 2> residuals() const noexcept { return {i.total(), j.total()}; }
};

/// Evaluates both stationarity conditions at the point with its multipliers.
/// The renege series runs to the geometric truncation length of each queue.
StationarityResult stationarity_residuals(const KKTPoint& point, const SystemParams& sys,
                                          const BehaviorParams& bp, const ObjectiveWeights& w);

struct ConstraintCheck {
  std::string name;
  double gamma = 0.0;
  double g = 0.0;        ///< constraint value, feasible when <= 0
  double product = 0.0;  ///< gamma * g
  bool ok = false;
};

struct SlacknessReport {
  bool pass = false;
  bool primal_feasible = false;
  bool dual_feasible = false;
  std::array<ConstraintCheck, 6> constraints;
};

/// Complementary slackness (|gamma g| <= 1e-9), dual and primal feasibility.
SlacknessReport check_slackness(const KKTPoint& point, const SystemParams& sys);

/// Enumerates the 8 active sets per queue, solves the multipliers of each by
/// least squares, keeps those passing slackness, and returns the one with the
/// smallest stationarity residual (ties: fewer active constraints).
KKTPoint solve_kkt(double mu_i, double mu_j, const SystemParams& sys, const BehaviorParams& bp,
                   const ObjectiveWeights& w);

struct HessianReport {
  std::array<std::array<double, 2>, 2> h{};
  double eig_min = 0.0;
  double eig_max = 0.0;
  bool psd = false;
};

/// Central finite-difference step h = 1e-4 max(1, mu).
double fd_step(double mu) noexcept;

/// Throws StepUnderflow when a stencil point would leave the stable region.
HessianReport hessian_psd_check(double mu_i, double mu_j, const SystemParams& sys,
                                const BehaviorParams& bp, const ObjectiveWeights& w);

struct GridSpec {
  double lo = 0.5;
  double hi = 15.0;
  double step = 0.5;

  std::vector<double> values() const;
};

struct LandscapePoint {
  double mu_i;
  double mu_j;
  double objective;  ///< NaN when infeasible
  bool feasible;
};

struct OptimizationResult {
  double best_mu_i = 0.0;
  double best_mu_j = 0.0;
  double best_value = 0.0;
  std::vector<double> grid;
  /// Row-major, mu_i outer and mu_j inner, both ascending.
  std::vector<LandscapePoint> landscape;
  KKTPoint kkt;
  SlacknessReport slackness;
  std::optional<HessianReport> hessian;  ///< absent when the stencil does not fit
};

/// Objective at every grid point, OpenMP-parallel over points.
std::vector<LandscapePoint> scan_landscape(const GridSpec& grid, const SystemParams& sys,
                                           const BehaviorParams& bp, const ObjectiveWeights& w);
/// Serial reference for scan_landscape.
std::vector<LandscapePoint> scan_landscape_serial(const GridSpec& grid, const SystemParams& sys,
                                                  const BehaviorParams& bp,
                                                  const ObjectiveWeights& w);

/// Minimum feasible grid point; ties go to the lexicographically smallest
/// (mu_i, mu_j). Throws NoFeasiblePoint.
OptimizationResult optimize(const GridSpec& grid, const SystemParams& sys, const BehaviorParams& bp,
                            const ObjectiveWeights& w);

}  // namespace bq
