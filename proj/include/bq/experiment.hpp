#pragma once

// Replication fan-out over (interval, arrival rate, policy) cells.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bq/sim_engine.hpp"

namespace bq {

struct SweepSpec {
  std::vector<double> intervals{3.0, 5.0, 7.0, 9.0};
  std::vector<double> lambdas{3.0, 5.0, 7.0, 9.0, 11.0, 13.0, 15.0, 17.0};
  std::vector<bool> policies{false, true};
  int replications = 300;
  std::uint64_t base_seed = 1;
  /// Fixed initial rates; when absent each cell derives them from the target
  /// utilizations, rounded up onto the rate lattice.
  std::optional<double> mu_i;
  std::optional<double> mu_j;
  double util_i = 0.7;
  double util_j = 0.9;
  double lattice = 0.5;

  void validate() const;
};

/// Smallest lattice multiple >= lambda / util that is strictly above lambda.
double initial_rate(double lambda, double util, double lattice);

/// Per-replication config of one cell; the seed is base_seed + replication.
SimConfig cell_config(const SimConfig& base, const SweepSpec& sweep, double r, double lambda,
                      bool policy, int replication);

/// Scalars kept from one replication (samples are reduced to medians).
struct ReplicationSummary {
  double r = 0.0;
  double lambda = 0.0;
  bool policy = false;
  std::uint64_t seed = 0;
  double renege_rate_fsd = 0.0;
  double renege_rate_icd = 0.0;
  double jockey_rate_fsd = 0.0;
  double jockey_rate_icd = 0.0;
  double wait_median_reneged = 0.0;  ///< NaN when no sample
  double wait_median_jockeyed = 0.0;
  double wait_median_served = 0.0;
  double wait_median_impatient = 0.0;  ///< reneged and jockeyed pooled
  std::array<double, 2> wait_median_reneged_by_kind{};
  std::array<double, 2> wait_median_jockeyed_by_kind{};
  double mu_i_final = 0.0;
  double mu_j_final = 0.0;
  std::uint64_t arrivals = 0;
  std::uint64_t served = 0;
  std::uint64_t reneged = 0;
  std::uint64_t residual = 0;
};

ReplicationSummary summarize(const SimConfig& config, const Metrics& m);

struct Stat {
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;
  std::size_t n = 0;  ///< finite samples used
};

/// Mean, median and sample standard deviation of the finite entries.
Stat describe(std::vector<double> values);

struct CellAggregate {
  double r = 0.0;
  double lambda = 0.0;
  bool policy = false;
  Stat renege_rate_fsd;
  Stat renege_rate_icd;
  Stat jockey_rate_fsd;
  Stat jockey_rate_icd;
  Stat wait_median_reneged;
  Stat wait_median_jockeyed;
  Stat wait_median_served;
  Stat wait_median_impatient;
};

struct ExperimentResult {
  /// Cell-major (interval, lambda, policy) then replication index.
  std::vector<ReplicationSummary> replications;
  std::vector<CellAggregate> cells;
};

/// OpenMP fan-out over all (cell, replication) jobs into pre-assigned slots.
ExperimentResult run_experiment(const SimConfig& base, const SweepSpec& sweep);
/// Serial reference for run_experiment.
ExperimentResult run_experiment_serial(const SimConfig& base, const SweepSpec& sweep);

}  // namespace bq
