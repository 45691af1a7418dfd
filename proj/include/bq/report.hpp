#pragma once

// Flat-file outputs: CSV tables, the aggregate JSON, and the optimized vs
// non-optimized summary table.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "bq/config.hpp"
#include "bq/experiment.hpp"
#include "bq/impatience.hpp"
#include "bq/optimizer.hpp"

namespace bq {

/// r,lambda,policy,seed,renege_rate_fsd,renege_rate_icd,jockey_rate_fsd,
/// jockey_rate_icd,wait_median_reneged,wait_median_jockeyed,wait_median_served,
/// mu_i_final,mu_j_final
std::string replications_csv(const std::vector<ReplicationSummary>& rows);

/// Inverse of replications_csv for the columns it carries. Throws
/// MissingInput when the file is absent or has no data rows.
std::vector<ReplicationSummary> read_replications_csv(const std::filesystem::path& path);

/// r,lambda,policy,seed,model,outcome,median (per replication, per bulletin kind).
std::string waits_by_model_csv(const std::vector<ReplicationSummary>& rows);

nlohmann::json aggregates_json(const ExperimentResult& result);

/// mu_i,mu_j,objective,feasible
std::string landscape_csv(const std::vector<LandscapePoint>& points);

/// ell,k,xi_i,xi_j,numeric,closed,abs_diff
std::string conformance_csv(const std::vector<ConformanceRow>& rows);

/// time,mu_i,mu_j,utility,predicted_renege,predicted_jockey
std::string policy_trace_csv(const std::vector<PolicyTraceRow>& rows);

struct SummaryRow {
  double r = 0.0;
  double opt_value = 0.0;     ///< NaN when the grid has no feasible point
  double nonopt_value = 0.0;  ///< NaN when the reference pair is infeasible
  double opt_mu_i = 0.0;
  double opt_mu_j = 0.0;
  double ref_mu_i = 0.0;
  double ref_mu_j = 0.0;
  std::string note;  ///< empty, or why a cell is missing
};

struct FooterStats {
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
  double min = 0.0;
  double max = 0.0;
};

/// Rows are the source of truth; footers are recomputed on every call.
class SummaryTable {
 public:
  std::vector<SummaryRow> rows;

  FooterStats optimized() const;
  FooterStats non_optimized() const;
  /// Mean of (non-optimized - optimized) over rows where both exist.
  double average_improvement() const;

  std::string to_csv() const;
  std::string to_text() const;
};

/// Runs the optimizer for each reference interval and evaluates the objective
/// at its reference pair. Optimizer results are appended to `results` in row
/// order when given.
SummaryTable build_summary(const OptimizeSpec& spec, const BehaviorParams& base,
                           const ObjectiveWeights& w,
                           std::vector<OptimizationResult>* results = nullptr);

/// FooterStats over finite values (NaN fields when none).
FooterStats footer_stats(const std::vector<double>& values);

/// Writes through a sibling temp file renamed over the target.
void write_file(const std::filesystem::path& path, const std::string& text);

/// Shortest round-trip decimal representation.
std::string fmt_num(double v);

}  // namespace bq
