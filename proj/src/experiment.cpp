#include "bq/experiment.hpp"

#include <algorithm>
#include <exception>
#include <cmath>
#include <limits>
#include <numeric>

#include "bq/errors.hpp"
#include "bq/parallel.hpp"

namespace bq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median_of(std::vector<double> v) {
  if (v.empty()) return kNaN;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

struct Job {
  double r;
  double lambda;
  bool policy;
  int replication;
};

std::vector<Job> enumerate_jobs(const SweepSpec& sweep) {
  std::vector<Job> jobs;
  for (double r : sweep.intervals)
    for (double lambda : sweep.lambdas)
      for (bool policy : sweep.policies)
        for (int rep = 0; rep < sweep.replications; ++rep) jobs.push_back({r, lambda, policy, rep});
  return jobs;
}

ReplicationSummary run_job(const SimConfig& base, const SweepSpec& sweep, const Job& job) {
  const SimConfig cfg = cell_config(base, sweep, job.r, job.lambda, job.policy, job.replication);
  return summarize(cfg, run_replication(cfg));
}

std::vector<CellAggregate> aggregate(const SweepSpec& sweep,
                                     const std::vector<ReplicationSummary>& reps) {
  std::vector<CellAggregate> cells;
  const auto per_cell = static_cast<std::size_t>(sweep.replications);
  for (std::size_t start = 0; start < reps.size(); start += per_cell) {
    const auto first = reps.begin() + static_cast<std::ptrdiff_t>(start);
    const auto last = first + static_cast<std::ptrdiff_t>(per_cell);
    auto col = [&](double ReplicationSummary::*field) {
      std::vector<double> v;
      v.reserve(per_cell);
      for (auto it = first; it != last; ++it) v.push_back((*it).*field);
      return describe(std::move(v));
    };
    CellAggregate c;
    c.r = first->r;
    c.lambda = first->lambda;
    c.policy = first->policy;
    c.renege_rate_fsd = col(&ReplicationSummary::renege_rate_fsd);
    c.renege_rate_icd = col(&ReplicationSummary::renege_rate_icd);
    c.jockey_rate_fsd = col(&ReplicationSummary::jockey_rate_fsd);
    c.jockey_rate_icd = col(&ReplicationSummary::jockey_rate_icd);
    c.wait_median_reneged = col(&ReplicationSummary::wait_median_reneged);
    c.wait_median_jockeyed = col(&ReplicationSummary::wait_median_jockeyed);
    c.wait_median_served = col(&ReplicationSummary::wait_median_served);
    c.wait_median_impatient = col(&ReplicationSummary::wait_median_impatient);
    cells.push_back(c);
  }
  return cells;
}

}  // namespace

void SweepSpec::validate() const {
  if (intervals.empty()) throw ValidationError("intervals", "must not be empty");
  if (lambdas.empty()) throw ValidationError("lambdas", "must not be empty");
  if (policies.empty()) throw ValidationError("policy", "must select at least one setting");
  if (replications < 1) throw ValidationError("replications", "must be at least 1");
  for (double r : intervals)
    if (!(r > 0.0)) throw ValidationError("intervals", "dispatch intervals must be positive");
  for (double l : lambdas)
    if (!(l >= 0.0)) throw ValidationError("lambdas", "arrival rates must be nonnegative");
  if (!(util_i > 0.0 && util_i < 1.0)) throw ValidationError("util_i", "must lie in (0, 1)");
  if (!(util_j > 0.0 && util_j < 1.0)) throw ValidationError("util_j", "must lie in (0, 1)");
  if (!(lattice > 0.0)) throw ValidationError("lattice", "must be positive");
}

double initial_rate(double lambda, double util, double lattice) {
  double mu = std::ceil(lambda / util / lattice - 1e-12) * lattice;
  mu = std::max(mu, lattice);
  if (!(mu > lambda)) mu += lattice;
  return mu;
}

SimConfig cell_config(const SimConfig& base, const SweepSpec& sweep, double r, double lambda,
                      bool policy, int replication) {
  SimConfig cfg = base;
  cfg.bp.r = r;
  cfg.lambda = lambda;
  cfg.policy = policy;
  cfg.seed = sweep.base_seed + static_cast<std::uint64_t>(replication);
  cfg.mu_i = sweep.mu_i.value_or(initial_rate(cfg.lambda_i(), sweep.util_i, sweep.lattice));
  cfg.mu_j = sweep.mu_j.value_or(initial_rate(cfg.lambda_j(), sweep.util_j, sweep.lattice));
  cfg.mu_i = std::max(cfg.mu_i, cfg.mu_min);
  cfg.mu_j = std::max(cfg.mu_j, cfg.mu_min);
  return cfg;
}

ReplicationSummary summarize(const SimConfig& config, const Metrics& m) {
  ReplicationSummary s;
  s.r = config.bp.r;
  s.lambda = config.lambda;
  s.policy = config.policy;
  s.seed = config.seed;
  s.renege_rate_fsd = m.renege_rate(ModelKind::FSD);
  s.renege_rate_icd = m.renege_rate(ModelKind::ICD);
  s.jockey_rate_fsd = m.jockey_rate(ModelKind::FSD);
  s.jockey_rate_icd = m.jockey_rate(ModelKind::ICD);
  s.wait_median_reneged = median_of(m.wait_reneged);
  s.wait_median_jockeyed = median_of(m.wait_jockeyed);
  s.wait_median_served = median_of(m.wait_served);
  std::vector<double> impatient = m.wait_reneged;
  impatient.insert(impatient.end(), m.wait_jockeyed.begin(), m.wait_jockeyed.end());
  s.wait_median_impatient = median_of(std::move(impatient));
  for (std::size_t k = 0; k < 2; ++k) {
    s.wait_median_reneged_by_kind[k] = median_of(m.wait_reneged_by_kind[k]);
    s.wait_median_jockeyed_by_kind[k] = median_of(m.wait_jockeyed_by_kind[k]);
  }
  s.mu_i_final = m.mu_i_final;
  s.mu_j_final = m.mu_j_final;
  s.arrivals = m.arrivals;
  s.served = m.served;
  s.reneged = m.reneged;
  s.residual = m.residual;
  return s;
}

Stat describe(std::vector<double> values) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  Stat s;
  s.n = values.size();
  if (values.empty()) {
    s.mean = s.median = s.std = kNaN;
    return s;
  }
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
  s.median = median_of(std::move(values));
  return s;
}

ExperimentResult run_experiment_serial(const SimConfig& base, const SweepSpec& sweep) {
  sweep.validate();
  const auto jobs = enumerate_jobs(sweep);
  ExperimentResult out;
  out.replications.reserve(jobs.size());
  for (const auto& job : jobs) out.replications.push_back(run_job(base, sweep, job));
  out.cells = aggregate(sweep, out.replications);
  return out;
}

ExperimentResult run_experiment(const SimConfig& base, const SweepSpec& sweep) {
  sweep.validate();
  const auto jobs = enumerate_jobs(sweep);
  ExperimentResult out;
  out.replications.resize(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());

  const auto n = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(parallel_threads())
  for (long k = 0; k < n; ++k) {
    const auto slot = static_cast<std::size_t>(k);
    try {
      out.replications[slot] = run_job(base, sweep, jobs[slot]);
    } catch (...) {
      errors[slot] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  out.cells = aggregate(sweep, out.replications);
  return out;
}

}  // namespace bq
