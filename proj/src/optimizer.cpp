#include "bq/optimizer.hpp"

#include <algorithm>
#include <bitset>
#include <cmath>
#include <limits>

#include "bq/errors.hpp"
#include "bq/parallel.hpp"

namespace bq {

namespace {

constexpr double kSlackTol = 1e-9;
constexpr double kBoundTol = 1e-12;
constexpr double kPsdTol = -1e-6;

void require_stable(double mu, double lambda, const char* queue) {
  if (!(mu > lambda)) throw UnstableQueue(std::string("queue ") + queue + " needs mu > lambda");
}

// Printed stationarity expression without the multiplier terms.
StationarityBreakdown gradient_terms(double mu, double lambda, double sign_jockey, double z,
                                     const BehaviorParams& bp, const ObjectiveWeights& w,
                                     double lambda_sum) {
  StationarityBreakdown out;
  out.delay = w.tau * delay_gradient(mu, lambda);

  const double eps = mu - lambda;
  const double delta = bp.slack();
  const std::size_t ell = geometric_truncation(lambda / mu);
  double series = 0.0;
  for (std::size_t v = 0; v < ell; ++v)
    series += (static_cast<double>(v) / eps - delta) * poisson_term(v, eps * delta);
  out.renege = w.phi * lambda * series;

  out.jockey = sign_jockey * w.psi * bp.d * bp.decay() * sigmoid_derivative(z) * lambda_sum;
  return out;
}

// Constraint values g_m(mu) <= 0 for one queue.
std::array<double, 3> constraint_values(double mu, double lambda, const SystemParams& sys) {
  return {sys.mu_min - mu, mu - sys.mu_max, lambda - mu};
}

}  // namespace

void ObjectiveWeights::validate() const {
  if (!(tau >= 0.0 && phi >= 0.0 && psi >= 0.0)) throw InvalidParams("weights must be nonnegative");
  if (!(tau > 0.0 || phi > 0.0 || psi > 0.0)) throw InvalidParams("at least one weight must be positive");
}

void SystemParams::validate() const {
  if (!(lambda_i > 0.0 && lambda_j > 0.0)) throw NonpositiveRate("arrival rates must be positive");
  if (!(mu_min > 0.0)) throw NonpositiveRate("mu_min must be positive");
  if (!(mu_min <= mu_max)) throw InvalidParams("mu_min must not exceed mu_max");
}

bool SystemParams::feasible(double mu_i, double mu_j) const noexcept {
  auto ok = [&](double mu, double lambda) {
    return mu >= mu_min - kBoundTol && mu <= mu_max + kBoundTol && mu > lambda;
  };
  return ok(mu_i, lambda_i) && ok(mu_j, lambda_j);
}

double ObjectiveTerms::weighted(const ObjectiveWeights& w) const noexcept {
  return w.tau * (delay_i + delay_j) + w.phi * (renege_i + renege_j) + w.psi * (jockey_i + jockey_j);
}

ObjectiveTerms objective_terms(double mu_i, double mu_j, const SystemParams& sys,
                               const BehaviorParams& bp) {
  const double li = sys.lambda_i;
  const double lj = sys.lambda_j;
  require_stable(mu_i, li, "i");
  require_stable(mu_j, lj, "j");
  const double e = bp.decay();

  ObjectiveTerms t;
  t.delay_i = (li / mu_i) / (mu_i - li);
  t.delay_j = (lj / mu_j) / (mu_j - lj);
  t.renege_i = li * renege_rate_icd(li, mu_i, bp);
  t.renege_j = lj * renege_rate_icd(lj, mu_j, bp);
  t.jockey_i = li * sigmoid(bp.d * (2.0 * li * e - 2.0 * lj * e));
  t.jockey_j = lj * sigmoid(bp.d * e * ((mu_i - li) - (mu_j - lj)));
  return t;
}

double objective(double mu_i, double mu_j, const SystemParams& sys, const BehaviorParams& bp,
                 const ObjectiveWeights& w) {
  return objective_terms(mu_i, mu_j, sys, bp).weighted(w);
}

double delay_gradient(double mu, double lambda) {
  require_stable(mu, lambda, "?");
  const double gap = mu - lambda;
  return -lambda * (2.0 * mu - lambda) / (mu * mu * gap * gap);
}

StationarityResult stationarity_residuals(const KKTPoint& p, const SystemParams& sys,
                                          const BehaviorParams& bp, const ObjectiveWeights& w) {
  require_stable(p.mu_i, sys.lambda_i, "i");
  require_stable(p.mu_j, sys.lambda_j, "j");
  const double eps_i = p.mu_i - sys.lambda_i;
  const double eps_j = p.mu_j - sys.lambda_j;
  const double z = bp.d * bp.decay() * (eps_j - eps_i);
  const double lsum = sys.lambda_i + sys.lambda_j;

  StationarityResult out;
  out.i = gradient_terms(p.mu_i, sys.lambda_i, +1.0, z, bp, w, lsum);
  out.j = gradient_terms(p.mu_j, sys.lambda_j, -1.0, z, bp, w, lsum);
  out.i.multipliers = -p.gamma_i[0] + p.gamma_i[1] + p.gamma_i[2];
  out.j.multipliers = -p.gamma_j[0] + p.gamma_j[1] + p.gamma_j[2];
  return out;
}

SlacknessReport check_slackness(const KKTPoint& p, const SystemParams& sys) {
  static const std::array<const char*, 6> names = {"mu_min-mu_i", "mu_i-mu_max", "lambda_i-mu_i",
                                                   "mu_min-mu_j", "mu_j-mu_max", "lambda_j-mu_j"};
  const auto gi = constraint_values(p.mu_i, sys.lambda_i, sys);
  const auto gj = constraint_values(p.mu_j, sys.lambda_j, sys);

  SlacknessReport rep;
  rep.primal_feasible = sys.feasible(p.mu_i, p.mu_j);
  rep.dual_feasible = true;
  bool products_ok = true;
  for (std::size_t m = 0; m < 6; ++m) {
    const double gamma = m < 3 ? p.gamma_i[m] : p.gamma_j[m - 3];
    const double g = m < 3 ? gi[m] : gj[m - 3];
    auto& c = rep.constraints[m];
    c.name = names[m];
    c.gamma = gamma;
    c.g = g;
    c.product = gamma * g;
    const bool dual = gamma >= 0.0;
    c.ok = dual && std::abs(c.product) <= kSlackTol && g <= kBoundTol;
    rep.dual_feasible = rep.dual_feasible && dual;
    products_ok = products_ok && std::abs(c.product) <= kSlackTol;
  }
  rep.pass = rep.primal_feasible && rep.dual_feasible && products_ok;
  return rep;
}

KKTPoint solve_kkt(double mu_i, double mu_j, const SystemParams& sys, const BehaviorParams& bp,
                   const ObjectiveWeights& w) {
  KKTPoint base;
  base.mu_i = mu_i;
  base.mu_j = mu_j;
  const auto grad = stationarity_residuals(base, sys, bp, w);
  // d(stationarity)/d(gamma_m) for m = 1..3.
  static constexpr std::array<double, 3> coef = {-1.0, 1.0, 1.0};

  auto solve_queue = [&](double g, double mu, double lambda) {
    const auto cons = constraint_values(mu, lambda, sys);
    std::array<double, 3> best{};
    double best_res = std::abs(g);
    int best_size = 0;
    for (unsigned mask = 1; mask < 8; ++mask) {
      // Minimum-norm solution of sum_{m in S} coef_m gamma_m = -g.
      double norm2 = 0.0;
      for (unsigned m = 0; m < 3; ++m)
        if (mask & (1u << m)) norm2 += coef[m] * coef[m];
      std::array<double, 3> gamma{};
      for (unsigned m = 0; m < 3; ++m)
        if (mask & (1u << m)) gamma[m] = -g * coef[m] / norm2;
      bool admissible = true;
      double res = g;
      for (unsigned m = 0; m < 3; ++m) {
        res += coef[m] * gamma[m];
        if (gamma[m] < 0.0 || std::abs(gamma[m] * cons[m]) > kSlackTol) admissible = false;
      }
      const int size = static_cast<int>(std::bitset<3>(mask).count());
      if (!admissible) continue;
      if (std::abs(res) < best_res || (std::abs(res) == best_res && size < best_size)) {
        best = gamma;
        best_res = std::abs(res);
        best_size = size;
      }
    }
    return best;
  };

  KKTPoint p = base;
  p.gamma_i = solve_queue(grad.i.total(), mu_i, sys.lambda_i);
  p.gamma_j = solve_queue(grad.j.total(), mu_j, sys.lambda_j);
  p.stationarity_residuals = stationarity_residuals(p, sys, bp, w).residuals();
  const auto rep = check_slackness(p, sys);
  for (std::size_t m = 0; m < 6; ++m) p.slackness_residuals[m] = rep.constraints[m].product;
  return p;
}

double fd_step(double mu) noexcept { return 1e-4 * std::max(1.0, std::abs(mu)); }

HessianReport hessian_psd_check(double mu_i, double mu_j, const SystemParams& sys,
                                const BehaviorParams& bp, const ObjectiveWeights& w) {
  const double hi = fd_step(mu_i);
  const double hj = fd_step(mu_j);
  if (!(mu_i - hi > sys.lambda_i) || !(mu_j - hj > sys.lambda_j))
    throw StepUnderflow("finite-difference stencil leaves the stable region");
  auto f = [&](double a, double b) { return objective(a, b, sys, bp, w); };

  const double f0 = f(mu_i, mu_j);
  HessianReport rep;
  rep.h[0][0] = (f(mu_i + hi, mu_j) - 2.0 * f0 + f(mu_i - hi, mu_j)) / (hi * hi);
  rep.h[1][1] = (f(mu_i, mu_j + hj) - 2.0 * f0 + f(mu_i, mu_j - hj)) / (hj * hj);
  const double mixed = (f(mu_i + hi, mu_j + hj) - f(mu_i + hi, mu_j - hj) -
                        f(mu_i - hi, mu_j + hj) + f(mu_i - hi, mu_j - hj)) /
                       (4.0 * hi * hj);
  rep.h[0][1] = mixed;
  rep.h[1][0] = mixed;

  const double mean = 0.5 * (rep.h[0][0] + rep.h[1][1]);
  const double half_gap = 0.5 * (rep.h[0][0] - rep.h[1][1]);
  const double rad = std::sqrt(half_gap * half_gap + mixed * mixed);
  rep.eig_min = mean - rad;
  rep.eig_max = mean + rad;
  rep.psd = rep.eig_min >= kPsdTol;
  return rep;
}

std::vector<double> GridSpec::values() const {
  if (!(step > 0.0) || !(hi >= lo)) throw InvalidParams("grid needs step > 0 and hi >= lo");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = lo + static_cast<double>(k) * step;
  return out;
}

namespace {

LandscapePoint evaluate_point(double mu_i, double mu_j, const SystemParams& sys,
                              const BehaviorParams& bp, const ObjectiveWeights& w) {
  if (!sys.feasible(mu_i, mu_j))
    return {mu_i, mu_j, std::numeric_limits<double>::quiet_NaN(), false};
  return {mu_i, mu_j, objective(mu_i, mu_j, sys, bp, w), true};
}

}  // namespace

std::vector<LandscapePoint> scan_landscape_serial(const GridSpec& grid, const SystemParams& sys,
                                                  const BehaviorParams& bp,
                                                  const ObjectiveWeights& w) {
  const auto values = grid.values();
  std::vector<LandscapePoint> out;
  out.reserve(values.size() * values.size());
  for (double mu_i : values)
    for (double mu_j : values) out.push_back(evaluate_point(mu_i, mu_j, sys, bp, w));
  return out;
}

std::vector<LandscapePoint> scan_landscape(const GridSpec& grid, const SystemParams& sys,
                                           const BehaviorParams& bp, const ObjectiveWeights& w) {
  const auto values = grid.values();
  const auto n = static_cast<long>(values.size());
  std::vector<LandscapePoint> out(values.size() * values.size());
#pragma omp parallel for schedule(dynamic, 8) num_threads(parallel_threads())
  for (long idx = 0; idx < n * n; ++idx) {
    const auto a = static_cast<std::size_t>(idx / n);
    const auto b = static_cast<std::size_t>(idx % n);
    out[static_cast<std::size_t>(idx)] = evaluate_point(values[a], values[b], sys, bp, w);
  }
  return out;
}

OptimizationResult optimize(const GridSpec& grid, const SystemParams& sys, const BehaviorParams& bp,
                            const ObjectiveWeights& w) {
  sys.validate();
  bp.validate();
  w.validate();
  OptimizationResult res;
  res.grid = grid.values();
  res.landscape = scan_landscape(grid, sys, bp, w);

  const LandscapePoint* best = nullptr;
  for (const auto& p : res.landscape) {
    if (!p.feasible) continue;
    if (best == nullptr || p.objective < best->objective) best = &p;
  }
  if (best == nullptr) throw NoFeasiblePoint("no feasible (mu_i, mu_j) on the grid");
  res.best_mu_i = best->mu_i;
  res.best_mu_j = best->mu_j;
  res.best_value = best->objective;
  res.kkt = solve_kkt(res.best_mu_i, res.best_mu_j, sys, bp, w);
  res.slackness = check_slackness(res.kkt, sys);
  try {
    res.hessian = hessian_psd_check(res.best_mu_i, res.best_mu_j, sys, bp, w);
  } catch (const StepUnderflow&) {
    res.hessian.reset();
  }
  return res;
}

}  // namespace bq
