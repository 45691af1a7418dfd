#include "bq/state_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bq/errors.hpp"

namespace bq {

namespace {

constexpr double kProbSumTol = 1e-12;
constexpr double kCompareTol = 1e-12;

// F(m) = sum of probs over levels <= m.
double step_cdf(const ServiceRateChain& chain, double m) {
  double acc = 0.0;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    if (chain.levels()[k] <= m) acc += chain.probs()[k];
  }
  return std::min(acc, 1.0);
}

}  // namespace

ServiceRateChain::ServiceRateChain(std::vector<double> levels, std::vector<double> probs)
    : levels_(std::move(levels)), probs_(std::move(probs)) {
  if (levels_.empty()) throw InvalidChain("chain needs at least one level");
  if (levels_.size() != probs_.size()) throw InvalidChain("levels and probs differ in length");
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    if (!(levels_[k] > 0.0) || !std::isfinite(levels_[k]))
      throw InvalidChain("level " + std::to_string(k) + " must be positive");
    if (k > 0 && !(levels_[k] > levels_[k - 1]))
      throw InvalidChain("levels must be strictly increasing");
    if (!(probs_[k] >= 0.0)) throw InvalidChain("probabilities must be nonnegative");
  }
  const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  if (std::abs(total - 1.0) > kProbSumTol) throw InvalidChain("probabilities must sum to 1");
}

ServiceRateChain ServiceRateChain::centered(double mu, double spread, double side_weight) {
  if (!(mu > 0.0)) throw NonpositiveRate("chain centre must be positive");
  if (!(spread > 0.0 && spread < 1.0)) throw InvalidChain("spread must lie in (0, 1)");
  if (!(side_weight >= 0.0 && side_weight <= 0.5)) throw InvalidChain("side weight must lie in [0, 0.5]");
  return ServiceRateChain({(1.0 - spread) * mu, mu, (1.0 + spread) * mu},
                          {side_weight, 1.0 - 2.0 * side_weight, side_weight});
}

double effective_rate(const ServiceRateChain& chain) {
  double mean = 0.0;
  for (std::size_t k = 0; k < chain.size(); ++k) mean += chain.probs()[k] * chain.levels()[k];
  // Guard the [min, max] postcondition against rounding.
  return std::clamp(mean, chain.levels().front(), chain.levels().back());
}

std::vector<double> cdf(const ServiceRateChain& chain) {
  std::vector<double> out(chain.size());
  std::partial_sum(chain.probs().begin(), chain.probs().end(), out.begin());
  for (double& v : out) v = std::min(v, 1.0);
  out.back() = 1.0;
  return out;
}

const char* to_string(Dominance d) noexcept {
  switch (d) {
    case Dominance::XDominates: return "XDominates";
    case Dominance::YDominates: return "YDominates";
    case Dominance::NoDominance: return "NoDominance";
  }
  return "?";
}

Dominance fsd_compare_cdfs(std::span<const double> fx, std::span<const double> fy) {
  if (fx.empty() || fx.size() != fy.size())
    throw IncompatibleGrids("CDFs must be evaluated on the same nonempty grid");
  bool x_le = true, y_le = true, x_strict = false, y_strict = false;
  for (std::size_t k = 0; k < fx.size(); ++k) {
    const double diff = fx[k] - fy[k];
    if (diff > kCompareTol) x_le = false;
    if (diff < -kCompareTol) y_le = false;
    if (diff < -kCompareTol) x_strict = true;
    if (diff > kCompareTol) y_strict = true;
  }
  if (x_le && x_strict) return Dominance::XDominates;
  if (y_le && y_strict) return Dominance::YDominates;
  return Dominance::NoDominance;
}

Dominance fsd_compare(const ServiceRateChain& x, const ServiceRateChain& y) {
  if (std::ranges::equal(x.levels(), y.levels())) {
    const auto fx = cdf(x);
    const auto fy = cdf(y);
    return fsd_compare_cdfs(fx, fy);
  }
  std::vector<double> grid(x.levels().begin(), x.levels().end());
  grid.insert(grid.end(), y.levels().begin(), y.levels().end());
  std::ranges::sort(grid);
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<double> fx, fy;
  fx.reserve(grid.size());
  fy.reserve(grid.size());
  for (double m : grid) {
    fx.push_back(step_cdf(x, m));
    fy.push_back(step_cdf(y, m));
  }
  return fsd_compare_cdfs(fx, fy);
}

double icd_event_rate(double lambda) {
  if (!(lambda > 0.0)) throw NonpositiveRate("arrival rate must be positive");
  return 2.0 * lambda;
}

double icd_time(double lambda) { return 1.0 / icd_event_rate(lambda); }

void QueueParams::validate() const {
  if (!(lambda > 0.0)) throw NonpositiveRate("lambda must be positive");
  if (!(mu_min > 0.0)) throw NonpositiveRate("mu_min must be positive");
  if (!(mu_min <= mu_max)) throw InvalidParams("mu_min must not exceed mu_max");
  if (!(mu >= mu_min && mu <= mu_max)) throw InvalidParams("mu outside [mu_min, mu_max]");
  if (!(lambda < mu)) throw UnstableQueue("stability requires lambda < mu");
}

std::size_t geometric_truncation(double rho, double tail) {
  if (rho <= 0.0) return 0;
  // rho^(N+1) < tail  <=>  N + 1 > log(tail) / log(rho)
  auto n = static_cast<std::size_t>(std::max(0.0, std::floor(std::log(tail) / std::log(rho))));
  while (n > 0 && std::pow(rho, static_cast<double>(n)) < tail) --n;
  while (!(std::pow(rho, static_cast<double>(n + 1)) < tail)) ++n;
  return n;
}

StationaryLengthDist::StationaryLengthDist(double rho) : rho_(rho), truncation_(0) {
  if (!(rho >= 0.0 && rho < 1.0)) throw UnstableQueue("utilization must lie in [0, 1)");
  truncation_ = geometric_truncation(rho_);
}

double StationaryLengthDist::prob(std::size_t n) const noexcept {
  return (1.0 - rho_) * std::pow(rho_, static_cast<double>(n));
}

double StationaryLengthDist::tail_after(std::size_t n) const noexcept {
  return std::pow(rho_, static_cast<double>(n + 1));
}

StationaryLengthDist stationary_length_dist(double lambda, double mu) {
  if (!(mu > 0.0)) throw NonpositiveRate("service rate must be positive");
  if (!(lambda >= 0.0)) throw NonpositiveRate("arrival rate must be nonnegative");
  if (!(lambda < mu)) throw UnstableQueue("stability requires lambda < mu");
  return StationaryLengthDist(lambda / mu);
}

StationaryLengthDist stationary_length_dist(const QueueParams& params) {
  return stationary_length_dist(params.lambda, params.mu);
}

}  // namespace bq
