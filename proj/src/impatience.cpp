#include "bq/impatience.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bq/errors.hpp"

namespace bq {

namespace {

constexpr double kQuadTol = 1e-9;

void require_rate(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw NonpositiveRate(std::string(what) + " must be positive");
}

// Erlang(order, rate) density at s >= 0.
double erlang_density(std::size_t order, double rate, double s) {
  if (s < 0.0) return 0.0;
  if (order == 1) return rate * std::exp(-rate * s);
  if (s == 0.0) return 0.0;
  const double n1 = static_cast<double>(order - 1);
  return rate * std::exp(n1 * std::log(rate * s) - rate * s - std::lgamma(n1 + 1.0));
}

}  // namespace

double poisson_term(std::size_t v, double x) noexcept {
  if (x <= 0.0) return v == 0 ? 1.0 : 0.0;
  const double dv = static_cast<double>(v);
  return std::exp(dv * std::log(x) - x - std::lgamma(dv + 1.0));
}

void BehaviorParams::validate() const {
  if (!(t_local > 0.0)) throw InvalidParams("t_local must be positive");
  if (!(d > 0.0)) throw InvalidParams("d must be positive");
  if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidParams("eta must lie in [0, 1]");
  if (!(r > 0.0)) throw InvalidParams("r must be positive");
}

double BehaviorParams::decay() const noexcept { return std::exp(-eta * r); }

double BehaviorParams::slack() const noexcept { return std::max(0.0, t_local - eta * r); }

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double sigmoid_derivative(double x) noexcept {
  const double s = sigmoid(x);
  return s * (1.0 - s);
}

double poisson_head_sum(std::size_t ell, double x) noexcept {
  if (ell == 0) return 0.0;
  if (x <= 0.0) return 1.0;
  double sum = 0.0;
  for (std::size_t v = 0; v < ell; ++v) sum += poisson_term(v, x);
  return std::min(sum, 1.0);
}

double expected_remaining(std::size_t ell, double mu) {
  require_rate(mu, "service rate");
  return static_cast<double>(ell) / mu;
}

double erlang_wait_cdf(std::size_t ell, double nu, double t) {
  require_rate(nu, "effective rate");
  if (ell == 0) return 1.0;
  if (t <= 0.0) return 0.0;
  return std::clamp(1.0 - poisson_head_sum(ell, nu * t), 0.0, 1.0);
}

double mixture_wait_cdf(const StationaryLengthDist& dist, double nu, double t) {
  require_rate(nu, "effective rate");
  double acc = 0.0;
  for (std::size_t n = 0; n <= dist.truncation(); ++n) acc += dist.prob(n) * erlang_wait_cdf(n, nu, t);
  return std::clamp(acc, 0.0, 1.0);
}

double renege_probability(std::size_t ell, double mu, double lambda, const BehaviorParams& bp) {
  if (!(mu > lambda)) throw UnstableQueue("renege probability needs mu > lambda");
  return poisson_head_sum(ell, (mu - lambda) * bp.slack());
}

double renege_rate_fsd(double lambda, double mu, const BehaviorParams& bp) {
  const auto dist = stationary_length_dist(lambda, mu);
  const double x = (mu - lambda) * bp.slack();
  // P(ell) = P(ell - 1) + x^(ell-1) e^{-x} / (ell-1)!, accumulated in one pass.
  double acc = 0.0;
  double head = 0.0;
  for (std::size_t ell = 1; ell <= dist.truncation(); ++ell) {
    head = std::min(1.0, head + poisson_term(ell - 1, x));
    acc += dist.prob(ell) * head;
  }
  return lambda * acc;
}

double renege_rate_icd(double lambda, double mu, const BehaviorParams& bp) {
  return renege_rate_fsd(lambda, mu, bp);
}

double jockey_probability_icd(double lambda_i, double lambda_j, const BehaviorParams& bp) {
  return sigmoid(2.0 * bp.d * bp.decay() * (lambda_i - lambda_j));
}

double jockey_rate_icd(double lambda_i, double lambda_j, const BehaviorParams& bp) {
  return lambda_i * jockey_probability_icd(lambda_i, lambda_j, bp) +
         lambda_j * jockey_probability_icd(lambda_j, lambda_i, bp);
}

double jockey_probability_fsd_numeric(std::size_t ell, std::size_t k, double xi_i, double xi_j,
                                      double shift) {
  require_rate(xi_i, "xi_i");
  require_rate(xi_j, "xi_j");
  if (ell == 0 || k == 0) throw InvalidParams("positions must be >= 1");
  if (!(shift >= 0.0)) throw InvalidParams("shift must be nonnegative");

  auto integrand = [&](double t) {
    const double s = t - shift;
    if (s < 0.0) return 0.0;
    return erlang_density(k, xi_j, s) * poisson_head_sum(ell, xi_i * s);
  };

  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  const double value = gauss_kronrod<double, 61>::integrate(
      integrand, shift, std::numeric_limits<double>::infinity(), 20, 1e-13, &error);
  if (!std::isfinite(value) || error > kQuadTol)
    throw QuadratureFailure("jockey integral did not converge (error estimate " +
                            std::to_string(error) + ")");
  return std::clamp(value, 0.0, 1.0);
}

double jockey_probability_fsd_closed(std::size_t ell, std::size_t /*k*/, double xi_i, double xi_j) {
  require_rate(xi_i, "xi_i");
  require_rate(xi_j, "xi_j");
  if (ell == 0) throw InvalidParams("position must be >= 1");
  const double l = static_cast<double>(ell);
  const double log_xj = std::log(xi_j);
  const double log_sum = std::log(xi_i + xi_j);
  double acc = 0.0;
  for (std::size_t m = 0; m < ell; ++m) {
    const double dm = static_cast<double>(m);
    acc += std::exp(l * log_xj - (l + dm) * log_sum + std::lgamma(l + dm) - std::lgamma(l) -
                    std::lgamma(dm + 1.0));
  }
  return acc;
}

double jockey_rate_fsd(double lambda_i, double lambda_j, double p_ij, double p_ji) {
  if (!(p_ij >= 0.0 && p_ij <= 1.0 && p_ji >= 0.0 && p_ji <= 1.0))
    throw InvalidParams("jockey probabilities must lie in [0, 1]");
  return lambda_i * p_ij + lambda_j * p_ji;
}

std::vector<ConformanceRow> conformance_report(const std::vector<std::size_t>& ells,
                                               const std::vector<std::size_t>& ks,
                                               const std::vector<double>& xis) {
  std::vector<ConformanceRow> rows;
  rows.reserve(ells.size() * ks.size() * xis.size() * xis.size());
  for (std::size_t ell : ells)
    for (std::size_t k : ks)
      for (double xi_i : xis)
        for (double xi_j : xis) {
          const double numeric = jockey_probability_fsd_numeric(ell, k, xi_i, xi_j, 0.0);
          const double closed = jockey_probability_fsd_closed(ell, k, xi_i, xi_j);
          rows.push_back({ell, k, xi_i, xi_j, numeric, closed, std::abs(numeric - closed)});
        }
  return rows;
}

}  // namespace bq
