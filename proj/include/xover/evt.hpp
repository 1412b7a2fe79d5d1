#pragma once

// Closed-form predictors for Gaussian minimum order statistics and for the
// cost distribution of crossover offspring.
//
// "log" is the natural logarithm throughout. Asymptotic forms whose log
// arguments or variances leave their valid range raise asymptotics_error
// instead of returning clamped or complex values.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

#include "xover/combinatorics.hpp"

namespace xover {

/// The large-M approximation behind a predictor does not hold at this M.
class asymptotics_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct GaussianSpec {
  double mean = 0.0;
  double variance = 1.0;

  double stddev() const { return std::sqrt(variance); }
};

enum class MinForm { exact, approximate };

struct TheoryParams {
  double eta = 0.0;
  double gain = 1.0;    // (2 eta + sqrt(1 - eta))^2
  double lambda = 2.0;  // 2^(1 / gain)
  int d = 0;            // floor(N / 2)
  int n_dims = 0;

  /// Total evaluations to reach the approximate global minimum: 3 lambda^N.
  double predicted_total_cost() const { return 3.0 * std::pow(lambda, n_dims); }
};

struct MixturePrediction {
  double offspring_mean = 0.0;      // R
  double offspring_variance = 1.0;  // 1 - R^2
  double min_estimate = 0.0;        // R - sqrt((1 - R^2) 2 log M)
};

/// Standard normal CDF via std::erfc (relative error near machine precision).
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

namespace detail {

inline void check_gaussian(const GaussianSpec& g, const char* who) {
  if (!(g.variance >= 0.0) || !std::isfinite(g.mean) || !std::isfinite(g.variance))
    throw std::invalid_argument(std::string(who) + ": variance must be finite and >= 0");
}

// log(M^2 / (2 pi log(M^2 s2))); s2 = 1 gives the form used for offspring.
inline double laplace_log_term(double m, double s2, const char* who) {
  const double inner = std::log(m * m * s2);
  if (!(inner > 0.0)) throw asymptotics_error(std::string(who) + ": log(M^2 sigma^2) <= 0");
  return std::log(m * m / (2.0 * std::numbers::pi * inner));
}

}  // namespace detail

/// Laplace approximation to the distribution of the minimum of M i.i.d. draws
/// from `base`. The exact form centres on the mode of the min-density and takes
/// its variance from the curvature there; the approximate form is the leading
/// order sqrt(2 log M) expansion.
inline GaussianSpec min_distribution(const GaussianSpec& base, std::uint64_t m, MinForm form = MinForm::exact) {
  detail::check_gaussian(base, "min_distribution");
  if (m < 2) throw std::invalid_argument("min_distribution: need M >= 2");
  const double mm = static_cast<double>(m);
  const double s2 = base.variance;
  const double s = std::sqrt(s2);
  if (form == MinForm::approximate) {
    const double two_log_m = 2.0 * std::log(mm);
    return {base.mean - s * std::sqrt(two_log_m), s2 / two_log_m};
  }
  const double l = detail::laplace_log_term(mm, s2, "min_distribution");
  if (!(l > 1.0)) throw asymptotics_error("min_distribution: M too small for the exact form (variance not positive)");
  return {base.mean - s * std::sqrt(l), s2 / (l - 1.0)};
}

/// Draws from `base` needed to reach `target` with probability about 1/2.
inline double required_iterations(double target, const GaussianSpec& base) {
  detail::check_gaussian(base, "required_iterations");
  if (!(target < base.mean)) throw std::domain_error("required_iterations: target must lie below the mean");
  if (!(base.variance > 0.0)) throw std::domain_error("required_iterations: zero-variance base");
  const double z2 = (target - base.mean) * (target - base.mean) / base.variance;
  return std::sqrt(2.0 * std::numbers::pi * z2) * std::exp(z2 / 2.0);
}

/// Minimum of 2^N unit-Gaussian draws: -sqrt(2 N log 2).
inline double global_min_estimate(int n_dims) {
  if (n_dims < 1) throw std::invalid_argument("global_min_estimate: n_dims must be positive");
  return -std::sqrt(2.0 * n_dims * std::numbers::ln2);
}

/// Schema strength: sum_{b=1..h} C(h, b) sigma_b^2 with h = floor(N/2).
/// order_variance[a - 1] holds sigma_a^2; missing trailing orders count as zero.
inline double eta(int n_dims, std::span<const double> order_variance) {
  if (n_dims < 1) throw std::invalid_argument("eta: n_dims must be positive");
  const int half = n_dims / 2;
  double s = 0.0;
  for (int b = 1; b <= half && b <= static_cast<int>(order_variance.size()); ++b)
    s += binomial_real(half, b) * order_variance[b - 1];
  return s;
}

/// Gain and per-dimension cost base for a given schema strength.
inline TheoryParams theory_params_from_eta(double eta_value, int n_dims) {
  if (!(eta_value >= 0.0 && eta_value <= 1.0)) throw std::invalid_argument("theory_params: eta must lie in [0, 1]");
  TheoryParams p;
  p.eta = eta_value;
  const double f = 2.0 * eta_value + std::sqrt(1.0 - eta_value);
  p.gain = f * f;
  p.lambda = std::exp2(1.0 / p.gain);
  p.n_dims = n_dims;
  p.d = n_dims / 2;
  return p;
}

inline TheoryParams theory_params(int n_dims, std::span<const double> order_variance) {
  return theory_params_from_eta(eta(n_dims, order_variance), n_dims);
}

/// Cost distribution of offspring of two parents, each the best of M draws.
inline GaussianSpec offspring_distribution(const TheoryParams& params, std::uint64_t m_parent) {
  if (m_parent < 2) throw std::invalid_argument("offspring_distribution: need M >= 2");
  const double l = detail::laplace_log_term(static_cast<double>(m_parent), 1.0, "offspring_distribution");
  if (!(l > 0.0)) throw asymptotics_error("offspring_distribution: M too small (log argument below 1)");
  return {-2.0 * params.eta * std::sqrt(l), 1.0 - params.eta};
}

/// Minimum of M offspring draws, with the parent pools also of size M.
inline GaussianSpec offspring_min_distribution(const TheoryParams& params, std::uint64_t m) {
  if (m < 2) throw std::invalid_argument("offspring_min_distribution: need M >= 2");
  const double l = detail::laplace_log_term(static_cast<double>(m), 1.0, "offspring_min_distribution");
  if (!(l > 1.0)) throw asymptotics_error("offspring_min_distribution: M too small (variance not positive)");
  const double f = 2.0 * params.eta + std::sqrt(1.0 - params.eta);
  return {-f * std::sqrt(l), (1.0 - params.eta) / (l - 1.0)};
}

/// Expected offspring cost variance for parents differing in d positions:
/// 1 - sum_{b=0..N-d} C(N-d, b) sigma_b^2, with sigma_0^2 = 0.
inline double predicted_offspring_variance(int n_dims, int d, std::span<const double> order_variance) {
  if (d < 0 || d > n_dims) throw std::invalid_argument("predicted_offspring_variance: need 0 <= d <= N");
  const int fixed = n_dims - d;
  double s = 0.0;
  for (int b = 1; b <= fixed && b <= static_cast<int>(order_variance.size()); ++b)
    s += binomial_real(fixed, b) * order_variance[b - 1];
  return 1.0 - s;
}

/// Offspring of an n-parent mixture with mean cost R.
inline MixturePrediction mixture_prediction(double big_r, std::uint64_t m) {
  if (!(std::abs(big_r) <= 1.0)) throw std::invalid_argument("mixture_prediction: need |R| <= 1");
  if (m < 1) throw std::invalid_argument("mixture_prediction: need M >= 1");
  MixturePrediction p;
  p.offspring_mean = big_r;
  p.offspring_variance = 1.0 - big_r * big_r;
  p.min_estimate = big_r - std::sqrt(p.offspring_variance * 2.0 * std::log(static_cast<double>(m)));
  return p;
}

/// Best achievable mixture estimate: -sqrt(1 + 2 log M), attained at R = -1/sqrt(1 + 2 log M).
inline double mixture_bound(std::uint64_t m) { return -std::sqrt(1.0 + 2.0 * std::log(static_cast<double>(m))); }

}  // namespace xover
