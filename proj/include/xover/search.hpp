#pragma once

// Stochastic searchers over {-1, +1}^N: uniform random search, steepest-descent
// bit flipping, two-parent selection and crossover, and the n-parent mixture
// (mean-field) baseline.
//
// All sampling is with replacement. Ties in any pool are broken by the earliest
// draw, so a fixed seed fixes the result.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "xover/polycost.hpp"
#include "xover/rng.hpp"
#include "xover/stats.hpp"

namespace xover {

struct StageRecord {
  std::string label;
  double best_value = 0.0;
};

/// Offspring statistics accumulated inside a parent/offspring search: the
/// per-repeat sample mean and variance of offspring costs, averaged over repeats.
struct OffspringRunSummary {
  double mean = 0.0;
  double variance = 0.0;
  double realized_d = 0.0;  // mean number of non-schema positions
};

struct SearchResult {
  State best_state;
  double best_value = 0.0;
  std::uint64_t evaluations = 0;       // full cost-function evaluations
  std::uint64_t flip_evaluations = 0;  // single-variable flip deltas (descent only)
  std::vector<StageRecord> stage_trace;
  std::optional<OffspringRunSummary> offspring;
};

/// Offspring law of an n-parent crossover: P[z_i = +1] = rho_i = sum_k x_i^(k) / (2n) + 1/2.
struct CrossoverScheme {
  std::vector<double> rho;
  int n_parents = 0;
  std::vector<bool> schema_mask;  // rho_i in {0, 1}: every parent agrees at i
  int d = 0;                      // non-schema positions
};

namespace detail {

inline std::uint64_t low_mask(int n) { return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1; }

struct PoolBest {
  std::uint64_t mask = 0;
  double value = 0.0;
};

// Best of `m` uniform states (m >= 1).
inline PoolBest best_of_uniform(const CostFunction& cf, std::uint64_t m, Rng& rng) {
  const int n = cf.n_dims();
  const std::uint64_t bits = low_mask(n);
  std::array<double, kMaxDims> x{};
  Evaluator eval(cf);
  PoolBest best{0, std::numeric_limits<double>::infinity()};
  for (std::uint64_t t = 0; t < m; ++t) {
    const std::uint64_t mask = rng.bits() & bits;
    mask_to_point(mask, n, x.data());
    const double v = eval(x.data());
    if (v < best.value) best = {mask, v};
  }
  return best;
}

// Draws offspring masks from a scheme. Positions with rho = 1/2 take raw random
// bits; other fractional positions compare a uniform draw against rho.
class OffspringSampler {
 public:
  explicit OffspringSampler(const CrossoverScheme& scheme) {
    for (std::size_t i = 0; i < scheme.rho.size(); ++i) {
      const double r = scheme.rho[i];
      const std::uint64_t bit = std::uint64_t{1} << i;
      if (r == 1.0) {
        fixed_ones_ |= bit;
      } else if (r == 0.5) {
        half_ |= bit;
      } else if (r != 0.0) {
        biased_.emplace_back(static_cast<int>(i), r);
      }
    }
  }

  std::uint64_t draw(Rng& rng) const {
    std::uint64_t m = fixed_ones_;
    if (half_ != 0) m |= rng.bits() & half_;
    for (const auto& [i, r] : biased_)
      if (rng.uniform() < r) m |= std::uint64_t{1} << i;
    return m;
  }

 private:
  std::uint64_t fixed_ones_ = 0;
  std::uint64_t half_ = 0;
  std::vector<std::pair<int, double>> biased_;
};

}  // namespace detail

/// Best of m i.i.d. uniform states.
inline SearchResult random_search(const CostFunction& cf, std::uint64_t m, Rng& rng) {
  if (m < 1) throw std::invalid_argument("random_search: need m >= 1");
  const auto best = detail::best_of_uniform(cf, m, rng);
  SearchResult r;
  r.best_state = State::from_mask(best.mask, cf.n_dims());
  r.best_value = best.value;
  r.evaluations = m;
  r.stage_trace.push_back({"random", best.value});
  return r;
}

/// Steepest descent: flip the bit with the most negative flip delta (lowest
/// index on ties) until no flip lowers the cost. Local fields dF/dx_i are kept
/// up to date incrementally; each sweep over all N deltas adds N to
/// flip_evaluations. evaluations counts the full evaluation of x0 and, when the
/// state moved, of the final state.
inline SearchResult gradient_descent(const CostFunction& cf, const State& x0) {
  const int n = cf.n_dims();
  if (x0.size() != n) throw std::invalid_argument("gradient_descent: state length does not match n_dims");
  auto x = detail::to_point(x0);
  std::array<double, kMaxDims> field{};
  for (int i = 0; i < n; ++i) field[i] = cf.local_field_unchecked(x.data(), i);

  SearchResult r;
  double value = Evaluator(cf)(x.data());
  r.evaluations = 1;
  r.stage_trace.push_back({"start", value});
  for (;;) {
    r.flip_evaluations += static_cast<std::uint64_t>(n);
    int best_i = -1;
    double best_delta = 0.0;
    for (int i = 0; i < n; ++i) {
      const double delta = -2.0 * x[i] * field[i];
      if (delta < best_delta) {
        best_delta = delta;
        best_i = i;
      }
    }
    if (best_i < 0) break;
    const double xk = x[best_i];
    for (int a = 2; a <= cf.max_order(); ++a) {
      const auto terms = cf.terms_of(best_i, a);
      const auto coef = cf.coefficients();
      const std::uint8_t* other = terms.others.data();
      for (std::uint32_t rank : terms.ranks) {
        double p = coef[rank];
        for (int t = 0; t < a - 1; ++t) p *= x[other[t]];
        for (int t = 0; t < a - 1; ++t) field[other[t]] -= 2.0 * p * xk * x[other[t]];
        other += a - 1;
      }
    }
    x[best_i] = -xk;
    value += best_delta;
    r.stage_trace.push_back({"flip " + std::to_string(best_i), value});
  }

  std::vector<std::int8_t> spins(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) spins[i] = x[i] > 0 ? 1 : -1;
  r.best_state = State(std::move(spins));
  if (r.stage_trace.size() > 1) {
    r.best_value = evaluate(cf, r.best_state);
    ++r.evaluations;
  } else {
    r.best_value = value;
  }
  return r;
}

/// Best local minimum over `restarts` descents from uniform random starts.
inline SearchResult multistart_descent(const CostFunction& cf, std::uint64_t restarts, Rng& rng) {
  if (restarts < 1) throw std::invalid_argument("multistart_descent: need restarts >= 1");
  SearchResult best;
  best.best_value = std::numeric_limits<double>::infinity();
  const std::uint64_t bits = detail::low_mask(cf.n_dims());
  for (std::uint64_t t = 0; t < restarts; ++t) {
    auto run = gradient_descent(cf, State::from_mask(rng.bits() & bits, cf.n_dims()));
    best.evaluations += run.evaluations;
    best.flip_evaluations += run.flip_evaluations;
    if (run.best_value < best.best_value) {
      best.best_value = run.best_value;
      best.best_state = std::move(run.best_state);
      best.stage_trace.push_back({"restart " + std::to_string(t), best.best_value});
    }
  }
  return best;
}

inline CrossoverScheme make_crossover_scheme(std::span<const State> parents) {
  if (parents.size() < 2) throw std::invalid_argument("make_crossover_scheme: need at least two parents");
  const int n = parents.front().size();
  for (const auto& p : parents)
    if (p.size() != n) throw std::invalid_argument("make_crossover_scheme: parent lengths differ");
  CrossoverScheme s;
  s.n_parents = static_cast<int>(parents.size());
  s.rho.assign(static_cast<std::size_t>(n), 0.0);
  s.schema_mask.assign(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    int column = 0;
    for (const auto& p : parents) column += p[i];
    s.rho[i] = static_cast<double>(column) / (2.0 * s.n_parents) + 0.5;
    s.schema_mask[i] = s.rho[i] == 0.0 || s.rho[i] == 1.0;
    if (!s.schema_mask[i]) ++s.d;
  }
  return s;
}

inline State sample_offspring(const CrossoverScheme& scheme, Rng& rng) {
  return State::from_mask(detail::OffspringSampler(scheme).draw(rng), static_cast<int>(scheme.rho.size()));
}

struct OffspringStats {
  double mean = 0.0;
  double variance = 0.0;
};

/// Unbiased sample mean and variance of F over `samples` offspring.
inline OffspringStats offspring_statistics(const CostFunction& cf, const CrossoverScheme& scheme,
                                           std::uint64_t samples, Rng& rng) {
  if (samples < 2) throw std::invalid_argument("offspring_statistics: need samples >= 2");
  if (scheme.rho.size() != static_cast<std::size_t>(cf.n_dims()))
    throw std::invalid_argument("offspring_statistics: scheme length does not match n_dims");
  const detail::OffspringSampler sampler(scheme);
  std::array<double, kMaxDims> x{};
  Evaluator eval(cf);
  RunningStats stats;
  for (std::uint64_t t = 0; t < samples; ++t) {
    detail::mask_to_point(sampler.draw(rng), cf.n_dims(), x.data());
    stats.push(eval(x.data()));
  }
  return {stats.mean(), stats.variance()};
}

/// Exact mean offspring cost R: the multilinear extension at E[z_i] = 2 rho_i - 1.
inline double mixture_mean(const CostFunction& cf, const CrossoverScheme& scheme) {
  std::vector<double> m(scheme.rho.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = 2.0 * scheme.rho[i] - 1.0;
  return cf.value_at(m);
}

struct CrossoverConfig {
  std::uint64_t pool = 1000;
  std::uint64_t offspring_pool = 1000;
  std::uint64_t repeats = 333;
  /// Draw fresh parent pools on every repeat. When false, parents are selected
  /// once and only the offspring batch is repeated.
  bool refresh_parents = true;
};

struct MeanFieldConfig {
  int n_parents = 4;
  std::uint64_t pool = 1000;
  std::uint64_t offspring_pool = 1000;
  std::uint64_t repeats = 333;
  bool refresh_parents = true;
  /// Shrink each parent pool to floor(2 pool / n_parents) so the total matches
  /// the two-parent protocol with the same pool.
  bool match_budget = false;

  std::uint64_t effective_pool() const {
    return match_budget ? std::max<std::uint64_t>(1, 2 * pool / static_cast<std::uint64_t>(n_parents)) : pool;
  }
};

namespace detail {

// Per repeat: n_parents pools of `pool` uniform draws, each pool's minimizer a
// parent; `offspring_pool` offspring from the mixture; keep their minimizer.
inline SearchResult parent_offspring_search(const CostFunction& cf, int n_parents, std::uint64_t pool,
                                            std::uint64_t offspring_pool, std::uint64_t repeats,
                                            bool refresh_parents, Rng& rng) {
  if (pool < 1 || offspring_pool < 1 || repeats < 1)
    throw std::invalid_argument("crossover search: pool, offspring_pool and repeats must be >= 1");
  const int n = cf.n_dims();
  SearchResult r;
  r.best_value = std::numeric_limits<double>::infinity();
  std::uint64_t best_mask = 0;
  std::vector<State> parents(static_cast<std::size_t>(n_parents));
  RunningStats repeat_means, repeat_variances, realized_d;
  std::array<double, kMaxDims> x{};
  Evaluator eval(cf);

  for (std::uint64_t rep = 0; rep < repeats; ++rep) {
    if (rep == 0 || refresh_parents) {
      for (auto& p : parents) p = State::from_mask(best_of_uniform(cf, pool, rng).mask, n);
      r.evaluations += static_cast<std::uint64_t>(n_parents) * pool;
    }
    const auto scheme = make_crossover_scheme(parents);
    const OffspringSampler sampler(scheme);
    RunningStats offspring;
    std::uint64_t rep_best_mask = 0;
    double rep_best = std::numeric_limits<double>::infinity();
    for (std::uint64_t t = 0; t < offspring_pool; ++t) {
      const std::uint64_t mask = sampler.draw(rng);
      mask_to_point(mask, n, x.data());
      const double v = eval(x.data());
      offspring.push(v);
      if (v < rep_best) {
        rep_best = v;
        rep_best_mask = mask;
      }
    }
    r.evaluations += offspring_pool;
    repeat_means.push(offspring.mean());
    if (offspring.count() >= 2) repeat_variances.push(offspring.variance());
    realized_d.push(scheme.d);
    if (rep_best < r.best_value) {
      r.best_value = rep_best;
      best_mask = rep_best_mask;
    }
    r.stage_trace.push_back({"repeat " + std::to_string(rep), r.best_value});
  }
  r.best_state = State::from_mask(best_mask, n);
  r.offspring = OffspringRunSummary{repeat_means.mean(),
                                    repeat_variances.count() > 0 ? repeat_variances.mean()
                                                                 : std::numeric_limits<double>::quiet_NaN(),
                                    realized_d.mean()};
  return r;
}

}  // namespace detail

/// Two-parent selection and crossover. With refresh_parents the total cost is
/// repeats * (2 pool + offspring_pool).
inline SearchResult selection_crossover(const CostFunction& cf, const CrossoverConfig& config, Rng& rng) {
  return detail::parent_offspring_search(cf, 2, config.pool, config.offspring_pool, config.repeats,
                                         config.refresh_parents, rng);
}

/// Mixture of n >= 3 parents; same protocol as selection_crossover.
inline SearchResult mean_field_search(const CostFunction& cf, const MeanFieldConfig& config, Rng& rng) {
  if (config.n_parents < 3)
    throw std::invalid_argument("mean_field_search: need n_parents >= 3 (two parents is selection_crossover)");
  return detail::parent_offspring_search(cf, config.n_parents, config.effective_pool(), config.offspring_pool,
                                         config.repeats, config.refresh_parents, rng);
}

}  // namespace xover
