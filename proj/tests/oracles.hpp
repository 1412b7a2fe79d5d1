#pragma once

// Slow reference implementations used only by tests. None of these call the
// library's ranking, evaluator or flip index.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "xover/polycost.hpp"

namespace oracle {

// Index subsets of size `order` as bit masks, in colex order. Colex order on
// k-subsets coincides with increasing numeric order of their masks.
inline std::vector<std::uint64_t> subsets(int n, int order) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m)
    if (std::popcount(m) == order) out.push_back(m);
  return out;
}

// Term list (subset mask, coefficient) read straight from the flat table.
struct Term {
  std::uint64_t subset;
  double coef;
};

inline std::vector<Term> terms(const xover::CostFunction& cf) {
  std::vector<Term> out;
  std::size_t pos = 0;
  const auto coef = cf.coefficients();
  for (int a = 1; a <= cf.max_order(); ++a)
    for (auto m : subsets(cf.n_dims(), a)) out.push_back({m, coef[pos++]});
  return out;
}

// Term-by-term sum over a state given as a +1 mask.
inline double evaluate(const std::vector<Term>& ts, std::uint64_t state_mask) {
  double s = 0.0;
  for (const auto& t : ts) {
    // product of x_i over the subset is (-1)^(number of -1 entries in it)
    const int minus = std::popcount(t.subset & ~state_mask);
    s += (minus & 1) ? -t.coef : t.coef;
  }
  return s;
}

inline double evaluate(const xover::CostFunction& cf, const xover::State& x) { return evaluate(terms(cf), x.mask()); }

struct Minimum {
  std::uint64_t mask = 0;
  double value = std::numeric_limits<double>::infinity();
};

// Full enumeration in plain numeric mask order with the naive evaluator.
inline Minimum enumerate_min(const xover::CostFunction& cf) {
  const auto ts = terms(cf);
  Minimum best;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << cf.n_dims()); ++m) {
    const double v = evaluate(ts, m);
    if (v < best.value) best = {m, v};
  }
  return best;
}

// Full enumeration with the library's (non-incremental) evaluate.
inline Minimum enumerate_min_library(const xover::CostFunction& cf) {
  Minimum best;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << cf.n_dims()); ++m) {
    const double v = xover::evaluate(cf, xover::State::from_mask(m, cf.n_dims()));
    if (v < best.value) best = {m, v};
  }
  return best;
}

// Multilinear extension evaluated term by term at a real point.
inline double extension(const xover::CostFunction& cf, const std::vector<double>& point) {
  double s = 0.0;
  for (const auto& t : terms(cf)) {
    double p = t.coef;
    for (int i = 0; i < cf.n_dims(); ++i)
      if ((t.subset >> i) & 1u) p *= point[i];
    s += p;
  }
  return s;
}

}  // namespace oracle
