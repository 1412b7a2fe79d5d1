#pragma once

// Random multilinear cost functions over {-1, +1}^N.
//
// F(x) = sum over nonempty index tuples i_1 < ... < i_a of a_{i_1..i_a} x_{i_1}...x_{i_a},
// with coefficients of order a drawn i.i.d. from N(0, sigma_a^2) and
// sum_a C(N, a) sigma_a^2 = 1. There is no constant term.
//
// Coefficient storage is dense: order blocks in ascending order, each block
// indexed by the colexicographic rank of its tuple. Within an order block the
// tuples whose largest index is `top` occupy ranks [C(top, a), C(top + 1, a)),
// and the remaining (a - 1)-tuple is itself colex-ranked inside that range. With
// the order-(a - 1) products of x laid out in the same colex order, the order-a
// part of F is sum_top x_top * dot(block_top, products), one contiguous dot
// product per (order, top).

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "xover/combinatorics.hpp"
#include "xover/rng.hpp"

namespace xover {

/// Upper bound on the dense coefficient table (memory budget for the table and flip index).
inline constexpr std::uint64_t kMaxCoefficients = std::uint64_t{1} << 18;

/// Largest N accepted by exhaustive_min unless the caller raises it.
inline constexpr int kDefaultExhaustiveCap = 20;

/// Tolerance on sum_a C(N, a) sigma_a^2 = 1.
inline constexpr double kNormalizationTolerance = 1e-12;

/// A point of {-1, +1}^N.
class State {
 public:
  State() = default;

  explicit State(std::vector<std::int8_t> spins) : spins_(std::move(spins)) {
    if (spins_.size() > static_cast<std::size_t>(kMaxDims))
      throw std::invalid_argument("State: more entries than kMaxDims");
    for (auto s : spins_)
      if (s != 1 && s != -1) throw std::invalid_argument("State: entries must be -1 or +1");
  }

  /// Bit i set means x_i = +1.
  static State from_mask(std::uint64_t mask, int n) {
    std::vector<std::int8_t> spins(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) spins[i] = ((mask >> i) & 1u) ? 1 : -1;
    return State(std::move(spins));
  }

  /// All entries equal to `value`.
  static State filled(int n, std::int8_t value) {
    return State(std::vector<std::int8_t>(static_cast<std::size_t>(n), value));
  }

  std::uint64_t mask() const noexcept {
    std::uint64_t m = 0;
    for (std::size_t i = 0; i < spins_.size(); ++i)
      if (spins_[i] > 0) m |= std::uint64_t{1} << i;
    return m;
  }

  int size() const noexcept { return static_cast<int>(spins_.size()); }
  std::int8_t operator[](int i) const { return spins_[static_cast<std::size_t>(i)]; }
  std::span<const std::int8_t> spins() const noexcept { return spins_; }

  void flip(int i) {
    if (i < 0 || i >= size()) throw std::out_of_range("State::flip: index out of range");
    spins_[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(-spins_[static_cast<std::size_t>(i)]);
  }

  State flipped(int i) const {
    State s = *this;
    s.flip(i);
    return s;
  }

  State operator-() const {
    State s = *this;
    for (auto& v : s.spins_) v = static_cast<std::int8_t>(-v);
    return s;
  }

  friend bool operator==(const State&, const State&) = default;

 private:
  std::vector<std::int8_t> spins_;
};

/// Order variances for a K-th order function: sigma_1^2 = ... = sigma_K^2, zero above K,
/// normalized so that sum_a C(N, a) sigma_a^2 = 1.
inline std::vector<double> uniform_order_variance(int n_dims, int max_order) {
  if (n_dims < 1) throw std::invalid_argument("uniform_order_variance: n_dims must be positive");
  if (max_order < 1 || max_order > n_dims)
    throw std::invalid_argument("uniform_order_variance: need 1 <= max_order <= n_dims");
  double total = 0.0;
  for (int a = 1; a <= max_order; ++a) total += binomial_real(n_dims, a);
  std::vector<double> v(static_cast<std::size_t>(n_dims), 0.0);
  for (int a = 1; a <= max_order; ++a) v[a - 1] = 1.0 / total;
  return v;
}

namespace detail {

inline std::array<double, kMaxDims> to_point(const State& x) {
  std::array<double, kMaxDims> p{};
  for (int i = 0; i < x.size(); ++i) p[i] = x[i];
  return p;
}

inline void mask_to_point(std::uint64_t mask, int n, double* out) {
  for (int i = 0; i < n; ++i) out[i] = ((mask >> i) & 1u) ? 1.0 : -1.0;
}

// Four partial sums keep the dependency chain short.
inline double dot_prefix(const double* a, const double* x, int len) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  int i = 0;
  for (; i + 4 <= len; i += 4) {
    s0 += a[i] * x[i];
    s1 += a[i + 1] * x[i + 1];
    s2 += a[i + 2] * x[i + 2];
    s3 += a[i + 3] * x[i + 3];
  }
  for (; i < len; ++i) s0 += a[i] * x[i];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace detail

/// Dense K-th order multilinear cost function. Immutable after construction.
class CostFunction {
 public:
  /// Draws every coefficient of order a from N(0, order_variance[a - 1]).
  /// max_order is the highest order with nonzero variance.
  static CostFunction sample(int n_dims, std::vector<double> order_variance, std::uint64_t seed) {
    int max_order = highest_order(order_variance);
    CostFunction cf(n_dims, max_order, std::move(order_variance), seed);
    Rng rng(seed);
    cf.coefficients_.resize(term_count(n_dims, max_order));
    for (int a = 1; a <= max_order; ++a) {
      double sd = std::sqrt(cf.order_variance_[a - 1]);
      for (std::size_t r = cf.order_offset_[a]; r < cf.order_offset_[a + 1]; ++r)
        cf.coefficients_[r] = sd * rng.normal();
    }
    cf.build_flip_index();
    return cf;
  }

  /// Wraps an explicit coefficient table (canonical order, orders 1..max_order).
  static CostFunction from_coefficients(int n_dims, int max_order, std::vector<double> order_variance,
                                        std::vector<double> coefficients, std::uint64_t seed = 0) {
    if (highest_order(order_variance) > max_order)
      throw std::invalid_argument("CostFunction: nonzero order variance above max_order");
    CostFunction cf(n_dims, max_order, std::move(order_variance), seed);
    if (coefficients.size() != term_count(n_dims, max_order))
      throw std::invalid_argument("CostFunction: coefficient count does not match (N, K)");
    cf.coefficients_ = std::move(coefficients);
    cf.build_flip_index();
    return cf;
  }

  int n_dims() const noexcept { return n_; }
  int max_order() const noexcept { return k_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::span<const double> order_variance() const noexcept { return order_variance_; }
  std::span<const double> coefficients() const noexcept { return coefficients_; }

  /// Start of the order-a block in the coefficient table (a in 1..K+1).
  std::size_t order_offset(int order) const { return order_offset_.at(static_cast<std::size_t>(order)); }

  /// Coefficient of a strictly increasing index tuple; zero for orders above K.
  double coefficient(std::span<const int> tuple) const {
    if (tuple.empty() || static_cast<int>(tuple.size()) > k_) return 0.0;
    for (std::size_t t = 0; t < tuple.size(); ++t) {
      if (tuple[t] < 0 || tuple[t] >= n_ || (t > 0 && tuple[t] <= tuple[t - 1]))
        throw std::invalid_argument("coefficient: tuple must be strictly increasing and in range");
    }
    return coefficients_[order_offset_[tuple.size()] + colex_rank(tuple)];
  }

  /// Multilinear extension at an arbitrary real point (length N).
  /// On {-1, +1}^N this is F itself; at the mean vector of an independent
  /// product distribution it is the distribution's mean cost.
  double value_at(std::span<const double> point) const;

  /// Sum of the terms containing variable i with x_i removed, i.e. dF/dx_i.
  double local_field_unchecked(const double* x, int i) const {
    double field = 0.0;
    for (int a = 1; a <= k_; ++a) {
      const FlipBlock& block = flip_blocks_[static_cast<std::size_t>(i * k_ + a - 1)];
      const std::uint32_t* rank = flip_ranks_.data() + block.begin;
      const std::uint8_t* other = flip_others_.data() + block.others_begin;
      const int others = a - 1;
      for (std::uint32_t e = 0; e < block.count; ++e, other += others) {
        double p = coefficients_[rank[e]];
        for (int t = 0; t < others; ++t) p *= x[other[t]];
        field += p;
      }
    }
    return field;
  }

  /// Terms containing variable i of the given order: coefficient ranks and
  /// the other (order - 1) indices of each term, flattened.
  struct TermsOf {
    std::span<const std::uint32_t> ranks;
    std::span<const std::uint8_t> others;
  };

  TermsOf terms_of(int i, int order) const {
    const FlipBlock& block = flip_blocks_[static_cast<std::size_t>(i * k_ + order - 1)];
    return {std::span(flip_ranks_).subspan(block.begin, block.count),
            std::span(flip_others_).subspan(block.others_begin, std::size_t{block.count} * (order - 1))};
  }

 private:
  struct FlipBlock {
    std::uint32_t begin = 0;
    std::uint32_t count = 0;
    std::uint32_t others_begin = 0;
  };

  static int highest_order(std::span<const double> order_variance) {
    int k = 0;
    for (std::size_t a = 0; a < order_variance.size(); ++a)
      if (order_variance[a] != 0.0) k = static_cast<int>(a) + 1;
    return k;
  }

  CostFunction(int n_dims, int max_order, std::vector<double> order_variance, std::uint64_t seed)
      : n_(n_dims), k_(max_order), seed_(seed), order_variance_(std::move(order_variance)) {
    if (n_ < 1 || n_ > kMaxDims)
      throw std::invalid_argument("CostFunction: n_dims must lie in [1, " + std::to_string(kMaxDims) + "]");
    if (k_ < 1 || k_ > n_) throw std::invalid_argument("CostFunction: need 1 <= max_order <= n_dims");
    if (order_variance_.size() != static_cast<std::size_t>(n_))
      throw std::invalid_argument("CostFunction: order_variance must have n_dims entries");
    double total = 0.0;
    for (int a = 1; a <= n_; ++a) {
      double v = order_variance_[a - 1];
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("CostFunction: negative order variance");
      total += static_cast<double>(binomial(n_, a)) * v;
    }
    if (std::abs(total - 1.0) > kNormalizationTolerance)
      throw std::invalid_argument("CostFunction: order variances violate sum C(N,a) sigma_a^2 = 1");
    if (term_count(n_, k_) > kMaxCoefficients)
      throw std::invalid_argument("CostFunction: coefficient table exceeds the memory budget");
    order_offset_.assign(static_cast<std::size_t>(k_) + 2, 0);
    for (int a = 1; a <= k_; ++a) order_offset_[a + 1] = order_offset_[a] + binomial(n_, a);
  }

  void build_flip_index() {
    std::vector<std::vector<std::uint32_t>> ranks(static_cast<std::size_t>(n_ * k_));
    std::vector<std::vector<std::uint8_t>> others(static_cast<std::size_t>(n_ * k_));
    std::vector<int> tuple;
    for (int a = 1; a <= k_; ++a) {
      tuple.assign(static_cast<std::size_t>(a), 0);
      const std::uint64_t count = binomial(n_, a);
      for (std::uint64_t r = 0; r < count; ++r) {
        colex_unrank(r, tuple);
        for (int pos = 0; pos < a; ++pos) {
          auto slot = static_cast<std::size_t>(tuple[pos] * k_ + a - 1);
          ranks[slot].push_back(static_cast<std::uint32_t>(order_offset_[a] + r));
          for (int q = 0; q < a; ++q)
            if (q != pos) others[slot].push_back(static_cast<std::uint8_t>(tuple[q]));
        }
      }
    }
    flip_blocks_.resize(ranks.size());
    for (std::size_t s = 0; s < ranks.size(); ++s) {
      flip_blocks_[s] = {static_cast<std::uint32_t>(flip_ranks_.size()), static_cast<std::uint32_t>(ranks[s].size()),
                         static_cast<std::uint32_t>(flip_others_.size())};
      flip_ranks_.insert(flip_ranks_.end(), ranks[s].begin(), ranks[s].end());
      flip_others_.insert(flip_others_.end(), others[s].begin(), others[s].end());
    }
  }

  int n_ = 0;
  int k_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> order_variance_;
  std::vector<double> coefficients_;
  std::vector<std::size_t> order_offset_;  // order_offset_[a] = start of order a, a in 1..K+1

  std::vector<FlipBlock> flip_blocks_;  // per (variable, order)
  std::vector<std::uint32_t> flip_ranks_;
  std::vector<std::uint8_t> flip_others_;
};

/// Evaluation workspace for one cost function: holds the colex-ordered
/// products of x up to order K - 1. Cheap to call repeatedly; one per thread.
/// Every evaluation path in the library goes through this class, so values
/// for the same point are bit-identical wherever they are computed.
class Evaluator {
 public:
  explicit Evaluator(const CostFunction& cf) : cf_(&cf) {
    const int n = cf.n_dims();
    product_offset_.assign(static_cast<std::size_t>(std::max(cf.max_order(), 2)), 0);
    std::size_t total = 0;
    for (int b = 2; b < cf.max_order(); ++b) {
      product_offset_[b] = total;
      total += binomial(n, b);
    }
    products_.resize(total);
  }

  /// F at a point of length N (any real point: the multilinear extension).
  double operator()(const double* x) {
    const int n = cf_->n_dims();
    const int k = cf_->max_order();
    const double* a = cf_->coefficients().data();
    for (int b = 2; b < k; ++b) {
      double* out = products_.data() + product_offset_[b];
      const double* lower = order_products(b - 1, x);
      for (int top = b - 1; top < n; ++top) {
        const double xt = x[top];
        const std::size_t len = binomial(top, b - 1);
        double* block = out + binomial(top, b);
        for (std::size_t r = 0; r < len; ++r) block[r] = xt * lower[r];
      }
    }
    double s = detail::dot_prefix(a + cf_->order_offset(1), x, n);
    for (int order = 2; order <= k; ++order) {
      const double* coef = a + cf_->order_offset(order);
      const double* lower = order_products(order - 1, x);
      double part = 0.0;
      for (int top = order - 1; top < n; ++top)
        part += x[top] * detail::dot_prefix(coef + binomial(top, order), lower,
                                            static_cast<int>(binomial(top, order - 1)));
      s += part;
    }
    return s;
  }

  double operator()(std::span<const double> point) {
    if (point.size() != static_cast<std::size_t>(cf_->n_dims()))
      throw std::invalid_argument("Evaluator: point length does not match n_dims");
    return (*this)(point.data());
  }

 private:
  const double* order_products(int b, const double* x) const {
    return b == 1 ? x : products_.data() + product_offset_[b];
  }

  const CostFunction* cf_;
  std::vector<double> products_;  // orders 2..K-1
  std::vector<std::size_t> product_offset_;
};

inline double CostFunction::value_at(std::span<const double> point) const { return Evaluator(*this)(point); }

/// K-th order function with equal variances on orders 1..K.
inline CostFunction sample_cost_function(int n_dims, int max_order, std::uint64_t seed) {
  if (n_dims < 1 || n_dims > kMaxDims)
    throw std::invalid_argument("sample_cost_function: n_dims must lie in [1, " + std::to_string(kMaxDims) + "]");
  if (max_order < 1 || max_order > n_dims)
    throw std::invalid_argument("sample_cost_function: need 1 <= max_order <= n_dims");
  return CostFunction::sample(n_dims, uniform_order_variance(n_dims, max_order), seed);
}

inline double evaluate(const CostFunction& cf, const State& x) {
  if (x.size() != cf.n_dims()) throw std::invalid_argument("evaluate: state length does not match n_dims");
  auto p = detail::to_point(x);
  return Evaluator(cf)(p.data());
}

/// F(x with bit i flipped) - F(x) = -2 x_i dF/dx_i.
inline double flip_delta(const CostFunction& cf, const State& x, int i) {
  if (x.size() != cf.n_dims()) throw std::invalid_argument("flip_delta: state length does not match n_dims");
  if (i < 0 || i >= cf.n_dims()) throw std::out_of_range("flip_delta: index out of range");
  auto p = detail::to_point(x);
  return -2.0 * p[i] * cf.local_field_unchecked(p.data(), i);
}

struct ExactMinimum {
  State state;
  double value = 0.0;
};

/// Exact global minimum by reflected Gray-code traversal of all 2^N states,
/// starting from all -1. Each step applies one flip_delta; the first state
/// reaching a new strict minimum wins ties. The reported value is recomputed
/// from scratch at the minimizer.
inline ExactMinimum exhaustive_min(const CostFunction& cf, int cap = kDefaultExhaustiveCap) {
  const int n = cf.n_dims();
  if (n > cap) throw std::invalid_argument("exhaustive_min: n_dims exceeds the exhaustive cap");
  std::array<double, kMaxDims> x{};
  std::fill_n(x.begin(), n, -1.0);
  std::uint64_t mask = 0;
  double value = Evaluator(cf)(x.data());
  double best = value;
  std::uint64_t best_mask = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t step = 1; step < total; ++step) {
    const int i = std::countr_zero(step);
    value += -2.0 * x[i] * cf.local_field_unchecked(x.data(), i);
    x[i] = -x[i];
    mask ^= std::uint64_t{1} << i;
    if (value < best) {
      best = value;
      best_mask = mask;
    }
  }
  ExactMinimum result{State::from_mask(best_mask, n), 0.0};
  result.value = evaluate(cf, result.state);
  return result;
}

// Serialization: a line-oriented text format. Reals are written as C99 hex
// floats, so a write/read cycle is value-exact.
//
//   xover-cost-function 1
//   n_dims <N>
//   max_order <K>
//   seed <u64>
//   order_variance <N hexfloats>
//   coefficients <count>
//   <one hexfloat per line, canonical order>

inline constexpr int kCostFunctionFormatVersion = 1;

namespace detail {

inline std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline double parse_real(const std::string& token) {
  char* end = nullptr;
  double v = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size())
    throw std::runtime_error("cost function file: bad real '" + token + "'");
  return v;
}

inline void expect_key(std::istream& in, const char* key) {
  std::string got;
  if (!(in >> got) || got != key)
    throw std::runtime_error(std::string("cost function file: expected '") + key + "', got '" + got + "'");
}

}  // namespace detail

inline void write_cost_function(std::ostream& out, const CostFunction& cf) {
  out << "xover-cost-function " << kCostFunctionFormatVersion << '\n';
  out << "n_dims " << cf.n_dims() << '\n';
  out << "max_order " << cf.max_order() << '\n';
  out << "seed " << cf.seed() << '\n';
  out << "order_variance";
  for (double v : cf.order_variance()) out << ' ' << detail::hexfloat(v);
  out << '\n';
  out << "coefficients " << cf.coefficients().size() << '\n';
  for (double a : cf.coefficients()) out << detail::hexfloat(a) << '\n';
}

inline CostFunction read_cost_function(std::istream& in) {
  detail::expect_key(in, "xover-cost-function");
  int version = 0;
  if (!(in >> version) || version != kCostFunctionFormatVersion)
    throw std::runtime_error("cost function file: unsupported format version");
  int n = 0, k = 0;
  std::uint64_t seed = 0;
  detail::expect_key(in, "n_dims");
  if (!(in >> n) || n < 1 || n > kMaxDims) throw std::runtime_error("cost function file: bad n_dims");
  detail::expect_key(in, "max_order");
  if (!(in >> k) || k < 1 || k > n) throw std::runtime_error("cost function file: bad max_order");
  detail::expect_key(in, "seed");
  if (!(in >> seed)) throw std::runtime_error("cost function file: bad seed");
  detail::expect_key(in, "order_variance");
  std::vector<double> variance(static_cast<std::size_t>(n));
  std::string token;
  for (auto& v : variance) {
    if (!(in >> token)) throw std::runtime_error("cost function file: truncated order_variance");
    v = detail::parse_real(token);
  }
  detail::expect_key(in, "coefficients");
  std::size_t count = 0;
  if (!(in >> count) || count != term_count(n, k)) throw std::runtime_error("cost function file: bad coefficient count");
  std::vector<double> coefficients(count);
  for (auto& a : coefficients) {
    if (!(in >> token)) throw std::runtime_error("cost function file: truncated coefficient table");
    a = detail::parse_real(token);
  }
  return CostFunction::from_coefficients(n, k, std::move(variance), std::move(coefficients), seed);
}

}  // namespace xover
