#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>

#ifndef XOVER_MAX_DIMS
#define XOVER_MAX_DIMS 30
#endif

namespace xover {

/// Largest supported number of ±1 variables (build-time configurable).
inline constexpr int kMaxDims = XOVER_MAX_DIMS;
static_assert(kMaxDims >= 1 && kMaxDims <= 62, "states are packed into 64-bit masks");

namespace detail {

inline constexpr int kBinomialRows = kMaxDims + 2;

constexpr auto make_binomial_table() {
  std::array<std::array<std::uint64_t, kBinomialRows>, kBinomialRows> table{};
  for (int n = 0; n < kBinomialRows; ++n) {
    table[n][0] = 1;
    for (int k = 1; k <= n; ++k) table[n][k] = table[n - 1][k - 1] + table[n - 1][k];
  }
  return table;
}

inline constexpr auto kBinomial = make_binomial_table();

}  // namespace detail

/// Exact binomial coefficient C(n, k); zero when k < 0 or k > n. Requires n ≤ 62.
constexpr std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (n < detail::kBinomialRows) return detail::kBinomial[n][k];
  if (n > 62) throw std::out_of_range("binomial: n > 62 overflows; use binomial_real");
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r / i * (n - k + i) + r % i * (n - k + i) / i;
  return r;
}

/// C(n, k) as a double, for arguments beyond the exact table.
inline double binomial_real(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  long double r = 1.0L;
  for (int i = 1; i <= k; ++i) r = r * static_cast<long double>(n - k + i) / i;
  return static_cast<double>(r);
}

/// Number of index tuples of order 1..max_order over n variables.
constexpr std::uint64_t term_count(int n, int max_order) {
  std::uint64_t total = 0;
  for (int a = 1; a <= max_order; ++a) total += binomial(n, a);
  return total;
}

/// Colexicographic rank of a strictly increasing tuple (combinatorial number system).
constexpr std::uint64_t colex_rank(std::span<const int> tuple) {
  std::uint64_t rank = 0;
  for (std::size_t t = 0; t < tuple.size(); ++t) rank += binomial(tuple[t], static_cast<int>(t) + 1);
  return rank;
}

/// Inverse of colex_rank: writes the tuple of size out.size() with the given rank.
constexpr void colex_unrank(std::uint64_t rank, std::span<int> out) {
  int candidate = 0;
  for (int t = static_cast<int>(out.size()); t >= 1; --t) {
    candidate = t - 1;
    while (binomial(candidate + 1, t) <= rank) ++candidate;
    rank -= binomial(candidate, t);
    out[t - 1] = candidate;
  }
}

}  // namespace xover
