#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

namespace xover {

/// Welford one-pass mean and unbiased variance.
class RunningStats {
 public:
  void push(double v) noexcept {
    ++count_;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (v - mean_);
  }

  std::uint64_t count() const noexcept { return count_; }
  double mean() const noexcept { return mean_; }

  /// Unbiased (n - 1) variance; NaN below two samples.
  double variance() const noexcept {
    return count_ < 2 ? std::numeric_limits<double>::quiet_NaN() : m2_ / static_cast<double>(count_ - 1);
  }

  double stddev() const noexcept { return std::sqrt(variance()); }

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline RunningStats summarize(std::span<const double> values) {
  RunningStats s;
  for (double v : values) s.push(v);
  return s;
}

}  // namespace xover
