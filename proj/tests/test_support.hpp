// Shared helpers for the unit tests.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace zpfsim::testing {

/// Running mean with standard error of the mean.
struct MeanSe {
  double sum = 0.0;
  double sum2 = 0.0;
  std::size_t n = 0;

  void add(double x) {
    sum += x;
    sum2 += x * x;
    ++n;
  }
  double mean() const { return sum / static_cast<double>(n); }
  double se() const {
    const double m = mean();
    const double var = sum2 / static_cast<double>(n) - m * m;
    return std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
  }
};

inline bool within_se(double estimate, double expected, double se, double k = 4.0) {
  return std::abs(estimate - expected) <= k * se + 1e-15;
}

}  // namespace zpfsim::testing
