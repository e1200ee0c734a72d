#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace lexigp {

// Median of a scratch buffer (reordered in place). Even-length inputs take
// the midpoint of the two central order statistics; std::midpoint avoids
// overflow when both are near the worst-error sentinel.
inline double median_destructive(std::vector<double>& v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (n % 2 == 0) {
    const double lower = *std::max_element(v.begin(), mid);
    m = std::midpoint(lower, m);
  }
  return m;
}

inline double median_of(std::span<const double> values) {
  std::vector<double> scratch(values.begin(), values.end());
  return median_destructive(scratch);
}

// Median absolute deviation: median(|x - median(x)|).
inline double mad_of(std::span<const double> values) {
  std::vector<double> scratch(values.begin(), values.end());
  const double center = median_destructive(scratch);
  for (double& x : scratch) x = std::abs(x - center);
  return median_destructive(scratch);
}

}  // namespace lexigp
