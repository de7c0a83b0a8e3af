#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "ctree/error.hpp"

namespace ctree {

// Normal-approximation 95% interval.
inline constexpr double kZ95 = 1.96;

struct AggregateStats {
  double mean = 0.0;
  double ci95_half_width = 0.0;
  std::size_t n = 0;
};

/// Mean and 1.96 * s / sqrt(n), s the sample standard deviation.
inline AggregateStats aggregate(std::span<const double> values) {
  if (values.empty()) throw ValidationError("aggregate: no values");
  AggregateStats s;
  s.n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n == 1) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  const double sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  s.ci95_half_width = kZ95 * sd / std::sqrt(static_cast<double>(s.n));
  return s;
}

}  // namespace ctree
