#pragma once

#include <span>
#include <vector>

namespace modlik::stats {

// Arithmetic mean. Throws InvalidArgument on empty input.
double mean(std::span<const double> x);

// Standard deviation with denominator n-1. Requires n >= 2.
double sample_std(std::span<const double> x);

// Linearly interpolated quantile (Hyndman-Fan type 7), p in [0, 1].
double quantile(std::vector<double> x, double p);

}  // namespace modlik::stats
