#include "modlik/stats.hpp"

#include <algorithm>
#include <cmath>

#include "modlik/errors.hpp"

namespace modlik::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("mean: empty input");
  double sum = 0.0;
  for (double v : x) sum += v;
  return sum / static_cast<double>(x.size());
}

double sample_std(std::span<const double> x) {
  if (x.size() < 2) throw InvalidArgument("sample_std: need at least two values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double quantile(std::vector<double> x, double p) {
  if (x.empty()) throw InvalidArgument("quantile: empty input");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile: p must lie in [0, 1]");
  std::sort(x.begin(), x.end());
  const double h = p * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

}  // namespace modlik::stats
