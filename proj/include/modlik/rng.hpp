#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace modlik {

// SplitMix64 finalizer. A bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Seed for the k-th child stream of `base`. For a fixed base this is
// injective in k, so growing a study never reshuffles earlier replicates.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t k) noexcept;

// Standard normal deviates from a seed.
//
// Uses std::mt19937_64 (output sequence fixed by the C++ standard) and the
// Box-Muller transform written out here, so that sequences do not depend on the
// standard library's unspecified std::normal_distribution algorithm.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed);

  double next();
  std::vector<double> draw(std::size_t n);

 private:
  double uniform_open();

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace modlik
