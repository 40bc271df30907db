#include "modlik/rng.hpp"

#include <cmath>
#include <numbers>

namespace modlik {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t k) noexcept {
  constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  return mix64(base ^ mix64(k + kGolden));
}

NormalStream::NormalStream(std::uint64_t seed) : engine_(seed) {}

// Uniform on the open interval (0, 1) with 53-bit resolution.
double NormalStream::uniform_open() {
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double NormalStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::vector<double> NormalStream::draw(std::size_t n) {
  std::vector<double> out(n);
  for (auto& v : out) v = next();
  return out;
}

}  // namespace modlik
