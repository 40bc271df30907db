#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace modlik {

// Known reference signal F_i, one strictly positive intensity per channel.
class SignalModel {
 public:
  explicit SignalModel(std::vector<double> values, std::string description = {});

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::string& description() const noexcept { return description_; }

  bool operator==(const SignalModel&) const = default;

 private:
  std::vector<double> values_;
  std::string description_;
};

// Measured (or synthesized) counts m_i. Counts are real-valued and may be
// negative when produced by the Gaussian fluctuation model.
class Spectrum {
 public:
  explicit Spectrum(std::vector<double> counts);

  std::size_t size() const noexcept { return counts_.size(); }
  std::span<const double> counts() const noexcept { return counts_; }
  double operator[](std::size_t i) const { return counts_[i]; }

  bool operator==(const Spectrum&) const = default;

 private:
  std::vector<double> counts_;
};

// External Gaussian sequence bg_i. `seed` records provenance when the
// sequence was drawn by gaussian_sequence; sequences read from files or built
// by hand may have none.
class NoiseSequence {
 public:
  NoiseSequence(std::vector<double> values, std::optional<std::uint64_t> seed, bool standardized);

  static NoiseSequence zeros(std::size_t n);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::optional<std::uint64_t> seed() const noexcept { return seed_; }
  bool standardized() const noexcept { return standardized_; }

  bool operator==(const NoiseSequence&) const = default;

 private:
  std::vector<double> values_;
  std::optional<std::uint64_t> seed_;
  bool standardized_ = false;
};

// F(x) = amplitude * sin(x / scale) + offset, sampled at x = 0 .. channels-1.
// The defaults are the reference sinusoid 27 sin(x/32.3) + 17 over its first
// positive lobe (channel 124 onwards dips below zero).
struct SinusoidParams {
  double amplitude = 27.0;
  double offset = 17.0;
  double scale = 32.3;
  std::size_t channels = 124;

  bool operator==(const SinusoidParams&) const = default;
};

// Throws InvalidArgument if scale is zero, channels is zero, or any sampled
// value is not strictly positive (the message names the first such channel).
SignalModel make_sinusoid_signal(const SinusoidParams& params);

// n standard normal draws from `seed`. With standardize = true the draws are
// shifted and rescaled to sample mean 0 and sample std 1 (denominator n-1).
NoiseSequence gaussian_sequence(std::uint64_t seed, std::size_t n, bool standardize);

// m_i = alpha F_i + bg_i sqrt(alpha F_i). Negative results are kept as-is.
Spectrum synthesize_spectrum(const SignalModel& signal, double alpha, const NoiseSequence& noise);

}  // namespace modlik
