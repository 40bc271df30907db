#include "modlik/model.hpp"

#include <cmath>
#include <sstream>

#include "modlik/errors.hpp"
#include "modlik/rng.hpp"
#include "modlik/stats.hpp"

namespace modlik {

namespace {

constexpr double kStandardizedTolerance = 1e-12;

}  // namespace

SignalModel::SignalModel(std::vector<double> values, std::string description)
    : values_(std::move(values)), description_(std::move(description)) {
  if (values_.empty()) throw InvalidArgument("signal: need at least one channel");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
      std::ostringstream msg;
      msg << "signal: F must be finite and > 0, channel " << i << " has " << values_[i];
      throw InvalidArgument(msg.str());
    }
  }
}

Spectrum::Spectrum(std::vector<double> counts) : counts_(std::move(counts)) {
  if (counts_.empty()) throw InvalidArgument("spectrum: need at least one channel");
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (!std::isfinite(counts_[i])) {
      throw InvalidArgument("spectrum: count at channel " + std::to_string(i) + " is not finite");
    }
  }
}

NoiseSequence::NoiseSequence(std::vector<double> values, std::optional<std::uint64_t> seed,
                             bool standardized)
    : values_(std::move(values)), seed_(seed), standardized_(standardized) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("noise: values must be finite");
  }
  if (standardized_) {
    if (values_.size() < 2) throw InvalidArgument("noise: standardized sequence needs n >= 2");
    const double m = stats::mean(values_);
    const double s = stats::sample_std(values_);
    if (std::abs(m) > kStandardizedTolerance || std::abs(s - 1.0) > kStandardizedTolerance) {
      throw InvalidArgument("noise: sequence flagged standardized but mean/std are not 0/1");
    }
  }
}

NoiseSequence NoiseSequence::zeros(std::size_t n) {
  return NoiseSequence(std::vector<double>(n, 0.0), std::nullopt, false);
}

SignalModel make_sinusoid_signal(const SinusoidParams& params) {
  if (params.channels == 0) throw InvalidArgument("channels: must be >= 1");
  if (params.scale == 0.0 || !std::isfinite(params.scale)) {
    throw InvalidArgument("scale: must be finite and nonzero");
  }
  if (!std::isfinite(params.amplitude) || !std::isfinite(params.offset)) {
    throw InvalidArgument("amplitude/offset: must be finite");
  }

  std::vector<double> values(params.channels);
  for (std::size_t i = 0; i < params.channels; ++i) {
    const double x = static_cast<double>(i);
    values[i] = params.amplitude * std::sin(x / params.scale) + params.offset;
    if (!(values[i] > 0.0)) {
      std::ostringstream msg;
      msg << "channels: sinusoid is not positive at channel " << i << " (F = " << values[i]
          << "); reduce channels or raise offset";
      throw InvalidArgument(msg.str());
    }
  }

  std::ostringstream desc;
  desc.precision(17);
  desc << "sinusoid a=" << params.amplitude << " b=" << params.offset << " s=" << params.scale
       << " n=" << params.channels;
  return SignalModel(std::move(values), desc.str());
}

NoiseSequence gaussian_sequence(std::uint64_t seed, std::size_t n, bool standardize) {
  if (n == 0) throw InvalidArgument("noise: n must be >= 1");
  if (standardize && n < 2) throw InvalidArgument("noise: standardize requires n >= 2");

  NormalStream stream(seed);
  std::vector<double> values = stream.draw(n);

  if (standardize) {
    const double m = stats::mean(values);
    const double s = stats::sample_std(values);
    if (!(s > 0.0)) throw NumericalError("noise: degenerate draw with zero sample std");
    for (auto& v : values) v = (v - m) / s;
  }
  return NoiseSequence(std::move(values), seed, standardize);
}

Spectrum synthesize_spectrum(const SignalModel& signal, double alpha, const NoiseSequence& noise) {
  if (noise.size() != signal.size()) {
    throw InvalidArgument("synthesize: noise length " + std::to_string(noise.size()) +
                          " != signal length " + std::to_string(signal.size()));
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha: must be > 0");

  std::vector<double> counts(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const double expected = alpha * signal[i];
    counts[i] = expected + noise[i] * std::sqrt(expected);
  }
  return Spectrum(std::move(counts));
}

}  // namespace modlik
