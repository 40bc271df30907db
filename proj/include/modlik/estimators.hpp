#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "modlik/model.hpp"

namespace modlik {

// How per-channel variances sigma_i^2 are chosen for the weighted sums.
//   measured: sigma_i^2 = max(m_i, floor)
//   model:    sigma_i^2 = alpha F_i (iterated to self-consistency in ls_estimate,
//             evaluated at the supplied alpha elsewhere)
//   unit:     sigma_i^2 = 1
struct WeightMode {
  enum class Kind { measured, model, unit };

  Kind kind = Kind::measured;
  double floor = 1.0;

  static WeightMode measured(double floor = 1.0) { return {Kind::measured, floor}; }
  static WeightMode model() { return {Kind::model, 1.0}; }
  static WeightMode unit() { return {Kind::unit, 1.0}; }

  bool operator==(const WeightMode&) const = default;
};

enum class Method { ls, modlik };

// Error propagation variants for the modified-likelihood estimate.
//   standard:      sum_i (c_i dm_i)^2 + sum_i (d_i dbg_i)^2
//   paper_literal: (sum_i c_i dm_i)^2 + (sum_i d_i dbg_i)^2
enum class UncertaintyVariant { standard, paper_literal };

struct Estimate {
  double alpha = 0.0;
  double delta_alpha = 0.0;
  Method method = Method::ls;
  // Modified-likelihood fits only.
  std::optional<UncertaintyVariant> variant;
  std::optional<double> score_residual;
  std::optional<int> positive_roots;
  std::optional<double> seed_alpha;
  // Weighted LS only.
  std::optional<int> iterations;

  bool operator==(const Estimate&) const = default;
};

// sigma_i^2 for every channel. Throws NumericalError if any is <= 0.
std::vector<double> channel_variances(const WeightMode& weights, const Spectrum& spectrum,
                                      const SignalModel& signal, double alpha);

// Weighted least squares amplitude:
//   alpha = sum(m F / s2) / sum(F^2 / s2),  delta = 1 / sqrt(sum(F^2 / s2)).
Estimate ls_estimate(const Spectrum& spectrum, const SignalModel& signal,
                     const WeightMode& weights = WeightMode::measured());

// Modified log-likelihood
//   -sum (m - aF - bg sqrt(aF))^2 / s2 + sum ln(1 / (sqrt(2 pi) s)).
// The first term has no factor 1/2.
double loglik_modified(double alpha, const Spectrum& spectrum, const SignalModel& signal,
                       const NoiseSequence& noise, const WeightMode& weights);

// Score of the modified likelihood for arbitrary variances:
//   sum mF/s2 - a sum F^2/s2 - (sqrt(a)/2) sum F^1.5 bg/s2
//   - (1/(2 sqrt(a))) sum m sqrt(F) bg/s2 + (1/2) sum F bg^2/s2
double score_general(double alpha, const Spectrum& spectrum, const SignalModel& signal,
                     const NoiseSequence& noise, const WeightMode& weights);

// Score under Poisson variances s2 = alpha F:
//   sum m - a sum F - (sqrt(a)/2) sum sqrt(F) bg - (1/(2 sqrt(a))) sum m bg/sqrt(F)
//   + (1/2) sum bg^2
double score_reduced(double alpha, const Spectrum& spectrum, const SignalModel& signal,
                     const NoiseSequence& noise);

struct SolveOptions {
  // Starting amplitude. Empty means use ls_estimate with measured weights.
  std::optional<double> init;
  double rel_tol = 1e-12;
  UncertaintyVariant variant = UncertaintyVariant::standard;
};

// Root of score_reduced in alpha.
//
// With u = sqrt(alpha) the score times u is the cubic
//   -S_F u^3 - (1/2) S_{sqrt(F) bg} u^2 + (S_m + (1/2) S_{bg^2}) u - (1/2) S_{m bg / sqrt(F)}
// over five channel sums. All roots with alpha in [seed/100, 100 seed] are
// bracketed and bisected; the one nearest the seed is returned and the number
// found is reported in positive_roots. delta_alpha comes from
// alpha_uncertainty with model weights at the root.
Estimate solve_alpha(const Spectrum& spectrum, const SignalModel& signal,
                     const NoiseSequence& noise, const SolveOptions& options = {});

// Propagated uncertainty of the modified-likelihood amplitude. dm_i is taken as
// sqrt(alpha F_i) and dbg_i as 1; sigma_i^2 follows `weights`.
double alpha_uncertainty(double alpha, const Spectrum& spectrum, const SignalModel& signal,
                         const NoiseSequence& noise, const WeightMode& weights,
                         UncertaintyVariant variant = UncertaintyVariant::standard);

struct ResidualReport {
  std::vector<double> residuals;   // m_i - alpha F_i
  std::vector<double> normalized;  // residual / sqrt(alpha F_i)
  std::size_t positive_count = 0;
  std::size_t negative_count = 0;
  double normalized_mean = 0.0;
  // Denominator n-1; zero for a single channel.
  double normalized_std = 0.0;

  bool operator==(const ResidualReport&) const = default;
};

ResidualReport residual_diagnostics(const Spectrum& spectrum, const SignalModel& signal,
                                    double alpha);

// Pass/warn assessment of a ResidualReport.
//
// Sign balance: among nonzero residuals (N of them) the positive count must lie in
// [floor(N/2 - z sqrt(N)/2), ceil(N/2 + z sqrt(N)/2)] with z = 3.96.
// Normalized mean: |mean| <= z / sqrt(n).
// Normalized std: within [0.9, 1.1], or exactly zero for an exact fit.
struct ResidualChecks {
  bool sign_balance_ok = false;
  std::size_t sign_band_low = 0;
  std::size_t sign_band_high = 0;
  bool mean_ok = false;
  double mean_bound = 0.0;
  bool std_ok = false;
  bool exact_fit = false;

  bool warn() const noexcept { return !(sign_balance_ok && mean_ok && std_ok); }
};

inline constexpr double kResidualBandZ = 3.96;
inline constexpr double kNormalizedStdLow = 0.9;
inline constexpr double kNormalizedStdHigh = 1.1;

// Inclusive band for the positive count among `nonzero` signed residuals.
std::pair<std::size_t, std::size_t> sign_balance_band(std::size_t nonzero, double z = kResidualBandZ);

ResidualChecks assess_residuals(const ResidualReport& report);

}  // namespace modlik
